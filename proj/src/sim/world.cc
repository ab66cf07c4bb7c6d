// Copyright 2026 The coopdqn Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "coopdqn/sim/world.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace coopdqn::sim {
namespace {

struct Box {
  double x_min, y_min, x_max, y_max;
};

// The four walls, with the south wall split around the doorway.
std::array<Box, 5> wall_boxes(const WorldConfig& c) {
  const double h = c.room_side / 2.0;
  const double o = h + c.door_depth;
  const double gap_lo = c.door_center_x - c.door_width / 2.0;
  const double gap_hi = c.door_center_x + c.door_width / 2.0;
  return {{
      {-o, h, o, o},          // north
      {h, -o, o, o},          // east
      {-o, -o, -h, o},        // west
      {-o, -o, gap_lo, -h},   // south, west of the door
      {gap_hi, -o, o, -h},    // south, east of the door
  }};
}

bool disk_hits_box(const Vec2& c, double r, const Box& b) {
  const double dx = std::max({b.x_min - c.x(), 0.0, c.x() - b.x_max});
  const double dy = std::max({b.y_min - c.y(), 0.0, c.y() - b.y_max});
  return dx * dx + dy * dy < r * r;
}

// Liang-Barsky clip of segment [p, q] against a closed box.
bool segment_hits_box(const Vec2& p, const Vec2& q, const Box& b) {
  double t0 = 0.0;
  double t1 = 1.0;
  const Vec2 d = q - p;
  const auto clip = [&](double denom, double num) {
    if (denom == 0.0) return num >= 0.0;
    const double t = num / denom;
    if (denom > 0.0) {
      if (t < t0) return false;
      t1 = std::min(t1, t);
    } else {
      if (t > t1) return false;
      t0 = std::max(t0, t);
    }
    return true;
  };
  return clip(-d.x(), p.x() - b.x_min) && clip(d.x(), b.x_max - p.x()) &&
         clip(-d.y(), p.y() - b.y_min) && clip(d.y(), b.y_max - p.y()) && t0 <= t1;
}

void write_block(Observation& obs, int offset, const Pose2& pose, const Pose2& rate) {
  obs[offset + 0] = pose.x;
  obs[offset + 1] = pose.y;
  obs[offset + 2] = wrap_angle(pose.angle);
  obs[offset + 3] = rate.x;
  obs[offset + 4] = rate.y;
  obs[offset + 5] = rate.angle;
}

Pose2 robot_pose(const SystemState& s, const WorldConfig& c, int robot) {
  const Vec2 p = robot_position(s, c, robot);
  return {p.x(), p.y(), s.theta[robot]};
}

}  // namespace

void WorldConfig::validate() const {
  const auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("invalid world config: ") + what);
  };
  require(room_side > 0.0, "room_side must be positive");
  require(door_width > 0.0 && door_depth > 0.0, "door dimensions must be positive");
  require(rod_length > 0.0 && robot_radius > 0.0, "rod and robot sizes must be positive");
  require(rod_length == door_width, "rod_length must equal door_width");
  require(rod_length + 2.0 * robot_radius > door_width,
          "rod plus robots must not fit through the door lengthwise");
  require(std::abs(door_center_x) + door_width / 2.0 < room_side / 2.0,
          "doorway must lie within the south wall");
  require(rod_length / 2.0 + robot_radius < room_side / 2.0, "room too small for the rod");
  require(dt > 0.0, "dt must be positive");
  require(wheel_speed_hi >= 0.0 && wheel_speed_lo >= 0.0, "wheel speeds must be >= 0");
  require(wheel_base > 0.0, "wheel_base must be positive");
  require(horizon >= 1, "horizon must be >= 1");
}

std::string_view outcome_name(Outcome outcome) {
  switch (outcome) {
    case Outcome::kRunning: return "running";
    case Outcome::kSuccess: return "success";
    case Outcome::kWallHit: return "wall_hit";
    case Outcome::kHorizonExceeded: return "horizon_exceeded";
  }
  return "unknown";
}

Outcome parse_outcome(std::string_view name) {
  for (Outcome o : {Outcome::kRunning, Outcome::kSuccess, Outcome::kWallHit,
                    Outcome::kHorizonExceeded}) {
    if (outcome_name(o) == name) return o;
  }
  throw std::invalid_argument("unknown outcome: " + std::string(name));
}

double wrap_angle(double angle) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle, kTwoPi);
  if (a > std::numbers::pi) a -= kTwoPi;
  if (a <= -std::numbers::pi) a += kTwoPi;
  return a;
}

Vec2 robot_position(const SystemState& state, const WorldConfig& config, int robot) {
  const double half = config.rod_length / 2.0;
  const Vec2 axis(std::cos(state.rod_phi), std::sin(state.rod_phi));
  return robot == 0 ? Vec2(state.rod_mid + half * axis) : Vec2(state.rod_mid - half * axis);
}

SystemState reset(const WorldConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  const double extent =
      config.room_side / 2.0 - (config.rod_length / 2.0 + config.robot_radius);
  std::uniform_real_distribution<double> pos(-extent, extent);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * std::numbers::pi);
  for (int attempt = 0; attempt < kMaxResetAttempts; ++attempt) {
    SystemState s;
    const double x = pos(rng);
    const double y = pos(rng);
    s.rod_mid = Vec2(x, y);
    s.rod_phi = wrap_angle(ang(rng));
    s.theta[0] = wrap_angle(ang(rng));
    s.theta[1] = wrap_angle(ang(rng));
    if (!check_collision(s, config)) return s;
  }
  throw std::runtime_error("reset: no collision-free state found; configuration infeasible");
}

WheelSpeeds action_to_wheel_speeds(Action action, const WorldConfig& config) {
  const double hi = config.wheel_speed_hi;
  const double lo = config.wheel_speed_lo;
  switch (action) {
    case Action::kForwardLeft: return {lo, hi};
    case Action::kForwardRight: return {hi, lo};
    case Action::kBackwardLeft: return {-lo, -hi};
    case Action::kBackwardRight: return {-hi, -lo};
  }
  throw std::invalid_argument("unknown action");
}

std::pair<double, double> body_twist(WheelSpeeds wheels, const WorldConfig& config) {
  return {(wheels.left + wheels.right) / 2.0, (wheels.right - wheels.left) / config.wheel_base};
}

std::pair<Vec2, double> fit_rod_twist(const Vec2& u1, const Vec2& u2, double rod_phi,
                                      double rod_length) {
  // Perpendicular (counter-clockwise) to the rod axis. The axial part of
  // u1 - u2 would stretch the rod and is discarded.
  const Vec2 normal(-std::sin(rod_phi), std::cos(rod_phi));
  return {(u1 + u2) / 2.0, (u1 - u2).dot(normal) / rod_length};
}

SystemState resolve_constrained_motion(const SystemState& state, Action action_1,
                                       Action action_2, const WorldConfig& config) {
  const std::array<Action, kNumRobots> actions{action_1, action_2};
  std::array<Vec2, kNumRobots> desired;
  std::array<double, kNumRobots> turn_rate{};
  for (int i = 0; i < kNumRobots; ++i) {
    const auto [speed, omega] = body_twist(action_to_wheel_speeds(actions[i], config), config);
    desired[i] = speed * Vec2(std::cos(state.theta[i]), std::sin(state.theta[i]));
    turn_rate[i] = omega;
  }
  const auto [rod_lin, rod_ang] =
      fit_rod_twist(desired[0], desired[1], state.rod_phi, config.rod_length);

  const double dt = config.dt;
  SystemState next = state;
  next.rod_mid = state.rod_mid + dt * rod_lin;
  next.rod_phi = wrap_angle(state.rod_phi + dt * rod_ang);
  next.rod_vel = {(next.rod_mid.x() - state.rod_mid.x()) / dt,
                  (next.rod_mid.y() - state.rod_mid.y()) / dt,
                  wrap_angle(next.rod_phi - state.rod_phi) / dt};
  for (int i = 0; i < kNumRobots; ++i) {
    next.theta[i] = wrap_angle(state.theta[i] + dt * turn_rate[i]);
    const Vec2 before = robot_position(state, config, i);
    const Vec2 after = robot_position(next, config, i);
    next.robot_vel[i] = {(after.x() - before.x()) / dt, (after.y() - before.y()) / dt,
                         wrap_angle(next.theta[i] - state.theta[i]) / dt};
  }
  return next;
}

bool check_collision(const SystemState& state, const WorldConfig& config) {
  const Vec2 p1 = robot_position(state, config, 0);
  const Vec2 p2 = robot_position(state, config, 1);
  for (const Box& b : wall_boxes(config)) {
    if (disk_hits_box(p1, config.robot_radius, b) || disk_hits_box(p2, config.robot_radius, b) ||
        segment_hits_box(p1, p2, b)) {
      return true;
    }
  }
  return false;
}

bool is_out_of_room(const SystemState& state, const WorldConfig& config) {
  const double outer = -(config.room_side / 2.0 + config.door_depth);
  for (int i = 0; i < kNumRobots; ++i) {
    const double y = robot_position(state, config, i).y();
    // Rod endpoints coincide with the disk centers; the disk bound is stricter.
    if (!(y < outer && y < outer - config.robot_radius)) return false;
  }
  return true;
}

std::array<double, kNumRobots> reward(Outcome reason, RewardMode mode) {
  double r = 0.0;
  if (mode == RewardMode::kDense) {
    switch (reason) {
      case Outcome::kSuccess: r = 400.0; break;
      case Outcome::kWallHit: r = -100.0; break;
      default: r = -0.1; break;
    }
  } else {
    r = reason == Outcome::kSuccess ? 1.0 : 0.0;
  }
  return {r, r};
}

StepOutcome step(const SystemState& state, Action action_1, Action action_2,
                 const WorldConfig& config) {
  if (state.step_count >= config.horizon || is_out_of_room(state, config) ||
      check_collision(state, config)) {
    throw std::logic_error("step: state is terminal");
  }
  StepOutcome out;
  out.next_state = resolve_constrained_motion(state, action_1, action_2, config);
  out.next_state.step_count = state.step_count + 1;
  if (is_out_of_room(out.next_state, config)) {
    out.reason = Outcome::kSuccess;
  } else if (check_collision(out.next_state, config)) {
    out.reason = Outcome::kWallHit;
  } else if (out.next_state.step_count >= config.horizon) {
    out.reason = Outcome::kHorizonExceeded;
  }
  out.done = out.reason != Outcome::kRunning;
  out.rewards = reward(out.reason, config.reward_mode);
  return out;
}

Observation observe(const SystemState& state, const WorldConfig& config, int robot) {
  if (robot != 0 && robot != 1) throw std::out_of_range("observe: robot index must be 0 or 1");
  const int mate = 1 - robot;
  Observation obs;
  write_block(obs, 0, robot_pose(state, config, robot), state.robot_vel[robot]);
  write_block(obs, 6, {state.rod_mid.x(), state.rod_mid.y(), state.rod_phi}, state.rod_vel);
  write_block(obs, 12, robot_pose(state, config, mate), state.robot_vel[mate]);
  return obs;
}

Observation global_observation(const SystemState& state, const WorldConfig& config) {
  return observe(state, config, 0);
}

}  // namespace coopdqn::sim

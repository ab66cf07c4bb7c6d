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

#ifndef COOPDQN_SIM_WORLD_H_
#define COOPDQN_SIM_WORLD_H_

#include <array>
#include <cstdint>
#include <string_view>
#include <utility>

#include <Eigen/Core>

namespace coopdqn::sim {

inline constexpr int kObservationSize = 18;
inline constexpr int kNumActions = 4;
inline constexpr int kNumRobots = 2;

using Vec2 = Eigen::Vector2d;
using Observation = Eigen::Matrix<double, kObservationSize, 1>;

enum class RewardMode { kSparse, kDense };

// Geometry and actuation of the rod-transport task. The room interior is the
// square [-room_side/2, room_side/2]^2, surrounded by walls of thickness
// door_depth; the doorway is a gap of door_width in the south wall.
struct WorldConfig {
  double room_side = 10.0;
  double door_width = 2.0;
  double door_depth = 1.0;
  double door_center_x = 0.0;
  double rod_length = 2.0;
  double robot_radius = 0.25;
  double dt = 0.1;
  double wheel_speed_hi = 1.5;
  double wheel_speed_lo = 0.5;
  double wheel_base = 0.5;
  int horizon = 1000;
  RewardMode reward_mode = RewardMode::kDense;

  // Throws std::invalid_argument naming the first violated constraint.
  void validate() const;
};

enum class Action : int {
  kForwardLeft = 0,
  kForwardRight = 1,
  kBackwardLeft = 2,
  kBackwardRight = 3,
};

// Planar pose and its rate, (x, y, angle).
struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double angle = 0.0;

  friend bool operator==(const Pose2&, const Pose2&) = default;
};

struct SystemState {
  Vec2 rod_mid = Vec2::Zero();
  double rod_phi = 0.0;  // rod x-axis, pointing toward robot 1
  Pose2 rod_vel;
  std::array<double, kNumRobots> theta{};
  std::array<Pose2, kNumRobots> robot_vel{};
  int step_count = 0;

  friend bool operator==(const SystemState&, const SystemState&) = default;
};

enum class Outcome { kRunning, kSuccess, kWallHit, kHorizonExceeded };

struct StepOutcome {
  SystemState next_state;
  std::array<double, kNumRobots> rewards{};
  bool done = false;
  Outcome reason = Outcome::kRunning;
};

struct WheelSpeeds {
  double left = 0.0;
  double right = 0.0;
};

std::string_view outcome_name(Outcome outcome);
// Inverse of outcome_name; throws std::invalid_argument on unknown names.
Outcome parse_outcome(std::string_view name);

// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

// Robot positions are derived from the rod pose, so the rod is rigid by
// construction. robot is 0 or 1.
Vec2 robot_position(const SystemState& state, const WorldConfig& config, int robot);

// Samples a collision-free state with zero velocities. Throws
// std::runtime_error if no valid state is found after kMaxResetAttempts.
inline constexpr int kMaxResetAttempts = 10000;
SystemState reset(const WorldConfig& config, std::uint64_t seed);

WheelSpeeds action_to_wheel_speeds(Action action, const WorldConfig& config);

// Body speed and turn rate of a differential-drive robot.
std::pair<double, double> body_twist(WheelSpeeds wheels, const WorldConfig& config);

// Least-squares rigid twist of the rod fitted to the two desired endpoint
// velocities. Returns (linear velocity of the midpoint, angular rate).
std::pair<Vec2, double> fit_rod_twist(const Vec2& u1, const Vec2& u2, double rod_phi,
                                      double rod_length);

SystemState resolve_constrained_motion(const SystemState& state, Action action_1,
                                       Action action_2, const WorldConfig& config);

bool check_collision(const SystemState& state, const WorldConfig& config);
bool is_out_of_room(const SystemState& state, const WorldConfig& config);

std::array<double, kNumRobots> reward(Outcome reason, RewardMode mode);

// Advances one control step. Stepping a terminal state throws
// std::logic_error.
StepOutcome step(const SystemState& state, Action action_1, Action action_2,
                 const WorldConfig& config);

// Per-robot observation: own pose and rate, rod pose and rate, teammate pose
// and rate. Angles are wrapped into (-pi, pi]. robot is 0 or 1; anything else
// throws std::out_of_range.
Observation observe(const SystemState& state, const WorldConfig& config, int robot);

// Canonical ordering for the centralized controller: robot 1, rod, robot 2.
Observation global_observation(const SystemState& state, const WorldConfig& config);

}  // namespace coopdqn::sim

#endif  // COOPDQN_SIM_WORLD_H_

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

#include "coopdqn/sim/trajectory_csv.h"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace coopdqn::sim {
namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double to_double(const std::string& s, std::size_t line_no) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) {
    throw std::runtime_error("trajectory line " + std::to_string(line_no) + ": bad number '" +
                             s + "'");
  }
  return v;
}

Action to_action(const std::string& s, std::size_t line_no) {
  const double v = to_double(s, line_no);
  if (v != std::floor(v) || v < 0 || v >= kNumActions) {
    throw std::runtime_error("trajectory line " + std::to_string(line_no) + ": bad action");
  }
  return static_cast<Action>(static_cast<int>(v));
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRow>& rows,
                          const WorldConfig& config, bool with_q) {
  out << kTrajectoryHeader;
  if (with_q) out << kQColumns;
  out << "\n";
  char buf[640];
  for (const TrajectoryRow& r : rows) {
    const Vec2 p1 = robot_position(r.state, config, 0);
    const Vec2 p2 = robot_position(r.state, config, 1);
    std::snprintf(buf, sizeof(buf),
                  "%lld,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d,%.17g,%d,%s",
                  static_cast<long long>(r.episode), r.state.step_count, r.state.rod_mid.x(),
                  r.state.rod_mid.y(), r.state.rod_phi, p1.x(), p1.y(), r.state.theta[0], p2.x(),
                  p2.y(), r.state.theta[1], static_cast<int>(r.a1), static_cast<int>(r.a2),
                  r.reward, r.done ? 1 : 0, std::string(outcome_name(r.reason)).c_str());
    out << buf;
    if (with_q) {
      if (!r.q_max) throw std::invalid_argument("trajectory row lacks q values");
      std::snprintf(buf, sizeof(buf), ",%.17g,%.17g", (*r.q_max)[0], (*r.q_max)[1]);
      out << buf;
    }
    out << "\n";
  }
}

std::vector<TrajectoryRow> read_trajectory_csv(std::istream& in, const WorldConfig& config) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("trajectory file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  bool with_q = false;
  if (line == std::string(kTrajectoryHeader) + std::string(kQColumns)) {
    with_q = true;
  } else if (line != kTrajectoryHeader) {
    throw std::runtime_error("unrecognized trajectory header");
  }
  const std::size_t expected = with_q ? 18 : 16;

  std::vector<TrajectoryRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != expected) {
      throw std::runtime_error("trajectory line " + std::to_string(line_no) + ": expected " +
                               std::to_string(expected) + " fields");
    }
    TrajectoryRow r;
    r.episode = static_cast<std::int64_t>(to_double(f[0], line_no));
    r.state.step_count = static_cast<int>(to_double(f[1], line_no));
    r.state.rod_mid = Vec2(to_double(f[2], line_no), to_double(f[3], line_no));
    r.state.rod_phi = to_double(f[4], line_no);
    r.state.theta[0] = to_double(f[7], line_no);
    r.state.theta[1] = to_double(f[10], line_no);
    r.a1 = to_action(f[11], line_no);
    r.a2 = to_action(f[12], line_no);
    r.reward = to_double(f[13], line_no);
    r.done = to_double(f[14], line_no) != 0.0;
    try {
      r.reason = parse_outcome(f[15]);
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error("trajectory line " + std::to_string(line_no) + ": " + e.what());
    }
    if (with_q) r.q_max = std::array<double, 2>{to_double(f[16], line_no), to_double(f[17], line_no)};
    for (double v : {r.state.rod_mid.x(), r.state.rod_mid.y(), r.state.rod_phi, r.state.theta[0],
                     r.state.theta[1], r.reward}) {
      if (!std::isfinite(v)) {
        throw std::runtime_error("trajectory line " + std::to_string(line_no) + ": non-finite value");
      }
    }

    const bool continues = !rows.empty() && rows.back().episode == r.episode &&
                           rows.back().state.step_count + 1 == r.state.step_count;
    if (continues) {
      const SystemState& prev = rows.back().state;
      const double dt = config.dt;
      r.state.rod_vel = {(r.state.rod_mid.x() - prev.rod_mid.x()) / dt,
                         (r.state.rod_mid.y() - prev.rod_mid.y()) / dt,
                         wrap_angle(r.state.rod_phi - prev.rod_phi) / dt};
      for (int i = 0; i < kNumRobots; ++i) {
        const Vec2 before = robot_position(prev, config, i);
        const Vec2 after = robot_position(r.state, config, i);
        r.state.robot_vel[i] = {(after.x() - before.x()) / dt, (after.y() - before.y()) / dt,
                                wrap_angle(r.state.theta[i] - prev.theta[i]) / dt};
      }
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace coopdqn::sim

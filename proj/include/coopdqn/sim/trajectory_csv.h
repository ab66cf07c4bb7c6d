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

#ifndef COOPDQN_SIM_TRAJECTORY_CSV_H_
#define COOPDQN_SIM_TRAJECTORY_CSV_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "coopdqn/sim/world.h"

namespace coopdqn::sim {

// One simulator step: the state the actions were chosen in, the actions, and
// what the step produced. Optional max-Q columns are appended by evaluation.
struct TrajectoryRow {
  std::int64_t episode = 0;
  SystemState state;
  Action a1 = Action::kForwardLeft;
  Action a2 = Action::kForwardLeft;
  double reward = 0.0;
  bool done = false;
  Outcome reason = Outcome::kRunning;
  std::optional<std::array<double, kNumRobots>> q_max;
};

inline constexpr std::string_view kTrajectoryHeader =
    "episode,t,rod_x,rod_y,rod_phi,x1,y1,th1,x2,y2,th2,a1,a2,reward,done,reason";
inline constexpr std::string_view kQColumns = ",q1_max,q2_max";

// Writes a header and the rows at full double precision. with_q selects the
// augmented layout; rows lacking q_max then throw std::invalid_argument.
void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRow>& rows,
                          const WorldConfig& config, bool with_q);

// Parses either layout. Velocities are rebuilt by finite differences of
// consecutive poses within an episode, the first row of each episode being
// at rest, which reproduces simulator states exactly. Throws
// std::runtime_error on malformed input.
std::vector<TrajectoryRow> read_trajectory_csv(std::istream& in, const WorldConfig& config);

}  // namespace coopdqn::sim

#endif  // COOPDQN_SIM_TRAJECTORY_CSV_H_

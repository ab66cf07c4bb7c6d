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

#ifndef COOPDQN_EVAL_TRACE_IO_H_
#define COOPDQN_EVAL_TRACE_IO_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "coopdqn/eval/evaluate.h"
#include "coopdqn/sim/trajectory_csv.h"

namespace coopdqn::eval {

// Rows of a recorded trace in the trajectory layout, with max-Q columns.
std::vector<sim::TrajectoryRow> trace_rows(const EpisodeTrace& trace, std::int64_t episode);

// Writes several recorded traces to one augmented trajectory CSV; episode
// numbers start at 1. Throws std::runtime_error on I/O failure.
void write_trace_csv(const std::filesystem::path& path, std::span<const EpisodeTrace> traces,
                     const sim::WorldConfig& world);

struct StoredEpisode {
  std::int64_t episode = 0;
  std::vector<sim::TrajectoryRow> rows;

  std::vector<sim::SystemState> states() const;
};

// Groups rows by episode, in file order. Throws std::runtime_error on a
// malformed or empty file.
std::vector<StoredEpisode> load_trace_csv(const std::filesystem::path& path,
                                          const sim::WorldConfig& world);

}  // namespace coopdqn::eval

#endif  // COOPDQN_EVAL_TRACE_IO_H_

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

#include "coopdqn/eval/trace_io.h"

#include <fstream>
#include <stdexcept>

namespace coopdqn::eval {

std::vector<sim::TrajectoryRow> trace_rows(const EpisodeTrace& trace, std::int64_t episode) {
  if (trace.steps.size() != static_cast<std::size_t>(trace.steps_used)) {
    throw std::invalid_argument("trace was not recorded step by step");
  }
  std::vector<sim::TrajectoryRow> rows;
  rows.reserve(trace.steps.size());
  for (std::size_t t = 0; t < trace.steps.size(); ++t) {
    const TraceStep& s = trace.steps[t];
    rows.push_back({episode, s.state, s.actions[0], s.actions[1], s.reward, s.done, s.reason,
                    std::array<double, 2>{trace.q_max[0][t], trace.q_max[1][t]}});
  }
  return rows;
}

void write_trace_csv(const std::filesystem::path& path, std::span<const EpisodeTrace> traces,
                     const sim::WorldConfig& world) {
  std::vector<sim::TrajectoryRow> rows;
  for (std::size_t k = 0; k < traces.size(); ++k) {
    auto r = trace_rows(traces[k], static_cast<std::int64_t>(k + 1));
    rows.insert(rows.end(), r.begin(), r.end());
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write trace file " + path.string());
  sim::write_trajectory_csv(out, rows, world, true);
  if (!out) throw std::runtime_error("failed writing trace file " + path.string());
}

std::vector<sim::SystemState> StoredEpisode::states() const {
  std::vector<sim::SystemState> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.state);
  return out;
}

std::vector<StoredEpisode> load_trace_csv(const std::filesystem::path& path,
                                          const sim::WorldConfig& world) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file " + path.string());
  const auto rows = sim::read_trajectory_csv(in, world);
  if (rows.empty()) throw std::runtime_error("trace file has no steps: " + path.string());
  std::vector<StoredEpisode> episodes;
  for (const auto& r : rows) {
    if (episodes.empty() || episodes.back().episode != r.episode) {
      episodes.push_back({r.episode, {}});
    }
    episodes.back().rows.push_back(r);
  }
  return episodes;
}

}  // namespace coopdqn::eval

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

#ifndef COOPDQN_TRAIN_TRAINER_H_
#define COOPDQN_TRAIN_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "coopdqn/dqn/agent.h"
#include "coopdqn/dqn/replay_buffer.h"
#include "coopdqn/sim/world.h"

namespace coopdqn::train {

enum class Algorithm { kHomogeneous, kHeterogeneous, kCentralized };

// Short names used on the command line and in checkpoint file names:
// "homo", "hete", "central".
std::string_view algorithm_name(Algorithm algorithm);
// Throws std::invalid_argument on unknown names.
Algorithm parse_algorithm(std::string_view name);

inline constexpr int kJointActions = sim::kNumActions * sim::kNumActions;

// Joint action index = a1 * 4 + a2.
int encode_joint_action(sim::Action a1, sim::Action a2);
std::pair<sim::Action, sim::Action> decode_joint_action(int index);

struct TrainConfig {
  Algorithm algorithm = Algorithm::kHomogeneous;
  int episodes = 30000;
  sim::WorldConfig world;
  dqn::AgentConfig agent;
  dqn::EpsilonSchedule epsilon;
  std::size_t buffer_capacity = dqn::ReplayBuffer::kDefaultCapacity;
  // Robot transitions between periodic checkpoints.
  std::int64_t checkpoint_interval = 1'000'000;
  // Empty: keep everything in memory.
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;

  void validate() const;
};

// Hyperparameters of the original large-scale runs.
TrainConfig full_preset(Algorithm algorithm);
// Scaled down to finish on one desktop core in well under an hour.
TrainConfig desk_preset(Algorithm algorithm);

struct EpisodeLog {
  std::int64_t episode = 0;  // 1-based
  int steps = 0;
  double total_reward = 0.0;
  double avg_total_reward = 0.0;
  sim::Outcome reason = sim::Outcome::kRunning;
  std::int64_t interactions = 0;
  double epsilon = 0.0;
  double loss_mean = 0.0;  // 0 when no gradient step was taken
  double wall_seconds = 0.0;
};

inline constexpr std::string_view kEpisodeLogHeader =
    "episode,steps,total_reward,avg_total_reward,reason,interactions,epsilon,loss_mean";

// One CSV row (no trailing newline). Wall-clock time is not part of the row,
// so logs of identical runs are byte-identical.
std::string format_log_row(const EpisodeLog& row);

struct CheckpointRecord {
  std::filesystem::path path;
  std::string owner;  // "shared", "robot1", "robot2" or "joint"
  std::int64_t interactions = 0;
  std::int64_t episode = 0;
};

struct TrainResult {
  std::vector<EpisodeLog> log;
  std::vector<CheckpointRecord> checkpoints;
  std::vector<nn::QNetParams> final_params;
  std::int64_t interactions = 0;
  bool diverged = false;
  std::string error;
};

// Drives one training run. The free functions below cover the common case;
// the class exposes agents and buffers for inspection.
class Trainer {
 public:
  explicit Trainer(TrainConfig config);
  ~Trainer();
  Trainer(const Trainer&) = delete;
  Trainer& operator=(const Trainer&) = delete;

  TrainResult run();

  const TrainConfig& config() const { return config_; }
  std::span<const dqn::DqnAgent> agents() const { return agents_; }
  std::span<const dqn::ReplayBuffer> buffers() const { return buffers_; }

 private:
  struct Logger;

  // Runs one episode and returns its log row (without running averages).
  EpisodeLog run_episode(std::int64_t episode_index);
  void maybe_checkpoint(std::int64_t episode, bool force);
  void write_checkpoints(std::int64_t episode);
  std::string owner_name(std::size_t learner) const;

  TrainConfig config_;
  std::vector<dqn::DqnAgent> agents_;
  std::vector<dqn::ReplayBuffer> buffers_;
  std::vector<Rng> explore_rngs_;
  std::unique_ptr<Logger> logger_;
  std::vector<CheckpointRecord> checkpoints_;
  std::int64_t interactions_ = 0;
  std::int64_t last_checkpoint_block_ = 0;
  double loss_sum_ = 0.0;
  std::int64_t loss_count_ = 0;
};

TrainResult train_homogeneous(TrainConfig config);
TrainResult train_heterogeneous(TrainConfig config);
TrainResult train_centralized(TrainConfig config);
TrainResult train(const TrainConfig& config);

// Running mean of episode returns. Throws std::invalid_argument when empty.
std::vector<double> averaged_total_reward(std::span<const double> episode_returns);

// sum_k gamma^k r_{k+1}.
double discounted_return(std::span<const double> rewards, double gamma);

}  // namespace coopdqn::train

#endif  // COOPDQN_TRAIN_TRAINER_H_

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

#ifndef COOPDQN_DQN_AGENT_H_
#define COOPDQN_DQN_AGENT_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "coopdqn/common/seeding.h"
#include "coopdqn/dqn/replay_buffer.h"
#include "coopdqn/nn/mlp.h"

namespace coopdqn::dqn {

// Exploration rate per episode: held at `initial` through the warm-up, then
// linear down to `final` over `decay_period` episodes.
struct EpsilonSchedule {
  double initial = 1.0;
  double final = 0.1;
  int decay_period = 2000;
  int warmup_episodes = 500;
};

double epsilon_at(const EpsilonSchedule& schedule, std::int64_t episode);

struct AgentConfig {
  double gamma = 0.99;
  int batch_size = 8192;
  // Counted in gradient steps.
  int target_sync_period = 8000;
  int action_count = 4;
  int hidden = nn::kDefaultHidden;
  nn::OptimizerConfig optimizer;

  void validate() const;
};

// Epsilon-greedy choice from precomputed action values. Always consumes one
// uniform draw, plus one more when exploring.
int select_action(const Eigen::Ref<const Eigen::RowVectorXd>& q_values, double epsilon, Rng& rng);

int select_action(const nn::QNetParams& params, const Eigen::Ref<const Eigen::VectorXd>& obs,
                  double epsilon, Rng& rng);

// Double-DQN regression targets: the active net picks the next action, the
// target net values it. Terminal rows take the bare reward.
std::vector<double> ddqn_targets(const Batch& batch, const nn::QNetParams& active,
                                 const nn::QNetParams& target, double gamma);

// One learner: active and target networks plus optimizer state.
class DqnAgent {
 public:
  DqnAgent(int in_dim, const AgentConfig& config, std::uint64_t init_seed,
           std::uint64_t sample_seed);

  // Sample -> targets -> loss and gradients -> optimizer step, then a target
  // sync every target_sync_period gradient steps. Returns the batch loss.
  double train_step(const ReplayBuffer& buffer);

  const nn::QNetParams& active() const { return active_; }
  const nn::QNetParams& target() const { return target_; }
  const AgentConfig& config() const { return config_; }
  std::int64_t gradient_steps() const { return gradient_steps_; }

  // Replaces both networks; used to restore checkpoints.
  void load_params(const nn::QNetParams& params);

 private:
  AgentConfig config_;
  nn::QNetParams active_;
  nn::QNetParams target_;
  nn::OptimizerState optimizer_;
  Rng sample_rng_;
  std::int64_t gradient_steps_ = 0;
};

struct AgentMeta {
  std::int64_t gradient_steps = 0;
  std::int64_t episode = 0;
  std::int64_t interactions = 0;
  double epsilon = 0.0;
};

// Writes the active network as a checkpoint plus a "<path>.meta" sidecar.
void save_agent(const std::filesystem::path& path, const DqnAgent& agent, const AgentMeta& meta);
AgentMeta load_agent_meta(const std::filesystem::path& checkpoint_path);

}  // namespace coopdqn::dqn

#endif  // COOPDQN_DQN_AGENT_H_

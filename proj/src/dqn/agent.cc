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

#include "coopdqn/dqn/agent.h"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <stdexcept>
#include <string>

#include "coopdqn/nn/checkpoint.h"

namespace coopdqn::dqn {

double epsilon_at(const EpsilonSchedule& schedule, std::int64_t episode) {
  if (episode < schedule.warmup_episodes) return schedule.initial;
  const std::int64_t since = episode - schedule.warmup_episodes;
  if (since >= schedule.decay_period) return schedule.final;
  const double frac = static_cast<double>(since) / schedule.decay_period;
  return schedule.initial + frac * (schedule.final - schedule.initial);
}

void AgentConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must be in [0, 1]");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (target_sync_period < 1) throw std::invalid_argument("target_sync_period must be >= 1");
  if (action_count < 1) throw std::invalid_argument("action_count must be >= 1");
  if (hidden < 1) throw std::invalid_argument("hidden must be >= 1");
  if (!(optimizer.learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
}

int select_action(const Eigen::Ref<const Eigen::RowVectorXd>& q_values, double epsilon,
                  Rng& rng) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < epsilon) {
    std::uniform_int_distribution<int> pick(0, static_cast<int>(q_values.size()) - 1);
    return pick(rng);
  }
  return nn::argmax(q_values);
}

int select_action(const nn::QNetParams& params, const Eigen::Ref<const Eigen::VectorXd>& obs,
                  double epsilon, Rng& rng) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < epsilon) {
    std::uniform_int_distribution<int> pick(0, params.out_dim() - 1);
    return pick(rng);
  }
  const nn::Matrix q = nn::forward(params, obs.transpose());
  return nn::argmax(q.row(0));
}

std::vector<double> ddqn_targets(const Batch& batch, const nn::QNetParams& active,
                                 const nn::QNetParams& target, double gamma) {
  const auto n = static_cast<Eigen::Index>(batch.size());
  if (batch.s_next.rows() != n || batch.rewards.size() != batch.size() ||
      batch.done.size() != batch.size()) {
    throw std::invalid_argument("ddqn_targets: inconsistent batch");
  }
  if (!active.same_shape(target)) throw std::invalid_argument("ddqn_targets: net shape mismatch");
  std::vector<double> y(batch.rewards.begin(), batch.rewards.end());
  if (std::all_of(batch.done.begin(), batch.done.end(), [](char d) { return d != 0; })) return y;
  const nn::Matrix q_active = nn::forward(active, batch.s_next);
  const nn::Matrix q_target = nn::forward(target, batch.s_next);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (batch.done[j]) continue;
    const int best = nn::argmax(q_active.row(j));
    y[j] += gamma * q_target(j, best);
  }
  return y;
}

DqnAgent::DqnAgent(int in_dim, const AgentConfig& config, std::uint64_t init_seed,
                   std::uint64_t sample_seed)
    : config_(config),
      active_(nn::init_params(in_dim, config.action_count, init_seed, config.hidden)),
      target_(active_),
      optimizer_(nn::make_optimizer(active_, config.optimizer)),
      sample_rng_(sample_seed) {
  config_.validate();
}

double DqnAgent::train_step(const ReplayBuffer& buffer) {
  const Batch batch = buffer.sample_batch(static_cast<std::size_t>(config_.batch_size), sample_rng_);
  const std::vector<double> y = ddqn_targets(batch, active_, target_, config_.gamma);
  const nn::LossAndGradients lg = nn::loss_and_gradients(active_, batch.s, batch.actions, y);
  nn::optimizer_step(active_, lg.gradients, optimizer_);
  ++gradient_steps_;
  if (gradient_steps_ % config_.target_sync_period == 0) target_ = nn::copy_params(active_);
  return lg.loss;
}

void DqnAgent::load_params(const nn::QNetParams& params) {
  if (!params.same_shape(active_)) throw std::invalid_argument("load_params: shape mismatch");
  active_ = params;
  target_ = params;
}

void save_agent(const std::filesystem::path& path, const DqnAgent& agent, const AgentMeta& meta) {
  nn::save_checkpoint(path, agent.active(), {.interactions = meta.interactions,
                                             .episode = meta.episode});
  std::filesystem::path sidecar = path;
  sidecar += ".meta";
  std::ofstream out(sidecar, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + sidecar.string());
  out << "gradient_steps=" << meta.gradient_steps << "\n"
      << "episode=" << meta.episode << "\n"
      << "interactions=" << meta.interactions << "\n"
      << std::setprecision(17) << "epsilon=" << meta.epsilon << "\n";
}

AgentMeta load_agent_meta(const std::filesystem::path& checkpoint_path) {
  std::filesystem::path sidecar = checkpoint_path;
  sidecar += ".meta";
  std::ifstream in(sidecar);
  if (!in) throw std::runtime_error("cannot open " + sidecar.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  try {
    return {std::stoll(kv.at("gradient_steps")), std::stoll(kv.at("episode")),
            std::stoll(kv.at("interactions")), std::stod(kv.at("epsilon"))};
  } catch (const std::exception&) {
    throw std::runtime_error("malformed agent sidecar: " + sidecar.string());
  }
}

}  // namespace coopdqn::dqn

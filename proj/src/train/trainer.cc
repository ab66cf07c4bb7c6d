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

#include "coopdqn/train/trainer.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "coopdqn/common/seeding.h"
#include "coopdqn/nn/checkpoint.h"

namespace coopdqn::train {

std::string_view algorithm_name(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kHomogeneous: return "homo";
    case Algorithm::kHeterogeneous: return "hete";
    case Algorithm::kCentralized: return "central";
  }
  return "unknown";
}

Algorithm parse_algorithm(std::string_view name) {
  for (Algorithm a :
       {Algorithm::kHomogeneous, Algorithm::kHeterogeneous, Algorithm::kCentralized}) {
    if (algorithm_name(a) == name) return a;
  }
  throw std::invalid_argument("unknown algorithm: " + std::string(name));
}

int encode_joint_action(sim::Action a1, sim::Action a2) {
  return static_cast<int>(a1) * sim::kNumActions + static_cast<int>(a2);
}

std::pair<sim::Action, sim::Action> decode_joint_action(int index) {
  if (index < 0 || index >= kJointActions) throw std::out_of_range("joint action out of range");
  return {static_cast<sim::Action>(index / sim::kNumActions),
          static_cast<sim::Action>(index % sim::kNumActions)};
}

void TrainConfig::validate() const {
  if (episodes < 1) throw std::invalid_argument("episodes must be >= 1");
  if (checkpoint_interval < 1) throw std::invalid_argument("checkpoint_interval must be >= 1");
  if (buffer_capacity < 1) throw std::invalid_argument("buffer_capacity must be >= 1");
  world.validate();
  agent.validate();
  const int expected =
      algorithm == Algorithm::kCentralized ? kJointActions : sim::kNumActions;
  if (agent.action_count != expected) {
    throw std::invalid_argument("action_count must be " + std::to_string(expected) + " for " +
                                std::string(algorithm_name(algorithm)));
  }
}

TrainConfig full_preset(Algorithm algorithm) {
  TrainConfig c;
  c.algorithm = algorithm;
  c.episodes = 30000;
  c.world.horizon = 1000;
  c.agent.gamma = 0.99;
  c.agent.batch_size = 8192;
  c.agent.target_sync_period = 8000;
  c.agent.hidden = 256;
  c.agent.optimizer.learning_rate = 1e-4;
  c.agent.action_count =
      algorithm == Algorithm::kCentralized ? kJointActions : sim::kNumActions;
  c.epsilon = {.initial = 1.0, .final = 0.1, .decay_period = 2000, .warmup_episodes = 500};
  c.buffer_capacity = 10'000'000;
  c.checkpoint_interval = 1'000'000;
  return c;
}

TrainConfig desk_preset(Algorithm algorithm) {
  TrainConfig c = full_preset(algorithm);
  c.episodes = 3000;
  c.world.horizon = 500;
  c.agent.batch_size = 64;
  c.agent.target_sync_period = 1000;
  c.agent.hidden = 64;
  c.buffer_capacity = 100'000;
  c.checkpoint_interval = 100'000;
  return c;
}

std::string format_log_row(const EpisodeLog& row) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%lld,%d,%.10g,%.10g,%s,%lld,%.6f,%.10g",
                static_cast<long long>(row.episode), row.steps, row.total_reward,
                row.avg_total_reward, std::string(sim::outcome_name(row.reason)).c_str(),
                static_cast<long long>(row.interactions), row.epsilon, row.loss_mean);
  return buf;
}

struct Trainer::Logger {
  std::ofstream csv;
};

Trainer::Trainer(TrainConfig config) : config_(std::move(config)) {
  config_.validate();
  const bool per_robot = config_.algorithm == Algorithm::kHeterogeneous;
  const std::size_t learners = per_robot ? 2 : 1;
  for (std::size_t i = 0; i < learners; ++i) {
    agents_.emplace_back(sim::kObservationSize, config_.agent,
                         derive_seed(config_.seed, SeedStream::kNetInit, i),
                         derive_seed(config_.seed, SeedStream::kAgentSampling, i));
    buffers_.emplace_back(config_.buffer_capacity, sim::kObservationSize);
  }
  // One exploration stream per acting robot; the centralized controller acts
  // once per step.
  const std::size_t actors = config_.algorithm == Algorithm::kCentralized ? 1 : 2;
  for (std::size_t i = 0; i < actors; ++i) {
    explore_rngs_.emplace_back(derive_seed(config_.seed, SeedStream::kAgentExploration, i));
  }
  if (!config_.output_dir.empty()) {
    std::filesystem::create_directories(config_.output_dir);
    logger_ = std::make_unique<Logger>();
    const auto path = config_.output_dir /
                      (std::string(algorithm_name(config_.algorithm)) + "_episodes.csv");
    logger_->csv.open(path, std::ios::trunc);
    if (!logger_->csv) throw std::runtime_error("cannot open episode log " + path.string());
    logger_->csv << kEpisodeLogHeader << "\n";
  }
}

Trainer::~Trainer() = default;

std::string Trainer::owner_name(std::size_t learner) const {
  switch (config_.algorithm) {
    case Algorithm::kHomogeneous: return "shared";
    case Algorithm::kHeterogeneous: return learner == 0 ? "robot1" : "robot2";
    case Algorithm::kCentralized: return "joint";
  }
  return "unknown";
}

void Trainer::write_checkpoints(std::int64_t episode) {
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    const std::string owner = owner_name(i);
    // The final checkpoint may coincide with the last periodic one.
    const bool exists = std::any_of(checkpoints_.begin(), checkpoints_.end(), [&](const auto& c) {
      return c.owner == owner && c.interactions == interactions_;
    });
    if (exists) continue;
    CheckpointRecord rec{{}, owner, interactions_, episode};
    if (!config_.output_dir.empty()) {
      rec.path = config_.output_dir / (std::string(algorithm_name(config_.algorithm)) + "_" +
                                       owner + "_" + std::to_string(interactions_) + ".ckpt");
      dqn::save_agent(rec.path, agents_[i],
                      {.gradient_steps = agents_[i].gradient_steps(),
                       .episode = episode,
                       .interactions = interactions_,
                       .epsilon = dqn::epsilon_at(config_.epsilon, episode - 1)});
    }
    checkpoints_.push_back(std::move(rec));
  }
}

void Trainer::maybe_checkpoint(std::int64_t episode, bool force) {
  const std::int64_t block = interactions_ / config_.checkpoint_interval;
  if (block > last_checkpoint_block_ || force) {
    last_checkpoint_block_ = block;
    write_checkpoints(episode);
  }
}

EpisodeLog Trainer::run_episode(std::int64_t e) {
  const sim::WorldConfig& world = config_.world;
  const double eps = dqn::epsilon_at(config_.epsilon, e);
  const bool learning = e >= config_.epsilon.warmup_episodes;
  const bool central = config_.algorithm == Algorithm::kCentralized;
  const bool per_robot = config_.algorithm == Algorithm::kHeterogeneous;
  const int per_step = central ? 1 : 2;

  EpisodeLog row;
  row.episode = e + 1;
  row.epsilon = eps;
  loss_sum_ = 0.0;
  loss_count_ = 0;

  sim::SystemState state = sim::reset(world, derive_seed(config_.seed, SeedStream::kEnvReset, e));
  nn::Matrix obs(per_step, sim::kObservationSize);
  nn::Matrix next_obs(per_step, sim::kObservationSize);
  const auto fill = [&](const sim::SystemState& s, nn::Matrix& m) {
    if (central) {
      m.row(0) = sim::global_observation(s, world).transpose();
    } else {
      m.row(0) = sim::observe(s, world, 0).transpose();
      m.row(1) = sim::observe(s, world, 1).transpose();
    }
  };
  fill(state, obs);

  std::uniform_real_distribution<double> coin(0.0, 1.0);
  while (true) {
    // Exploration draws come first so the random stream does not depend on
    // whether a forward pass was needed.
    std::array<int, 2> act{-1, -1};
    bool need_greedy = false;
    for (int i = 0; i < per_step; ++i) {
      Rng& rng = explore_rngs_[i];
      if (coin(rng) < eps) {
        std::uniform_int_distribution<int> pick(0, config_.agent.action_count - 1);
        act[i] = pick(rng);
      } else {
        need_greedy = true;
      }
    }
    if (need_greedy) {
      if (per_robot) {
        for (int i = 0; i < 2; ++i) {
          if (act[i] < 0) act[i] = nn::argmax(nn::forward(agents_[i].active(), obs.row(i)).row(0));
        }
      } else {
        const nn::Matrix q = nn::forward(agents_[0].active(), obs);
        for (int i = 0; i < per_step; ++i) {
          if (act[i] < 0) act[i] = nn::argmax(q.row(i));
        }
      }
    }
    sim::Action a1, a2;
    if (central) {
      std::tie(a1, a2) = decode_joint_action(act[0]);
    } else {
      a1 = static_cast<sim::Action>(act[0]);
      a2 = static_cast<sim::Action>(act[1]);
    }
    const sim::StepOutcome out = sim::step(state, a1, a2, world);
    fill(out.next_state, next_obs);
    // Running out of time is not an absorbing state; the target still
    // bootstraps through it.
    const bool absorbing =
        out.reason == sim::Outcome::kSuccess || out.reason == sim::Outcome::kWallHit;
    for (int i = 0; i < per_step; ++i) {
      dqn::ReplayBuffer& buffer = buffers_[per_robot ? i : 0];
      buffer.push({obs.row(i).transpose(), act[i], next_obs.row(i).transpose(),
                   out.rewards[i], absorbing});
    }
    interactions_ += per_step;
    if (learning) {
      for (std::size_t k = 0; k < agents_.size(); ++k) {
        loss_sum_ += agents_[k].train_step(buffers_[k]);
        ++loss_count_;
      }
    }
    row.total_reward += out.rewards[0];
    ++row.steps;
    state = out.next_state;
    std::swap(obs, next_obs);
    maybe_checkpoint(e + 1, false);
    if (out.done) {
      row.reason = out.reason;
      break;
    }
  }
  row.interactions = interactions_;
  row.loss_mean = loss_count_ > 0 ? loss_sum_ / static_cast<double>(loss_count_) : 0.0;
  return row;
}

TrainResult Trainer::run() {
  TrainResult result;
  double return_sum = 0.0;
  for (std::int64_t e = 0; e < config_.episodes; ++e) {
    const auto start = std::chrono::steady_clock::now();
    EpisodeLog row;
    try {
      row = run_episode(e);
    } catch (const nn::DivergenceError& err) {
      // Non-finite loss: keep the evidence and stop.
      result.diverged = true;
      result.error = err.what();
      write_checkpoints(e + 1);
      break;
    }
    return_sum += row.total_reward;
    row.avg_total_reward = return_sum / static_cast<double>(e + 1);
    row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (logger_) logger_->csv << format_log_row(row) << "\n" << std::flush;
    result.log.push_back(row);
  }
  if (!result.diverged) maybe_checkpoint(config_.episodes, true);
  result.checkpoints = checkpoints_;
  result.interactions = interactions_;
  for (const auto& agent : agents_) result.final_params.push_back(agent.active());
  return result;
}

TrainResult train(const TrainConfig& config) {
  Trainer trainer(config);
  return trainer.run();
}

TrainResult train_homogeneous(TrainConfig config) {
  config.algorithm = Algorithm::kHomogeneous;
  return train(config);
}

TrainResult train_heterogeneous(TrainConfig config) {
  config.algorithm = Algorithm::kHeterogeneous;
  return train(config);
}

TrainResult train_centralized(TrainConfig config) {
  config.algorithm = Algorithm::kCentralized;
  return train(config);
}

std::vector<double> averaged_total_reward(std::span<const double> episode_returns) {
  if (episode_returns.empty()) throw std::invalid_argument("averaged_total_reward: empty log");
  std::vector<double> out;
  out.reserve(episode_returns.size());
  double sum = 0.0;
  for (std::size_t m = 0; m < episode_returns.size(); ++m) {
    sum += episode_returns[m];
    out.push_back(sum / static_cast<double>(m + 1));
  }
  return out;
}

double discounted_return(std::span<const double> rewards, double gamma) {
  double total = 0.0;
  double weight = 1.0;
  for (double r : rewards) {
    total += weight * r;
    weight *= gamma;
  }
  return total;
}

}  // namespace coopdqn::train

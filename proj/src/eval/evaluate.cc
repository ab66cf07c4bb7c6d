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

#include "coopdqn/eval/evaluate.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "coopdqn/train/trainer.h"

namespace coopdqn::eval {
namespace {

void check_net(const nn::QNetParams& net, int out_dim) {
  if (net.layers.size() != 3) throw std::invalid_argument("policy network must have 3 layers");
  if (net.in_dim() != sim::kObservationSize) {
    throw std::invalid_argument("policy network expects " + std::to_string(net.in_dim()) +
                                " inputs, observations have " +
                                std::to_string(sim::kObservationSize));
  }
  if (net.out_dim() != out_dim) {
    throw std::invalid_argument("policy network has " + std::to_string(net.out_dim()) +
                                " outputs, expected " + std::to_string(out_dim));
  }
}

Eigen::RowVectorXd q_row(const nn::QNetParams& net, const sim::Observation& obs) {
  return nn::forward(net, obs.transpose()).row(0);
}

}  // namespace

PolicyBundle::PolicyBundle(Kind kind, std::vector<nn::QNetParams> nets)
    : kind_(kind), nets_(std::move(nets)) {}

PolicyBundle PolicyBundle::shared(nn::QNetParams net) {
  check_net(net, sim::kNumActions);
  return PolicyBundle(Kind::kShared, {std::move(net)});
}

PolicyBundle PolicyBundle::per_robot(nn::QNetParams robot1, nn::QNetParams robot2) {
  check_net(robot1, sim::kNumActions);
  check_net(robot2, sim::kNumActions);
  return PolicyBundle(Kind::kPerRobot, {std::move(robot1), std::move(robot2)});
}

PolicyBundle PolicyBundle::joint(nn::QNetParams net) {
  check_net(net, train::kJointActions);
  return PolicyBundle(Kind::kJoint, {std::move(net)});
}

PolicyBundle PolicyBundle::constant(sim::Action action) {
  nn::QNetParams net = nn::init_params(sim::kObservationSize, sim::kNumActions, 0, 1).zeros_like();
  net.layers.back().bias[static_cast<int>(action)] = 1.0;
  return shared(std::move(net));
}

std::array<Eigen::RowVectorXd, 2> PolicyBundle::q_values(const sim::Observation& obs1,
                                                         const sim::Observation& obs2) const {
  switch (kind_) {
    case Kind::kShared: {
      nn::Matrix x(2, sim::kObservationSize);
      x.row(0) = obs1.transpose();
      x.row(1) = obs2.transpose();
      const nn::Matrix q = nn::forward(nets_[0], x);
      return {q.row(0), q.row(1)};
    }
    case Kind::kPerRobot:
      return {q_row(nets_[0], obs1), q_row(nets_[1], obs2)};
    case Kind::kJoint: {
      Eigen::RowVectorXd q = q_row(nets_[0], obs1);
      return {q, q};
    }
  }
  throw std::logic_error("unknown bundle kind");
}

std::array<sim::Action, 2> PolicyBundle::greedy(
    const std::array<Eigen::RowVectorXd, 2>& q) const {
  if (kind_ == Kind::kJoint) {
    const auto [a1, a2] = train::decode_joint_action(nn::argmax(q[0]));
    return {a1, a2};
  }
  return {static_cast<sim::Action>(nn::argmax(q[0])), static_cast<sim::Action>(nn::argmax(q[1]))};
}

void PerturbationSpec::validate() const {
  if (!(state_noise_sigma >= 0.0)) throw std::invalid_argument("state noise sigma must be >= 0");
  if (!(action_random_prob >= 0.0 && action_random_prob <= 1.0)) {
    throw std::invalid_argument("action randomness must be in [0, 1]");
  }
}

EpisodeTrace run_episode_from(const PolicyBundle& bundle, const sim::WorldConfig& world,
                              const sim::SystemState& initial,
                              const PerturbationSpec& perturbation, Rng& rng, bool record) {
  perturbation.validate();
  EpisodeTrace trace;
  if (sim::is_out_of_room(initial, world)) {
    trace.outcome = sim::Outcome::kSuccess;
    return trace;
  }
  if (sim::check_collision(initial, world)) {
    trace.outcome = sim::Outcome::kWallHit;
    return trace;
  }
  if (initial.step_count >= world.horizon) {
    trace.outcome = sim::Outcome::kHorizonExceeded;
    return trace;
  }

  const double sigma = perturbation.state_noise_sigma;
  const double p_random = perturbation.action_random_prob;
  std::normal_distribution<double> noise(0.0, sigma > 0.0 ? sigma : 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const bool joint = bundle.kind() == PolicyBundle::Kind::kJoint;
  std::uniform_int_distribution<int> pick(0, (joint ? train::kJointActions : sim::kNumActions) - 1);

  sim::SystemState state = initial;
  while (true) {
    std::array<sim::Observation, 2> obs{sim::observe(state, world, 0),
                                        sim::observe(state, world, 1)};
    if (sigma > 0.0) {
      for (auto& o : obs) {
        for (int k = 0; k < sim::kObservationSize; ++k) o[k] += noise(rng);
      }
    }
    auto q = bundle.q_values(obs[0], obs[1]);
    auto actions = bundle.greedy(q);
    if (p_random > 0.0) {
      if (joint) {
        if (coin(rng) < p_random) {
          const auto [a1, a2] = train::decode_joint_action(pick(rng));
          actions = {a1, a2};
        }
      } else {
        for (auto& a : actions) {
          if (coin(rng) < p_random) a = static_cast<sim::Action>(pick(rng));
        }
      }
    }
    const sim::StepOutcome out = sim::step(state, actions[0], actions[1], world);
    for (int i = 0; i < 2; ++i) {
      trace.path_length[i] += (sim::robot_position(out.next_state, world, i) -
                               sim::robot_position(state, world, i))
                                  .norm();
      trace.q_max[i].push_back(q[i].maxCoeff());
    }
    if (record) {
      trace.steps.push_back({state, actions, out.rewards[0], out.done, out.reason, std::move(q)});
    }
    ++trace.steps_used;
    state = out.next_state;
    if (out.done) {
      trace.outcome = out.reason;
      break;
    }
  }
  return trace;
}

EpisodeTrace run_episode(const PolicyBundle& bundle, const sim::WorldConfig& world,
                         const PerturbationSpec& perturbation, Rng& rng, bool record) {
  const sim::SystemState initial = sim::reset(world, rng());
  return run_episode_from(bundle, world, initial, perturbation, rng, record);
}

std::vector<TrialResult> evaluate_trials(const PolicyBundle& bundle,
                                         const sim::WorldConfig& world, int n_trials,
                                         const PerturbationSpec& perturbation,
                                         std::uint64_t seed, int threads,
                                         std::vector<EpisodeTrace>* traces) {
  if (n_trials < 1) throw std::invalid_argument("n_trials must be >= 1");
  world.validate();
  perturbation.validate();
  std::vector<TrialResult> results(static_cast<std::size_t>(n_trials));
  if (traces) traces->assign(results.size(), EpisodeTrace{});

  std::atomic<int> next{0};
  const auto worker = [&] {
    for (int i = next++; i < n_trials; i = next++) {
      const std::uint64_t trial_seed = derive_seed(seed, SeedStream::kEvalTrial, i);
      Rng rng(trial_seed);
      EpisodeTrace trace = run_episode(bundle, world, perturbation, rng, traces != nullptr);
      TrialResult& r = results[i];
      r.trial = i;
      r.seed = trial_seed;
      r.reason = trace.outcome;
      r.steps = trace.steps_used;
      r.distance = trace.path_length;
      r.delta_q = trace.steps_used > 0 ? delta_q(trace) : 0.0;
      if (traces) (*traces)[i] = std::move(trace);
    }
  };
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, n_trials);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return results;
}

double success_fraction(std::span<const TrialResult> results) {
  if (results.empty()) return 0.0;
  const auto wins = std::count_if(results.begin(), results.end(), [](const TrialResult& r) {
    return r.reason == sim::Outcome::kSuccess;
  });
  return static_cast<double>(wins) / static_cast<double>(results.size());
}

double success_rate(const PolicyBundle& bundle, const sim::WorldConfig& world, int n_trials,
                    const PerturbationSpec& perturbation, std::uint64_t seed, int threads) {
  const auto results = evaluate_trials(bundle, world, n_trials, perturbation, seed, threads);
  return success_fraction(results);
}

double delta_q(std::span<const double> q_i, std::span<const double> q_j) {
  if (q_i.empty() || q_i.size() != q_j.size()) {
    throw std::invalid_argument("delta_q needs two non-empty traces of equal length");
  }
  double sum = 0.0;
  for (std::size_t t = 0; t < q_i.size(); ++t) sum += std::abs(q_i[t] - q_j[t]);
  return sum / static_cast<double>(q_i.size());
}

double delta_q(const EpisodeTrace& trace) { return delta_q(trace.q_max[0], trace.q_max[1]); }

ReevaluatedQ reevaluate_states(std::span<const sim::SystemState> states,
                               const PolicyBundle& bundle, const sim::WorldConfig& world) {
  if (states.empty()) throw std::invalid_argument("cannot re-evaluate an empty trace");
  ReevaluatedQ out;
  for (const sim::SystemState& s : states) {
    const auto q = bundle.q_values(sim::observe(s, world, 0), sim::observe(s, world, 1));
    out.q_max[0].push_back(q[0].maxCoeff());
    out.q_max[1].push_back(q[1].maxCoeff());
  }
  out.delta_q = delta_q(out.q_max[0], out.q_max[1]);
  return out;
}

ReevaluatedQ reevaluate_trace(const EpisodeTrace& trace, const PolicyBundle& bundle,
                              const sim::WorldConfig& world) {
  if (trace.steps.size() != static_cast<std::size_t>(trace.steps_used)) {
    throw std::invalid_argument("trace was not recorded step by step");
  }
  std::vector<sim::SystemState> states;
  states.reserve(trace.steps.size());
  for (const TraceStep& s : trace.steps) states.push_back(s.state);
  return reevaluate_states(states, bundle, world);
}

std::vector<CaseMetrics> case_study(const PolicyBundle& bundle, const sim::WorldConfig& world,
                                    std::span<const sim::SystemState> initial_conditions) {
  std::vector<CaseMetrics> metrics;
  for (const sim::SystemState& initial : initial_conditions) {
    Rng unused(0);
    const EpisodeTrace trace = run_episode_from(bundle, world, initial, {}, unused, false);
    CaseMetrics m;
    m.reason = trace.outcome;
    if (trace.outcome == sim::Outcome::kSuccess) {
      m.steps = trace.steps_used;
      m.distance_per_robot = trace.path_length;
      m.distance = trace.path_length[0] + trace.path_length[1];
      if (trace.steps_used > 0) m.delta_q = delta_q(trace);
    }
    metrics.push_back(m);
  }
  return metrics;
}

}  // namespace coopdqn::eval

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

#ifndef COOPDQN_EVAL_EVALUATE_H_
#define COOPDQN_EVAL_EVALUATE_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "coopdqn/common/seeding.h"
#include "coopdqn/nn/mlp.h"
#include "coopdqn/sim/world.h"

namespace coopdqn::eval {

// Greedy controllers for both robots. kShared drives both robots from one
// network, kPerRobot gives each robot its own, kJoint picks one of 16 joint
// actions from the global observation.
class PolicyBundle {
 public:
  enum class Kind { kShared, kPerRobot, kJoint };

  // Each factory throws std::invalid_argument if a network does not take an
  // 18-wide observation or has the wrong number of outputs.
  static PolicyBundle shared(nn::QNetParams net);
  static PolicyBundle per_robot(nn::QNetParams robot1, nn::QNetParams robot2);
  static PolicyBundle joint(nn::QNetParams net);
  // Always picks `action` for both robots (zero weights, one-hot bias).
  static PolicyBundle constant(sim::Action action);

  Kind kind() const { return kind_; }
  std::span<const nn::QNetParams> nets() const { return nets_; }

  // Action values per robot for the given (possibly perturbed) observations.
  // For kJoint both entries hold the same 16-vector, computed from obs1.
  std::array<Eigen::RowVectorXd, 2> q_values(const sim::Observation& obs1,
                                             const sim::Observation& obs2) const;
  // Greedy actions for the values returned by q_values.
  std::array<sim::Action, 2> greedy(const std::array<Eigen::RowVectorXd, 2>& q) const;

 private:
  PolicyBundle(Kind kind, std::vector<nn::QNetParams> nets);

  Kind kind_;
  std::vector<nn::QNetParams> nets_;
};

struct PerturbationSpec {
  // Std-dev of zero-mean Gaussian noise added to every observation entry, in
  // raw world units (angles in radians).
  double state_noise_sigma = 0.0;
  // Probability that a greedy action is replaced by a uniform one.
  double action_random_prob = 0.0;

  void validate() const;
};

struct TraceStep {
  sim::SystemState state;  // ground truth before acting
  std::array<sim::Action, 2> actions{};
  double reward = 0.0;
  bool done = false;
  sim::Outcome reason = sim::Outcome::kRunning;
  std::array<Eigen::RowVectorXd, 2> q_values;
};

struct EpisodeTrace {
  sim::Outcome outcome = sim::Outcome::kRunning;
  int steps_used = 0;
  std::array<double, 2> path_length{};
  // Per-step max-Q of each robot; always filled.
  std::array<std::vector<double>, 2> q_max;
  // Per-step detail; filled only when recording.
  std::vector<TraceStep> steps;
};

// Runs one greedy episode from `initial`. Noise perturbs only what the
// networks see; the logged states are ground truth. An initial state that is
// already terminal yields an empty trace with the matching outcome.
EpisodeTrace run_episode_from(const PolicyBundle& bundle, const sim::WorldConfig& world,
                              const sim::SystemState& initial,
                              const PerturbationSpec& perturbation, Rng& rng, bool record);

// Draws the reset seed from rng, then runs as above.
EpisodeTrace run_episode(const PolicyBundle& bundle, const sim::WorldConfig& world,
                         const PerturbationSpec& perturbation, Rng& rng, bool record);

struct TrialResult {
  int trial = 0;
  std::uint64_t seed = 0;
  sim::Outcome reason = sim::Outcome::kRunning;
  int steps = 0;
  std::array<double, 2> distance{};
  double delta_q = 0.0;
};

// Trial i uses a generator seeded with derive_seed(seed, kEvalTrial, i), so
// results do not depend on thread count. threads <= 0 picks the hardware
// concurrency.
std::vector<TrialResult> evaluate_trials(const PolicyBundle& bundle,
                                         const sim::WorldConfig& world, int n_trials,
                                         const PerturbationSpec& perturbation,
                                         std::uint64_t seed, int threads = 1,
                                         std::vector<EpisodeTrace>* traces = nullptr);

double success_rate(const PolicyBundle& bundle, const sim::WorldConfig& world, int n_trials,
                    const PerturbationSpec& perturbation, std::uint64_t seed, int threads = 1);

double success_fraction(std::span<const TrialResult> results);

// Mean absolute difference of two aligned max-Q series. Throws
// std::invalid_argument when they are empty or of different lengths.
double delta_q(std::span<const double> q_i, std::span<const double> q_j);
double delta_q(const EpisodeTrace& trace);

struct ReevaluatedQ {
  std::array<std::vector<double>, 2> q_max;
  double delta_q = 0.0;
};

// Feeds the recorded ground-truth states through another bundle without
// re-simulating. Throws std::invalid_argument on an unrecorded or empty trace.
ReevaluatedQ reevaluate_trace(const EpisodeTrace& trace, const PolicyBundle& bundle,
                              const sim::WorldConfig& world);
ReevaluatedQ reevaluate_states(std::span<const sim::SystemState> states,
                               const PolicyBundle& bundle, const sim::WorldConfig& world);

struct CaseMetrics {
  sim::Outcome reason = sim::Outcome::kRunning;
  // Empty when the case failed.
  std::optional<int> steps;
  std::optional<double> distance;  // both robots' path lengths summed
  std::optional<std::array<double, 2>> distance_per_robot;
  std::optional<double> delta_q;   // also empty for a zero-step case
};

std::vector<CaseMetrics> case_study(const PolicyBundle& bundle, const sim::WorldConfig& world,
                                    std::span<const sim::SystemState> initial_conditions);

}  // namespace coopdqn::eval

#endif  // COOPDQN_EVAL_EVALUATE_H_

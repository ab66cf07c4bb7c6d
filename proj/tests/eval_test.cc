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

#include <gtest/gtest.h>

#include <fstream>
#include <numbers>
#include <random>

#include "coopdqn/eval/evaluate.h"
#include "coopdqn/eval/trace_io.h"
#include "test_util.h"

namespace coopdqn::eval {
namespace {

sim::WorldConfig short_world() {
  sim::WorldConfig w;
  w.horizon = 120;
  return w;
}

PolicyBundle random_shared(std::uint64_t seed) {
  return PolicyBundle::shared(nn::init_params(18, 4, seed, 16));
}

double brute_mad(const std::vector<double>& a, const std::vector<double>& b) {
  long double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(static_cast<long double>(a[i]) - b[i]);
  return static_cast<double>(s / a.size());
}

TEST(DeltaQ, Examples) {
  const std::vector<double> a{1, 2}, b{3, 5};
  EXPECT_EQ(delta_q(a, b), 2.5);
  EXPECT_EQ(delta_q(b, a), 2.5);
  EXPECT_EQ(delta_q(a, a), 0.0);
  EXPECT_THROW(delta_q(std::vector<double>{}, std::vector<double>{}), std::invalid_argument);
  EXPECT_THROW(delta_q(a, std::vector<double>{1}), std::invalid_argument);
}

TEST(DeltaQ, BruteForceOracle) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0, 30);
  for (int k = 0; k < 100; ++k) {
    std::vector<double> a(1000), b(1000);
    for (auto& x : a) x = n(rng);
    for (auto& x : b) x = n(rng);
    ASSERT_NEAR(delta_q(a, b), brute_mad(a, b), 1e-12);
    ASSERT_GE(delta_q(a, b), 0.0);
  }
}

TEST(Bundle, Validation) {
  EXPECT_THROW(PolicyBundle::shared(nn::init_params(17, 4, 1, 4)), std::invalid_argument);
  EXPECT_THROW(PolicyBundle::shared(nn::init_params(18, 16, 1, 4)), std::invalid_argument);
  EXPECT_THROW(PolicyBundle::joint(nn::init_params(18, 4, 1, 4)), std::invalid_argument);
  EXPECT_THROW(PolicyBundle::per_robot(nn::init_params(18, 4, 1, 4), nn::init_params(10, 4, 1, 4)),
               std::invalid_argument);
  const PolicyBundle j = PolicyBundle::joint(nn::init_params(18, 16, 1, 4));
  const sim::SystemState s = sim::reset(sim::WorldConfig{}, 3);
  const auto q = j.q_values(sim::observe(s, {}, 0), sim::observe(s, {}, 1));
  EXPECT_EQ(q[0], q[1]);
  EXPECT_EQ(q[0].size(), 16);
}

TEST(Bundle, ConstantPolicy) {
  const PolicyBundle c = PolicyBundle::constant(sim::Action::kBackwardLeft);
  const sim::SystemState s = sim::reset(sim::WorldConfig{}, 3);
  const auto q = c.q_values(sim::observe(s, {}, 0), sim::observe(s, {}, 1));
  EXPECT_EQ(c.greedy(q), (std::array{sim::Action::kBackwardLeft, sim::Action::kBackwardLeft}));
}

TEST(RunEpisode, DeterministicAndRecordingNeutral) {
  const auto world = short_world();
  const PolicyBundle b = random_shared(2);
  for (const PerturbationSpec pert : {PerturbationSpec{}, PerturbationSpec{0.3, 0.2}}) {
    Rng r1(9), r2(9), r3(9);
    const EpisodeTrace a = run_episode(b, world, pert, r1, true);
    const EpisodeTrace c = run_episode(b, world, pert, r2, true);
    const EpisodeTrace d = run_episode(b, world, pert, r3, false);
    EXPECT_EQ(a.q_max, c.q_max);
    EXPECT_EQ(a.outcome, d.outcome);
    EXPECT_EQ(a.steps_used, d.steps_used);
    EXPECT_EQ(a.path_length, d.path_length);
    EXPECT_EQ(a.q_max, d.q_max);
    EXPECT_TRUE(d.steps.empty());
    EXPECT_EQ(a.steps.size(), static_cast<std::size_t>(a.steps_used));
  }
}

TEST(RunEpisode, PerturbationLeavesGroundTruthChained) {
  const auto world = short_world();
  Rng rng(1);
  const EpisodeTrace t = run_episode(random_shared(3), world, {0.5, 0.5}, rng, true);
  for (std::size_t k = 0; k + 1 < t.steps.size(); ++k) {
    const auto& s = t.steps[k];
    const sim::StepOutcome o = sim::step(s.state, s.actions[0], s.actions[1], world);
    ASSERT_EQ(o.next_state, t.steps[k + 1].state);
  }
  EXPECT_TRUE(t.steps.back().done);
}

TEST(RunEpisode, FullRandomnessIgnoresPolicy) {
  const auto world = short_world();
  const PerturbationSpec pert{0.0, 1.0};
  const auto a = evaluate_trials(random_shared(1), world, 20, pert, 5);
  const auto b = evaluate_trials(PolicyBundle::constant(sim::Action::kForwardLeft), world, 20, pert, 5);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].reason, b[i].reason);
    EXPECT_EQ(a[i].steps, b[i].steps);
    EXPECT_EQ(a[i].distance, b[i].distance);
  }
}

TEST(EvaluateTrials, ThreadCountInvariant) {
  const auto world = short_world();
  const PolicyBundle b = random_shared(4);
  const auto one = evaluate_trials(b, world, 12, {0.1, 0.1}, 77, 1);
  const auto three = evaluate_trials(b, world, 12, {0.1, 0.1}, 77, 3);
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].trial, static_cast<int>(i));
    EXPECT_EQ(one[i].seed, three[i].seed);
    EXPECT_EQ(one[i].steps, three[i].steps);
    EXPECT_EQ(one[i].delta_q, three[i].delta_q);
  }
  EXPECT_THROW(evaluate_trials(b, world, 0, {}, 1), std::invalid_argument);
  EXPECT_THROW(evaluate_trials(b, world, 1, {-1.0, 0.0}, 1), std::invalid_argument);
  EXPECT_THROW(evaluate_trials(b, world, 1, {0.0, 1.5}, 1), std::invalid_argument);
}

TEST(EvaluateTrials, ConstantPolicyReproducible) {
  const auto world = short_world();
  const PolicyBundle c = PolicyBundle::constant(sim::Action::kForwardLeft);
  EXPECT_EQ(success_rate(c, world, 30, {}, 3), success_rate(c, world, 30, {}, 3));
  const double r = success_rate(random_shared(8), world, 30, {}, 3);
  EXPECT_GE(r, 0.0);
  EXPECT_LE(r, 1.0);
}

TEST(Reevaluate, SameBundleReproducesQ) {
  const auto world = short_world();
  const PolicyBundle b = random_shared(5);
  Rng rng(2);
  const EpisodeTrace t = run_episode(b, world, {}, rng, true);
  const ReevaluatedQ re = reevaluate_trace(t, b, world);
  EXPECT_EQ(re.q_max, t.q_max);
  EXPECT_EQ(re.delta_q, delta_q(t));
  const ReevaluatedQ other = reevaluate_trace(t, random_shared(6), world);
  EXPECT_NE(other.q_max, t.q_max);

  Rng rng2(2);
  const EpisodeTrace unrecorded = run_episode(b, world, {}, rng2, false);
  EXPECT_THROW(reevaluate_trace(unrecorded, b, world), std::invalid_argument);
  EXPECT_THROW(reevaluate_states({}, b, world), std::invalid_argument);
}

TEST(CaseStudy, Metrics) {
  sim::WorldConfig world;
  world.wheel_speed_lo = world.wheel_speed_hi;  // every action drives straight
  constexpr double kPi = std::numbers::pi;
  // Rod upright in the doorway, both robots facing south.
  sim::SystemState through;
  through.rod_mid = sim::Vec2(0, -5.0);
  through.rod_phi = kPi / 2;
  through.theta = {-kPi / 2, -kPi / 2};
  sim::SystemState outside = through;
  outside.rod_mid = sim::Vec2(0, -8.0);
  sim::SystemState stuck;
  stuck.rod_mid = sim::Vec2(0, 0);
  stuck.theta = {0.0, kPi};  // pulling apart along the rod: never moves
  const std::vector<sim::SystemState> cases{through, outside, stuck};
  world.horizon = 50;
  const auto m = case_study(PolicyBundle::constant(sim::Action::kForwardLeft), world, cases);
  ASSERT_EQ(m.size(), 3u);

  EXPECT_EQ(m[0].reason, sim::Outcome::kSuccess);
  ASSERT_TRUE(m[0].steps.has_value());
  const double per_robot = *m[0].steps * world.wheel_speed_hi * world.dt;
  EXPECT_NEAR((*m[0].distance_per_robot)[0], per_robot, 1e-9);
  EXPECT_NEAR((*m[0].distance_per_robot)[1], per_robot, 1e-9);
  EXPECT_NEAR(*m[0].distance, 2 * per_robot, 1e-9);
  EXPECT_EQ(*m[0].delta_q, 0.0);

  EXPECT_EQ(m[1].reason, sim::Outcome::kSuccess);
  EXPECT_EQ(*m[1].steps, 0);
  EXPECT_EQ(*m[1].distance, 0.0);
  EXPECT_FALSE(m[1].delta_q.has_value());

  EXPECT_EQ(m[2].reason, sim::Outcome::kHorizonExceeded);
  EXPECT_FALSE(m[2].steps.has_value());
  EXPECT_FALSE(m[2].distance.has_value());
  EXPECT_FALSE(m[2].delta_q.has_value());
}

TEST(TraceIo, RoundTrip) {
  const auto dir = testing_util::fresh_dir("trace");
  const auto world = short_world();
  const PolicyBundle b = random_shared(5);
  std::vector<EpisodeTrace> traces;
  evaluate_trials(b, world, 4, {}, 11, 1, &traces);
  write_trace_csv(dir / "t.csv", traces, world);
  const auto eps = load_trace_csv(dir / "t.csv", world);
  ASSERT_EQ(eps.size(), 4u);
  for (std::size_t e = 0; e < eps.size(); ++e) {
    EXPECT_EQ(eps[e].episode, static_cast<std::int64_t>(e + 1));
    const auto states = eps[e].states();
    ASSERT_EQ(states.size(), traces[e].steps.size());
    for (std::size_t k = 0; k < states.size(); ++k) {
      ASSERT_EQ(states[k], traces[e].steps[k].state);
      ASSERT_EQ((*eps[e].rows[k].q_max)[0], traces[e].q_max[0][k]);
    }
    EXPECT_EQ(reevaluate_states(states, b, world).delta_q, delta_q(traces[e]));
  }
  { std::ofstream(dir / "empty.csv") << sim::kTrajectoryHeader << sim::kQColumns << "\n"; }
  EXPECT_THROW(load_trace_csv(dir / "empty.csv", world), std::runtime_error);
  EXPECT_THROW(load_trace_csv(dir / "missing.csv", world), std::runtime_error);
}

}  // namespace
}  // namespace coopdqn::eval

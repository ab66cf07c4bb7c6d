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

#include "cli.h"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <memory>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "coopdqn/eval/trace_io.h"
#include "coopdqn/nn/checkpoint.h"

namespace coopdqn::cli {
namespace {

// Binds a flag to scratch storage and copies it into the RunConfig only when
// the flag (or config key, or env var) was actually supplied, so preset
// values survive otherwise.
class OverrideTable {
 public:
  template <typename T, typename Setter>
  CLI::Option* add(CLI::App& app, const std::string& name, const std::string& help, Setter set) {
    auto storage = std::make_shared<T>();
    CLI::Option* opt = app.add_option(name, *storage, help);
    appliers_.push_back([opt, storage, set](RunConfig& rc) {
      if (opt->count() > 0) set(rc, *storage);
    });
    return opt;
  }

  void apply(RunConfig& rc) const {
    for (const auto& f : appliers_) f(rc);
  }

 private:
  std::vector<std::function<void(RunConfig&)>> appliers_;
};

void register_overrides(CLI::App& app, OverrideTable& t) {
  using RC = RunConfig;
  // World.
  t.add<double>(app, "--room-side", "room interior side length",
                [](RC& c, double v) { c.train.world.room_side = v; });
  t.add<double>(app, "--door-width", "doorway width",
                [](RC& c, double v) { c.train.world.door_width = v; });
  t.add<double>(app, "--door-depth", "doorway depth (wall thickness)",
                [](RC& c, double v) { c.train.world.door_depth = v; });
  t.add<double>(app, "--door-center-x", "doorway center on the south wall",
                [](RC& c, double v) { c.train.world.door_center_x = v; });
  t.add<double>(app, "--rod-length", "rod length",
                [](RC& c, double v) { c.train.world.rod_length = v; });
  t.add<double>(app, "--robot-radius", "robot radius",
                [](RC& c, double v) { c.train.world.robot_radius = v; });
  t.add<double>(app, "--dt", "seconds per control step",
                [](RC& c, double v) { c.train.world.dt = v; });
  t.add<double>(app, "--wheel-speed-hi", "fast wheel speed",
                [](RC& c, double v) { c.train.world.wheel_speed_hi = v; });
  t.add<double>(app, "--wheel-speed-lo", "slow wheel speed",
                [](RC& c, double v) { c.train.world.wheel_speed_lo = v; });
  t.add<double>(app, "--wheel-base", "distance between the wheels",
                [](RC& c, double v) { c.train.world.wheel_base = v; });
  t.add<int>(app, "--horizon", "maximum steps per episode",
             [](RC& c, int v) { c.train.world.horizon = v; });
  t.add<std::string>(app, "--reward-mode", "dense or sparse",
                     [](RC& c, const std::string& v) {
                       c.train.world.reward_mode =
                           v == "sparse" ? sim::RewardMode::kSparse : sim::RewardMode::kDense;
                     })
      ->check(CLI::IsMember({"dense", "sparse"}));
  // Agent.
  t.add<double>(app, "--gamma", "discount rate", [](RC& c, double v) { c.train.agent.gamma = v; });
  t.add<int>(app, "--batch-size", "transitions per gradient step",
             [](RC& c, int v) { c.train.agent.batch_size = v; });
  t.add<int>(app, "--target-sync-period", "gradient steps between target syncs",
             [](RC& c, int v) { c.train.agent.target_sync_period = v; });
  t.add<int>(app, "--hidden", "units per hidden layer",
             [](RC& c, int v) { c.train.agent.hidden = v; });
  t.add<double>(app, "--learning-rate", "optimizer step size",
                [](RC& c, double v) { c.train.agent.optimizer.learning_rate = v; });
  t.add<std::string>(app, "--optimizer", "adam or sgd",
                     [](RC& c, const std::string& v) {
                       c.train.agent.optimizer.kind =
                           v == "sgd" ? nn::OptimizerKind::kSgd : nn::OptimizerKind::kAdam;
                     })
      ->check(CLI::IsMember({"adam", "sgd"}));
  t.add<double>(app, "--max-grad-norm", "gradient norm cap, 0 disables",
                [](RC& c, double v) { c.train.agent.optimizer.max_grad_norm = v; });
  // Exploration.
  t.add<double>(app, "--eps-initial", "initial exploration rate",
                [](RC& c, double v) { c.train.epsilon.initial = v; });
  t.add<double>(app, "--eps-final", "final exploration rate",
                [](RC& c, double v) { c.train.epsilon.final = v; });
  t.add<int>(app, "--eps-decay-period", "episodes of linear decay",
             [](RC& c, int v) { c.train.epsilon.decay_period = v; });
  t.add<int>(app, "--warmup-episodes", "random episodes before learning starts",
             [](RC& c, int v) { c.train.epsilon.warmup_episodes = v; });
  // Training.
  t.add<int>(app, "--episodes", "training episodes", [](RC& c, int v) { c.train.episodes = v; });
  t.add<std::size_t>(app, "--buffer-capacity", "replay buffer capacity",
                     [](RC& c, std::size_t v) { c.train.buffer_capacity = v; });
  t.add<std::int64_t>(app, "--checkpoint-interval", "robot transitions between checkpoints",
                      [](RC& c, std::int64_t v) { c.train.checkpoint_interval = v; });
  t.add<std::uint64_t>(app, "--seed", "master seed",
                       [](RC& c, std::uint64_t v) { c.train.seed = v; });
  t.add<std::string>(app, "--out", "output directory",
                     [](RC& c, const std::string& v) { c.output_dir = v; })
      ->envname("COOPDQN_OUTPUT_ROOT");
  // Evaluation and replay.
  t.add<std::vector<std::string>>(app, "--checkpoint",
                                  "checkpoint file(s); two for per-robot networks",
                                  [](RC& c, const std::vector<std::string>& v) {
                                    c.checkpoints = v;
                                  });
  t.add<int>(app, "--trials", "evaluation trials per setting",
             [](RC& c, int v) { c.trials = v; });
  t.add<int>(app, "--threads", "evaluation threads, 0 = all cores",
             [](RC& c, int v) { c.threads = v; });
  t.add<std::vector<double>>(app, "--state-noise", "observation noise std-dev(s)",
                             [](RC& c, const std::vector<double>& v) {
                               c.state_noise_levels = v;
                             })
      ->delimiter(',');
  t.add<std::vector<double>>(app, "--action-random", "action randomness probability(ies)",
                             [](RC& c, const std::vector<double>& v) {
                               c.action_random_levels = v;
                             })
      ->delimiter(',');
  t.add<std::string>(app, "--cases", "case-study initial conditions (CSV)",
                     [](RC& c, const std::string& v) { c.cases_file = v; });
  t.add<std::string>(app, "--trace-out", "write recorded evaluation traces here",
                     [](RC& c, const std::string& v) { c.trace_out = v; });
  t.add<std::string>(app, "--trace", "trace CSV to re-evaluate",
                     [](RC& c, const std::string& v) { c.trace_in = v; });
}

void validate(const RunConfig& rc) {
  rc.train.validate();
  rc.perturbation.validate();
  if (rc.trials < 1) throw std::invalid_argument("trials must be >= 1");
  for (double s : rc.state_noise_levels) {
    eval::PerturbationSpec{s, 0.0}.validate();
  }
  for (double p : rc.action_random_levels) {
    eval::PerturbationSpec{0.0, p}.validate();
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

eval::PolicyBundle load_bundle(const std::vector<std::string>& paths) {
  if (paths.empty()) throw std::runtime_error("no --checkpoint given");
  std::vector<nn::QNetParams> nets;
  for (const auto& p : paths) nets.push_back(nn::load_checkpoint(p).params);
  if (nets.size() == 2) return eval::PolicyBundle::per_robot(nets[0], nets[1]);
  if (nets.size() != 1) throw std::runtime_error("expected one or two checkpoints");
  if (nets[0].out_dim() == train::kJointActions) return eval::PolicyBundle::joint(nets[0]);
  return eval::PolicyBundle::shared(nets[0]);
}

std::vector<sim::SystemState> load_cases(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open cases file " + path);
  std::string line;
  std::getline(in, line);
  if (line.rfind("rod_x,rod_y,rod_phi,th1,th2", 0) != 0) {
    throw std::runtime_error("cases file must start with header rod_x,rod_y,rod_phi,th1,th2");
  }
  std::vector<sim::SystemState> cases;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::array<double, 5> v{};
    char comma = 0;
    ss >> v[0];
    for (int k = 1; k < 5; ++k) ss >> comma >> v[k];
    if (!ss || comma != ',') throw std::runtime_error("malformed case row: " + line);
    sim::SystemState s;
    s.rod_mid = sim::Vec2(v[0], v[1]);
    s.rod_phi = sim::wrap_angle(v[2]);
    s.theta = {sim::wrap_angle(v[3]), sim::wrap_angle(v[4])};
    cases.push_back(s);
  }
  return cases;
}

std::filesystem::path setting_path(const std::string& base, std::size_t index, std::size_t count) {
  if (count == 1) return base;
  std::filesystem::path p(base);
  return p.parent_path() /
         (p.stem().string() + "_s" + std::to_string(index) + p.extension().string());
}

int cmd_train(const RunConfig& rc, std::ostream& out) {
  train::TrainConfig cfg = rc.train;
  cfg.output_dir = rc.output_dir;
  train::Trainer trainer(cfg);
  const train::TrainResult result = trainer.run();
  out << "wrote " << (rc.output_dir / (std::string(train::algorithm_name(cfg.algorithm)) +
                                       "_episodes.csv"))
                         .string()
      << "\n";
  for (const auto& c : result.checkpoints) out << "wrote " << c.path.string() << "\n";
  if (!result.log.empty()) {
    out << "final averaged total reward: " << fmt(result.log.back().avg_total_reward) << "\n";
  }
  if (result.diverged) throw std::runtime_error("training diverged: " + result.error);
  return kOk;
}

int cmd_eval(const RunConfig& rc, std::ostream& out) {
  const eval::PolicyBundle bundle = load_bundle(rc.checkpoints);
  const sim::WorldConfig& world = rc.train.world;
  std::filesystem::create_directories(rc.output_dir);

  std::vector<std::pair<double, double>> settings;
  for (double s : rc.state_noise_levels) {
    for (double p : rc.action_random_levels) settings.emplace_back(s, p);
  }
  const auto report_path = rc.output_dir / "eval_report.csv";
  std::ofstream report(report_path, std::ios::trunc);
  if (!report) throw std::runtime_error("cannot write " + report_path.string());
  report << "trial,seed,reason,steps,distance_1,distance_2,delta_q,state_noise,action_random\n";
  for (std::size_t k = 0; k < settings.size(); ++k) {
    const eval::PerturbationSpec pert{settings[k].first, settings[k].second};
    std::vector<eval::EpisodeTrace> traces;
    const auto results =
        eval::evaluate_trials(bundle, world, rc.trials, pert, rc.train.seed, rc.threads,
                              rc.trace_out.empty() ? nullptr : &traces);
    double dq_sum = 0.0;
    for (const auto& r : results) {
      report << r.trial << "," << r.seed << "," << sim::outcome_name(r.reason) << "," << r.steps
             << "," << fmt(r.distance[0]) << "," << fmt(r.distance[1]) << "," << fmt(r.delta_q)
             << "," << fmt(pert.state_noise_sigma) << "," << fmt(pert.action_random_prob) << "\n";
      dq_sum += r.delta_q;
    }
    const double rate = eval::success_fraction(results);
    // Summary row: the reason column carries the success rate, delta_q the
    // mean over trials.
    report << "summary," << rc.train.seed << "," << fmt(rate) << "," << rc.trials << ",,,"
           << fmt(dq_sum / static_cast<double>(results.size())) << ","
           << fmt(pert.state_noise_sigma) << "," << fmt(pert.action_random_prob) << "\n";
    out << "state_noise=" << fmt(pert.state_noise_sigma)
        << " action_random=" << fmt(pert.action_random_prob) << " success_rate=" << fmt(rate)
        << "\n";
    if (!rc.trace_out.empty()) {
      const auto path = setting_path(rc.trace_out, k, settings.size());
      eval::write_trace_csv(path, traces, world);
      out << "wrote " << path.string() << "\n";
    }
  }
  out << "wrote " << report_path.string() << "\n";

  if (!rc.cases_file.empty()) {
    const auto cases = load_cases(rc.cases_file);
    const auto metrics = eval::case_study(bundle, world, cases);
    const auto case_path = rc.output_dir / "case_study.csv";
    std::ofstream cs(case_path, std::ios::trunc);
    if (!cs) throw std::runtime_error("cannot write " + case_path.string());
    cs << "case,reason,steps,distance,distance_1,distance_2,delta_q\n";
    for (std::size_t i = 0; i < metrics.size(); ++i) {
      const auto& m = metrics[i];
      const auto opt = [](const auto& v) { return v ? fmt(static_cast<double>(*v)) : "N/A"; };
      cs << i + 1 << "," << sim::outcome_name(m.reason) << "," << opt(m.steps) << ","
         << opt(m.distance) << ","
         << (m.distance_per_robot ? fmt((*m.distance_per_robot)[0]) : "N/A") << ","
         << (m.distance_per_robot ? fmt((*m.distance_per_robot)[1]) : "N/A") << ","
         << opt(m.delta_q) << "\n";
    }
    out << "wrote " << case_path.string() << "\n";
  }
  return kOk;
}

int cmd_replay(const RunConfig& rc, std::ostream& out) {
  if (rc.trace_in.empty()) throw std::runtime_error("replay needs --trace");
  const eval::PolicyBundle bundle = load_bundle(rc.checkpoints);
  const sim::WorldConfig& world = rc.train.world;
  const auto episodes = eval::load_trace_csv(rc.trace_in, world);
  std::filesystem::create_directories(rc.output_dir);

  std::vector<sim::TrajectoryRow> rows;
  const auto summary_path = rc.output_dir / "replay_summary.csv";
  std::ofstream summary(summary_path, std::ios::trunc);
  if (!summary) throw std::runtime_error("cannot write " + summary_path.string());
  summary << "episode,steps,delta_q_recorded,delta_q_replayed\n";
  double total = 0.0;
  for (const auto& ep : episodes) {
    const auto states = ep.states();
    const eval::ReevaluatedQ re = eval::reevaluate_states(states, bundle, world);
    std::string recorded = "N/A";
    if (ep.rows.front().q_max) {
      std::vector<double> q1, q2;
      for (const auto& r : ep.rows) {
        q1.push_back((*r.q_max)[0]);
        q2.push_back((*r.q_max)[1]);
      }
      recorded = fmt(eval::delta_q(q1, q2));
    }
    summary << ep.episode << "," << ep.rows.size() << "," << recorded << "," << fmt(re.delta_q)
            << "\n";
    for (std::size_t t = 0; t < ep.rows.size(); ++t) {
      sim::TrajectoryRow r = ep.rows[t];
      r.q_max = std::array<double, 2>{re.q_max[0][t], re.q_max[1][t]};
      rows.push_back(r);
    }
    total += re.delta_q;
  }
  const auto trace_path = rc.output_dir / "replay_trace.csv";
  std::ofstream trace(trace_path, std::ios::trunc);
  if (!trace) throw std::runtime_error("cannot write " + trace_path.string());
  sim::write_trajectory_csv(trace, rows, world, true);
  out << "mean delta_q: " << fmt(total / static_cast<double>(episodes.size())) << " over "
      << episodes.size() << " episode(s)\n";
  out << "wrote " << summary_path.string() << "\n";
  out << "wrote " << trace_path.string() << "\n";
  return kOk;
}

}  // namespace

RunConfig preset_config(const std::string& preset, train::Algorithm algorithm) {
  RunConfig rc;
  rc.preset = preset;
  if (preset == "full") {
    rc.train = train::full_preset(algorithm);
  } else if (preset == "desk") {
    rc.train = train::desk_preset(algorithm);
  } else {
    throw std::invalid_argument("unknown preset: " + preset);
  }
  return rc;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Decentralized multi-robot DQN: rod transport through a doorway"};
  app.set_config("--config", "", "key = value config file; flags override it");
  app.allow_config_extras(CLI::config_extras_mode::error);
  std::string preset = "full";
  std::string algo = "homo";
  app.add_option("--preset", preset, "hyperparameter preset")
      ->check(CLI::IsMember({"full", "desk"}));
  app.add_option("--algo", algo, "homo, hete or central")
      ->check(CLI::IsMember({"homo", "hete", "central"}));
  OverrideTable overrides;
  register_overrides(app, overrides);

  CLI::App* train_cmd = app.add_subcommand("train", "train controllers");
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate checkpoints");
  CLI::App* replay_cmd = app.add_subcommand("replay", "re-evaluate a recorded trace");
  for (CLI::App* sub : {train_cmd, eval_cmd, replay_cmd}) sub->fallthrough();
  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  RunConfig rc;
  try {
    rc = preset_config(preset, train::parse_algorithm(algo));
    overrides.apply(rc);
    validate(rc);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (*train_cmd) return cmd_train(rc, out);
    if (*eval_cmd) return cmd_eval(rc, out);
    return cmd_replay(rc, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntime;
  }
}

}  // namespace coopdqn::cli

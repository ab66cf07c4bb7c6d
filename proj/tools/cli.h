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

#ifndef COOPDQN_TOOLS_CLI_H_
#define COOPDQN_TOOLS_CLI_H_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "coopdqn/eval/evaluate.h"
#include "coopdqn/train/trainer.h"

namespace coopdqn::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kRuntime = 2 };

// Everything a command can be configured with. Values come from the preset,
// then the config file, then flags (flags win).
struct RunConfig {
  std::string preset = "full";
  train::TrainConfig train;
  eval::PerturbationSpec perturbation;
  std::filesystem::path output_dir = "runs";

  // eval / replay
  std::vector<std::string> checkpoints;
  int trials = 1000;
  int threads = 1;
  std::vector<double> state_noise_levels{0.0};
  std::vector<double> action_random_levels{0.0};
  std::string cases_file;
  std::string trace_out;
  std::string trace_in;
};

// Throws std::invalid_argument for unknown preset names.
RunConfig preset_config(const std::string& preset, train::Algorithm algorithm);

// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace coopdqn::cli

#endif  // COOPDQN_TOOLS_CLI_H_

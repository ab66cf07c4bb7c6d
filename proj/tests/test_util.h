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

#ifndef COOPDQN_TESTS_TEST_UTIL_H_
#define COOPDQN_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "coopdqn/nn/mlp.h"

namespace coopdqn::testing_util {

inline std::filesystem::path fresh_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("coopdqn_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Max relative error between analytic and central-difference gradients on a
// random 4 -> 8 -> 8 -> 3 network.
inline double gradient_check_error(std::uint64_t seed, double h = 1e-5) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  std::uniform_int_distribution<int> act(0, 2);
  nn::QNetParams p = nn::init_params(4, 3, seed, 8);
  for (auto& l : p.layers) {
    for (Eigen::Index k = 0; k < l.bias.size(); ++k) l.bias[k] = 0.1 * n01(rng);
  }
  const int batch = 6;
  nn::Matrix x(batch, 4);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n01(rng);
  std::vector<int> actions(batch);
  std::vector<double> targets(batch);
  for (int i = 0; i < batch; ++i) {
    actions[i] = act(rng);
    targets[i] = n01(rng);
  }
  const auto analytic = nn::loss_and_gradients(p, x, actions, targets).gradients;
  auto loss_at = [&](const nn::QNetParams& q) {
    return nn::loss_and_gradients(q, x, actions, targets).loss;
  };
  double worst = 0.0;
  auto probe = [&](double& slot, double grad) {
    const double saved = slot;
    slot = saved + h;
    const double up = loss_at(p);
    slot = saved - h;
    const double down = loss_at(p);
    slot = saved;
    const double numeric = (up - down) / (2 * h);
    const double scale = std::max({std::abs(grad), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(grad - numeric) / scale);
  };
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    auto& w = p.layers[l].weights;
    for (Eigen::Index i = 0; i < w.size(); ++i) probe(w.data()[i], analytic.layers[l].weights.data()[i]);
    auto& b = p.layers[l].bias;
    for (Eigen::Index i = 0; i < b.size(); ++i) probe(b.data()[i], analytic.layers[l].bias.data()[i]);
  }
  return worst;
}

}  // namespace coopdqn::testing_util

#endif  // COOPDQN_TESTS_TEST_UTIL_H_

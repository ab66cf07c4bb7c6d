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

#ifndef COOPDQN_NN_MLP_H_
#define COOPDQN_NN_MLP_H_

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace coopdqn::nn {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

// One affine layer; weights are (fan_in x fan_out) so a batch of row vectors
// maps as X * W + b.
struct DenseLayer {
  Matrix weights;
  RowVector bias;

  friend bool operator==(const DenseLayer& a, const DenseLayer& b) {
    return a.weights.rows() == b.weights.rows() && a.weights.cols() == b.weights.cols() &&
           a.bias.size() == b.bias.size() && a.weights == b.weights && a.bias == b.bias;
  }
};

// Weights of the Q-network: affine -> ReLU -> affine -> ReLU -> affine. The
// same type carries gradients and optimizer moments, which mirror its shape.
struct QNetParams {
  std::vector<DenseLayer> layers;

  int in_dim() const { return static_cast<int>(layers.front().weights.rows()); }
  int out_dim() const { return static_cast<int>(layers.back().weights.cols()); }
  bool all_finite() const;
  // Same layer count and per-layer shapes.
  bool same_shape(const QNetParams& other) const;
  QNetParams zeros_like() const;

  friend bool operator==(const QNetParams&, const QNetParams&) = default;
};

// Raised when the loss becomes non-finite.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kDefaultHidden = 256;

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
QNetParams init_params(int in_dim, int out_dim, std::uint64_t seed, int hidden = kDefaultHidden);

// Rows of obs_batch are independent observations. Throws
// std::invalid_argument if the width does not match in_dim.
Matrix forward(const QNetParams& params, const Eigen::Ref<const Matrix>& obs_batch);

struct LossAndGradients {
  double loss = 0.0;
  QNetParams gradients;
};

// Mean squared error between targets and the Q-values of the taken actions.
// Only the selected action's output receives gradient. Throws
// std::invalid_argument on shape mismatch and DivergenceError if the loss is
// not finite.
LossAndGradients loss_and_gradients(const QNetParams& params,
                                    const Eigen::Ref<const Matrix>& obs_batch,
                                    std::span<const int> actions,
                                    std::span<const double> targets);

enum class OptimizerKind { kAdam, kSgd };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Global gradient-norm cap; <= 0 disables clipping.
  double max_grad_norm = 0.0;
};

struct OptimizerState {
  OptimizerConfig config;
  QNetParams first_moment;
  QNetParams second_moment;
  std::int64_t step = 0;
};

OptimizerState make_optimizer(const QNetParams& params, const OptimizerConfig& config);

// Updates params in place. Throws std::invalid_argument on shape mismatch.
void optimizer_step(QNetParams& params, const QNetParams& gradients, OptimizerState& state);

// Deep copy; QNetParams has value semantics, this names the operation.
inline QNetParams copy_params(const QNetParams& src) { return src; }

// Index of the largest entry, lowest index on ties.
int argmax(const Eigen::Ref<const Eigen::RowVectorXd>& values);

}  // namespace coopdqn::nn

#endif  // COOPDQN_NN_MLP_H_

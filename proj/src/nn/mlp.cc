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

#include "coopdqn/nn/mlp.h"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace coopdqn::nn {
namespace {

struct Activations {
  Matrix z1, h1, z2, h2, q;
};

void forward_cached(const QNetParams& p, const Eigen::Ref<const Matrix>& x, Activations& a) {
  a.z1 = (x * p.layers[0].weights).rowwise() + p.layers[0].bias;
  a.h1 = a.z1.cwiseMax(0.0);
  a.z2 = (a.h1 * p.layers[1].weights).rowwise() + p.layers[1].bias;
  a.h2 = a.z2.cwiseMax(0.0);
  a.q = (a.h2 * p.layers[2].weights).rowwise() + p.layers[2].bias;
}

void check_input(const QNetParams& p, const Eigen::Ref<const Matrix>& x) {
  if (p.layers.size() != 3) throw std::invalid_argument("Q-network must have 3 layers");
  if (x.cols() != p.in_dim()) {
    throw std::invalid_argument("observation width " + std::to_string(x.cols()) +
                                " does not match network input " + std::to_string(p.in_dim()));
  }
}

}  // namespace

bool QNetParams::all_finite() const {
  for (const auto& l : layers) {
    if (!l.weights.allFinite() || !l.bias.allFinite()) return false;
  }
  return true;
}

bool QNetParams::same_shape(const QNetParams& other) const {
  if (layers.size() != other.layers.size()) return false;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].weights.rows() != other.layers[i].weights.rows() ||
        layers[i].weights.cols() != other.layers[i].weights.cols() ||
        layers[i].bias.size() != other.layers[i].bias.size()) {
      return false;
    }
  }
  return true;
}

QNetParams QNetParams::zeros_like() const {
  QNetParams z;
  z.layers.reserve(layers.size());
  for (const auto& l : layers) {
    z.layers.push_back({Matrix::Zero(l.weights.rows(), l.weights.cols()),
                        RowVector::Zero(l.bias.size())});
  }
  return z;
}

QNetParams init_params(int in_dim, int out_dim, std::uint64_t seed, int hidden) {
  if (in_dim < 1 || out_dim < 1 || hidden < 1) {
    throw std::invalid_argument("init_params: dimensions must be >= 1");
  }
  std::mt19937_64 rng(seed);
  const int sizes[] = {in_dim, hidden, hidden, out_dim};
  QNetParams p;
  for (int l = 0; l < 3; ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(sizes[l]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    DenseLayer layer{Matrix(sizes[l], sizes[l + 1]), RowVector::Zero(sizes[l + 1])};
    // Fill row-major so the draw order matches the checkpoint layout.
    for (int r = 0; r < layer.weights.rows(); ++r) {
      for (int c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = dist(rng);
    }
    p.layers.push_back(std::move(layer));
  }
  return p;
}

Matrix forward(const QNetParams& params, const Eigen::Ref<const Matrix>& obs_batch) {
  check_input(params, obs_batch);
  Activations a;
  forward_cached(params, obs_batch, a);
  return std::move(a.q);
}

LossAndGradients loss_and_gradients(const QNetParams& params,
                                    const Eigen::Ref<const Matrix>& obs_batch,
                                    std::span<const int> actions,
                                    std::span<const double> targets) {
  check_input(params, obs_batch);
  const auto n = obs_batch.rows();
  if (n == 0 || static_cast<std::size_t>(n) != actions.size() ||
      actions.size() != targets.size()) {
    throw std::invalid_argument("loss_and_gradients: batch lengths differ or are empty");
  }
  Activations a;
  forward_cached(params, obs_batch, a);

  Matrix dq = Matrix::Zero(n, a.q.cols());
  double loss = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const int act = actions[j];
    if (act < 0 || act >= a.q.cols()) throw std::invalid_argument("action index out of range");
    const double err = a.q(j, act) - targets[j];
    loss += err * err;
    dq(j, act) = 2.0 * err / static_cast<double>(n);
  }
  loss /= static_cast<double>(n);
  if (!std::isfinite(loss)) throw DivergenceError("loss is not finite; training diverged");

  LossAndGradients out;
  out.loss = loss;
  out.gradients.layers.resize(3);
  auto& g = out.gradients.layers;
  g[2].weights.noalias() = a.h2.transpose() * dq;
  g[2].bias = dq.colwise().sum();
  Matrix dz2 = (dq * params.layers[2].weights.transpose()).cwiseProduct(
      (a.z2.array() > 0.0).cast<double>().matrix());
  g[1].weights.noalias() = a.h1.transpose() * dz2;
  g[1].bias = dz2.colwise().sum();
  Matrix dz1 = (dz2 * params.layers[1].weights.transpose()).cwiseProduct(
      (a.z1.array() > 0.0).cast<double>().matrix());
  g[0].weights.noalias() = obs_batch.transpose() * dz1;
  g[0].bias = dz1.colwise().sum();
  return out;
}

OptimizerState make_optimizer(const QNetParams& params, const OptimizerConfig& config) {
  return {config, params.zeros_like(), params.zeros_like(), 0};
}

void optimizer_step(QNetParams& params, const QNetParams& gradients, OptimizerState& state) {
  if (!params.same_shape(gradients) || !params.same_shape(state.first_moment)) {
    throw std::invalid_argument("optimizer_step: shape mismatch");
  }
  const OptimizerConfig& cfg = state.config;
  double scale = 1.0;
  if (cfg.max_grad_norm > 0.0) {
    double sq = 0.0;
    for (const auto& l : gradients.layers) sq += l.weights.squaredNorm() + l.bias.squaredNorm();
    const double norm = std::sqrt(sq);
    if (norm > cfg.max_grad_norm) scale = cfg.max_grad_norm / norm;
  }
  ++state.step;
  if (cfg.kind == OptimizerKind::kSgd) {
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
      params.layers[i].weights -= (cfg.learning_rate * scale) * gradients.layers[i].weights;
      params.layers[i].bias -= (cfg.learning_rate * scale) * gradients.layers[i].bias;
    }
    return;
  }
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  const auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
    m = cfg.beta1 * m + ((1.0 - cfg.beta1) * scale) * grad;
    v = cfg.beta2 * v + ((1.0 - cfg.beta2) * scale * scale) * grad.cwiseAbs2();
    param.array() -= cfg.learning_rate * (m.array() / c1) /
                     ((v.array() / c2).sqrt() + cfg.epsilon);
  };
  for (std::size_t i = 0; i < params.layers.size(); ++i) {
    update(params.layers[i].weights, gradients.layers[i].weights,
           state.first_moment.layers[i].weights, state.second_moment.layers[i].weights);
    update(params.layers[i].bias, gradients.layers[i].bias, state.first_moment.layers[i].bias,
           state.second_moment.layers[i].bias);
  }
}

int argmax(const Eigen::Ref<const Eigen::RowVectorXd>& values) {
  int best = 0;
  for (int i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace coopdqn::nn

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

#ifndef COOPDQN_DQN_REPLAY_BUFFER_H_
#define COOPDQN_DQN_REPLAY_BUFFER_H_

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "coopdqn/common/seeding.h"
#include "coopdqn/nn/mlp.h"

namespace coopdqn::dqn {

struct Transition {
  Eigen::VectorXd s;
  int a = 0;
  Eigen::VectorXd s_next;
  double r = 0.0;
  // Absorbing outcome (success or wall hit); the target does not bootstrap.
  bool done = false;
};

struct Batch {
  nn::Matrix s;
  nn::Matrix s_next;
  std::vector<int> actions;
  std::vector<double> rewards;
  std::vector<char> done;

  std::size_t size() const { return actions.size(); }
};

// Fixed-capacity FIFO ring of transitions. Storage grows on demand up to the
// capacity, so a large nominal capacity costs nothing until it is used.
class ReplayBuffer {
 public:
  inline static constexpr std::size_t kDefaultCapacity = 10'000'000;

  ReplayBuffer(std::size_t capacity, int obs_dim);

  // Throws std::invalid_argument if an observation has the wrong width.
  void push(const Transition& t);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  int obs_dim() const { return obs_dim_; }

  // i-th stored transition, oldest first.
  Transition at(std::size_t i) const;

  // Uniform with replacement. Throws std::logic_error on an empty buffer.
  Batch sample_batch(std::size_t batch_size, Rng& rng) const;

 private:
  std::size_t slot(std::size_t i) const;
  void copy_into(std::size_t slot, Eigen::Index row, Batch& batch) const;

  std::size_t capacity_;
  int obs_dim_;
  std::size_t cursor_ = 0;
  std::size_t size_ = 0;
  std::vector<double> s_;
  std::vector<double> s_next_;
  std::vector<int> a_;
  std::vector<double> r_;
  std::vector<char> done_;
};

}  // namespace coopdqn::dqn

#endif  // COOPDQN_DQN_REPLAY_BUFFER_H_

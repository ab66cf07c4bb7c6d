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

#include "coopdqn/dqn/replay_buffer.h"

#include <algorithm>
#include <stdexcept>

namespace coopdqn::dqn {

ReplayBuffer::ReplayBuffer(std::size_t capacity, int obs_dim)
    : capacity_(capacity), obs_dim_(obs_dim) {
  if (capacity == 0 || obs_dim < 1) {
    throw std::invalid_argument("replay buffer needs capacity >= 1 and obs_dim >= 1");
  }
}

void ReplayBuffer::push(const Transition& t) {
  if (t.s.size() != obs_dim_ || t.s_next.size() != obs_dim_) {
    throw std::invalid_argument("transition observation width mismatch");
  }
  const std::size_t k = cursor_;
  if (size_ < capacity_ && k == a_.size()) {
    s_.insert(s_.end(), t.s.data(), t.s.data() + obs_dim_);
    s_next_.insert(s_next_.end(), t.s_next.data(), t.s_next.data() + obs_dim_);
    a_.push_back(t.a);
    r_.push_back(t.r);
    done_.push_back(t.done ? 1 : 0);
  } else {
    std::copy_n(t.s.data(), obs_dim_, s_.begin() + k * obs_dim_);
    std::copy_n(t.s_next.data(), obs_dim_, s_next_.begin() + k * obs_dim_);
    a_[k] = t.a;
    r_[k] = t.r;
    done_[k] = t.done ? 1 : 0;
  }
  cursor_ = (cursor_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

std::size_t ReplayBuffer::slot(std::size_t i) const {
  return size_ < capacity_ ? i : (cursor_ + i) % capacity_;
}

Transition ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw std::out_of_range("replay buffer index out of range");
  const std::size_t k = slot(i);
  Transition t;
  t.s = Eigen::Map<const Eigen::VectorXd>(s_.data() + k * obs_dim_, obs_dim_);
  t.s_next = Eigen::Map<const Eigen::VectorXd>(s_next_.data() + k * obs_dim_, obs_dim_);
  t.a = a_[k];
  t.r = r_[k];
  t.done = done_[k] != 0;
  return t;
}

void ReplayBuffer::copy_into(std::size_t k, Eigen::Index row, Batch& batch) const {
  batch.s.row(row) = Eigen::Map<const Eigen::RowVectorXd>(s_.data() + k * obs_dim_, obs_dim_);
  batch.s_next.row(row) =
      Eigen::Map<const Eigen::RowVectorXd>(s_next_.data() + k * obs_dim_, obs_dim_);
  batch.actions[row] = a_[k];
  batch.rewards[row] = r_[k];
  batch.done[row] = done_[k];
}

Batch ReplayBuffer::sample_batch(std::size_t batch_size, Rng& rng) const {
  if (size_ == 0) throw std::logic_error("cannot sample from an empty replay buffer");
  Batch batch;
  const auto n = static_cast<Eigen::Index>(batch_size);
  batch.s.resize(n, obs_dim_);
  batch.s_next.resize(n, obs_dim_);
  batch.actions.resize(batch_size);
  batch.rewards.resize(batch_size);
  batch.done.resize(batch_size);
  // Physical slots are a permutation of logical indices, so sampling slots
  // directly is still uniform over stored transitions.
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  for (Eigen::Index row = 0; row < n; ++row) copy_into(pick(rng), row, batch);
  return batch;
}

}  // namespace coopdqn::dqn

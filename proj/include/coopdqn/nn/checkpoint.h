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

#ifndef COOPDQN_NN_CHECKPOINT_H_
#define COOPDQN_NN_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>

#include "coopdqn/nn/mlp.h"

namespace coopdqn::nn {

// On-disk layout (all integers and doubles little-endian):
//   8 bytes   magic "CQNCKPT\0"
//   u32       format version
//   u32       header length H, then H bytes of "key=value\n" text
//   u32       layer count
//   per layer u64 rows, u64 cols, rows*cols f64 weights (row-major),
//             cols f64 bias
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointMeta {
  int in_dim = 0;
  int out_dim = 0;
  std::int64_t interactions = 0;
  std::int64_t episode = 0;
};

struct Checkpoint {
  QNetParams params;
  CheckpointMeta meta;
};

// Throws std::runtime_error on I/O failure.
void save_checkpoint(const std::filesystem::path& path, const QNetParams& params,
                     CheckpointMeta meta);

// Throws std::runtime_error on I/O failure, bad magic, unsupported version, or
// a header that disagrees with the layer shapes.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace coopdqn::nn

#endif  // COOPDQN_NN_CHECKPOINT_H_

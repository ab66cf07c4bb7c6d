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

#ifndef COOPDQN_COMMON_SEEDING_H_
#define COOPDQN_COMMON_SEEDING_H_

#include <cstdint>
#include <random>

namespace coopdqn {

using Rng = std::mt19937_64;

// Named streams for seed fan-out. Values are part of the reproducibility
// contract; do not renumber.
enum class SeedStream : std::uint64_t {
  kEnvReset = 1,
  kAgentExploration = 2,
  kAgentSampling = 3,
  kNetInit = 4,
  kEvalTrial = 5,
  kEvalNoise = 6,
};

// splitmix64 finalizer.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Derives an independent seed from (master, stream, index). Every stochastic
// component of a run draws from a generator seeded this way, so a run is a
// pure function of its master seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, SeedStream stream,
                                    std::uint64_t index = 0) {
  return mix_seed(mix_seed(mix_seed(master) ^ static_cast<std::uint64_t>(stream)) ^
                  index);
}

}  // namespace coopdqn

#endif  // COOPDQN_COMMON_SEEDING_H_

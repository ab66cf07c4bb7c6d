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

#include "coopdqn/nn/checkpoint.h"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace coopdqn::nn {
namespace {

constexpr std::array<char, 8> kMagic = {'C', 'Q', 'N', 'C', 'K', 'P', 'T', '\0'};

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

template <typename T>
T get(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
    throw std::runtime_error("checkpoint truncated");
  }
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes.begin(), bytes.end());
  }
  return std::bit_cast<T>(bytes);
}

std::map<std::string, std::string> parse_header(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const QNetParams& params,
                     CheckpointMeta meta) {
  meta.in_dim = params.in_dim();
  meta.out_dim = params.out_dim();
  std::ostringstream header;
  header << "in_dim=" << meta.in_dim << "\nout_dim=" << meta.out_dim
         << "\ninteractions=" << meta.interactions << "\nepisode=" << meta.episode << "\n";
  const std::string text = header.str();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path.string());
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.layers.size()));
  for (const auto& layer : params.layers) {
    put<std::uint64_t>(out, static_cast<std::uint64_t>(layer.weights.rows()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(layer.weights.cols()));
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) put<double>(out, layer.weights(r, c));
    }
    for (Eigen::Index c = 0; c < layer.bias.size(); ++c) put<double>(out, layer.bias[c]);
  }
  if (!out) throw std::runtime_error("failed writing checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path.string());
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw std::runtime_error("not a checkpoint file: " + path.string());
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  }
  const auto header_len = get<std::uint32_t>(in);
  std::string text(header_len, '\0');
  if (!in.read(text.data(), header_len)) throw std::runtime_error("checkpoint truncated");
  const auto kv = parse_header(text);

  Checkpoint ckpt;
  const auto layer_count = get<std::uint32_t>(in);
  if (layer_count != 3) throw std::runtime_error("checkpoint must hold 3 layers");
  for (std::uint32_t l = 0; l < layer_count; ++l) {
    const auto rows = get<std::uint64_t>(in);
    const auto cols = get<std::uint64_t>(in);
    if (rows == 0 || cols == 0 || rows > (1u << 20) || cols > (1u << 20)) {
      throw std::runtime_error("implausible layer shape in checkpoint");
    }
    DenseLayer layer{Matrix(rows, cols), RowVector(cols)};
    for (std::uint64_t r = 0; r < rows; ++r) {
      for (std::uint64_t c = 0; c < cols; ++c) layer.weights(r, c) = get<double>(in);
    }
    for (std::uint64_t c = 0; c < cols; ++c) layer.bias[c] = get<double>(in);
    if (!ckpt.params.layers.empty() &&
        ckpt.params.layers.back().weights.cols() != layer.weights.rows()) {
      throw std::runtime_error("checkpoint layer shapes do not chain");
    }
    ckpt.params.layers.push_back(std::move(layer));
  }
  try {
    ckpt.meta.in_dim = std::stoi(kv.at("in_dim"));
    ckpt.meta.out_dim = std::stoi(kv.at("out_dim"));
    ckpt.meta.interactions = std::stoll(kv.at("interactions"));
    ckpt.meta.episode = std::stoll(kv.at("episode"));
  } catch (const std::exception&) {
    throw std::runtime_error("malformed checkpoint header: " + path.string());
  }
  if (ckpt.meta.in_dim != ckpt.params.in_dim() || ckpt.meta.out_dim != ckpt.params.out_dim()) {
    throw std::runtime_error("checkpoint header dims disagree with layer shapes");
  }
  return ckpt;
}

}  // namespace coopdqn::nn

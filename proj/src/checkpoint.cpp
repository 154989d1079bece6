// Copyright 2026 The NAT Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nat/checkpoint.hpp"

#include <fstream>

#include "binary_io.hpp"
#include "nat/error.hpp"

namespace nat {

void write_checkpoint(const std::filesystem::path& path,
                      std::span<const NamedBlock> blocks) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write("NATC", 4);
  io::put<std::uint32_t>(out, kCheckpointVersion);
  io::put<std::uint32_t>(out, static_cast<std::uint32_t>(blocks.size()));
  for (const auto& b : blocks) {
    if (b.data.size() != static_cast<std::size_t>(b.rows) * b.cols) {
      throw ShapeError("checkpoint block " + b.name + " has wrong payload size");
    }
    io::put_string(out, b.name);
    io::put<std::uint32_t>(out, b.rows);
    io::put<std::uint32_t>(out, b.cols);
    out.write(reinterpret_cast<const char*>(b.data.data()),
              static_cast<std::streamsize>(b.data.size() * sizeof(double)));
  }
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<NamedBlock> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  io::expect_magic(in, "NATC");
  const auto version = io::get<std::uint32_t>(in, "version");
  if (version != kCheckpointVersion) {
    throw FormatError(FormatError::Kind::kVersion,
                      "unsupported checkpoint version " + std::to_string(version));
  }
  const auto count = io::get<std::uint32_t>(in, "block count");
  std::vector<NamedBlock> blocks;
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedBlock b;
    b.name = io::get_string(in, "block name");
    b.rows = io::get<std::uint32_t>(in, "block rows");
    b.cols = io::get<std::uint32_t>(in, "block cols");
    const std::uint64_t n = static_cast<std::uint64_t>(b.rows) * b.cols;
    if (n > (std::uint64_t{1} << 32)) {
      throw FormatError(FormatError::Kind::kCorrupt, "implausible block size for " + b.name);
    }
    io::require_available(in, n * sizeof(double), "block payload");
    b.data.resize(n);
    io::read_exact(in, b.data.data(), n * sizeof(double), "block payload");
    blocks.push_back(std::move(b));
  }
  return blocks;
}

std::vector<NamedBlock> to_named_blocks(const ModelParams& params,
                                        const std::string& prefix) {
  std::vector<NamedBlock> out;
  for (const auto& b : blocks(params)) {
    out.push_back({prefix + b.name, static_cast<std::uint32_t>(b.rows),
                   static_cast<std::uint32_t>(b.cols),
                   std::vector<double>(b.values.begin(), b.values.end())});
  }
  return out;
}

const NamedBlock* find_block(std::span<const NamedBlock> blocks, const std::string& name) {
  for (const auto& b : blocks) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

namespace {

const NamedBlock& require(std::span<const NamedBlock> blocks, const std::string& name) {
  const NamedBlock* b = find_block(blocks, name);
  if (!b) throw FormatError(FormatError::Kind::kCorrupt, "checkpoint lacks block " + name);
  return *b;
}

}  // namespace

ModelParams params_from_blocks(std::span<const NamedBlock> blocks,
                               const std::string& prefix) {
  std::size_t num_layers = 0;
  while (find_block(blocks, prefix + "lstm." + std::to_string(num_layers) + ".weights")) {
    ++num_layers;
  }
  if (num_layers == 0) {
    throw FormatError(FormatError::Kind::kCorrupt, "checkpoint has no LSTM layers");
  }
  const NamedBlock& emb = require(blocks, prefix + "embedding");
  const NamedBlock& l0 = require(blocks, prefix + "lstm.0.weights");
  if (emb.rows < 3 || l0.rows % 4 != 0) {
    throw FormatError(FormatError::Kind::kDimension, "checkpoint shapes are inconsistent");
  }
  ModelShape shape;
  shape.num_layers = num_layers;
  shape.vocab_size = emb.rows - 1;
  shape.embed_size = emb.cols;
  shape.hidden_size = l0.rows / 4;
  if (l0.cols < shape.hidden_size + 1 + shape.embed_size) {
    throw FormatError(FormatError::Kind::kDimension, "layer 0 is narrower than its inputs");
  }
  shape.feature_dim = l0.cols - shape.hidden_size - 1 - shape.embed_size;
  Rng unused(0, 0);
  ModelParams params = init_params(shape, unused);
  load_into(blocks, prefix, params);
  return params;
}

void load_into(std::span<const NamedBlock> blocks, const std::string& prefix,
               ModelParams& params) {
  for (auto& b : nat::blocks(params)) {
    const NamedBlock& src = require(blocks, prefix + b.name);
    if (src.rows != b.rows || src.cols != b.cols) {
      throw FormatError(FormatError::Kind::kDimension,
                        "block " + src.name + " is " + std::to_string(src.rows) + "x" +
                            std::to_string(src.cols) + ", model expects " +
                            std::to_string(b.rows) + "x" + std::to_string(b.cols));
    }
    std::copy(src.data.begin(), src.data.end(), b.values.begin());
  }
}

}  // namespace nat

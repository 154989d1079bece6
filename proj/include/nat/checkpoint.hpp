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

#ifndef NAT_CHECKPOINT_HPP_
#define NAT_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "nat/network.hpp"

namespace nat {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// "NATC" container: magic, u32 version, u32 block count, then per block a
// u32-length-prefixed UTF-8 name, u32 rows, u32 cols and rows*cols
// little-endian doubles.
struct NamedBlock {
  std::string name;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<double> data;

  bool operator==(const NamedBlock&) const = default;
};

void write_checkpoint(const std::filesystem::path& path,
                      std::span<const NamedBlock> blocks);
std::vector<NamedBlock> read_checkpoint(const std::filesystem::path& path);

// Parameter blocks with an optional name prefix (used for optimizer moments).
std::vector<NamedBlock> to_named_blocks(const ModelParams& params,
                                        const std::string& prefix = "");
// Rebuilds a model from its blocks, inferring every dimension.
ModelParams params_from_blocks(std::span<const NamedBlock> blocks,
                               const std::string& prefix = "");
// Copies prefixed blocks into an existing model of matching shape.
void load_into(std::span<const NamedBlock> blocks, const std::string& prefix,
               ModelParams& params);

const NamedBlock* find_block(std::span<const NamedBlock> blocks, const std::string& name);

}  // namespace nat

#endif  // NAT_CHECKPOINT_HPP_

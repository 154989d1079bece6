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

#ifndef NAT_DATA_HPP_
#define NAT_DATA_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "nat/numerics.hpp"
#include "nat/transducer.hpp"

namespace nat {

struct Utterance {
  std::string id;
  std::vector<Vector> frames;
  std::vector<int> targets;  // ends with EOS

  EpisodeInput episode() const { return {frames, targets}; }
  bool operator==(const Utterance&) const = default;
};

// Desk-scale synthetic transduction task. Each vocabulary token (EOS
// included) owns a fixed random signature vector; an utterance renders each
// token of a random sequence as a run of noisy copies of its signature.
struct SyntheticTaskSpec {
  std::size_t vocab_size = 8;
  std::size_t min_tokens = 3;
  std::size_t max_tokens = 6;
  std::size_t min_frames = 3;  // frames per token
  std::size_t max_frames = 6;
  std::size_t feature_dim = 8;
  double noise_std = 0.1;
  // Never draw the same token twice in a row, so run boundaries are visible.
  bool distinct_adjacent = false;
  std::uint64_t seed = 0;
};

void validate(const SyntheticTaskSpec& spec);

// Token signatures, row t for token t.
std::vector<Vector> token_signatures(const SyntheticTaskSpec& spec);

// `count` utterances with ids "<prefix><index>"; utterance i draws from its
// own stream so the first n utterances do not depend on `count`.
std::vector<Utterance> gen_synthetic(const SyntheticTaskSpec& spec, std::size_t count,
                                     const std::string& id_prefix = "utt");

// Peak-normalizes both signals to unit max |amplitude| and returns
// primary + proportion * secondary at the primary's length (secondary is
// truncated or zero-padded). Throws InvalidArgument for an all-zero primary
// or a proportion outside [0, 1].
Vector mix_signals(std::span<const double> primary, std::span<const double> secondary,
                   double proportion);

struct MixSpec {
  double proportion = 0.0;
  std::map<std::string, std::string> pairing;  // primary id -> secondary id
};

// Fixed one-to-one pairing by position; secondary must have at least as many
// utterances.
std::map<std::string, std::string> pair_by_index(std::span<const Utterance> primary,
                                                 std::span<const Utterance> secondary,
                                                 std::size_t rotation = 0);

// Mixes each primary utterance (flattened frames) with its paired secondary.
// The result keeps the primary's id, frame shape and targets.
Utterance mix_utterance(const Utterance& primary, const Utterance& secondary,
                        double proportion);
std::vector<Utterance> mix_dataset(std::span<const Utterance> primary,
                                   std::span<const Utterance> secondary,
                                   const MixSpec& spec);

// Concatenates consecutive groups of k frames; the last partial group is
// zero-padded. Output length is ceil(T / k).
std::vector<Vector> stack_frames(std::span<const Vector> frames, std::size_t k);
std::vector<Utterance> stack_dataset(std::span<const Utterance> utts, std::size_t k);

inline constexpr std::uint32_t kDatasetVersion = 1;

// "NATD" container: magic, u32 version, u32 count, then per utterance a
// length-prefixed id, u32 T1, u32 dim, T1*dim little-endian floats, u32 T2
// and T2 u32 token ids.
void write_dataset(std::span<const Utterance> utts, const std::filesystem::path& path);
std::vector<Utterance> read_dataset(const std::filesystem::path& path);

// One symbol per line; line number is the token id and line 0 must be an
// end-of-sequence symbol (<eos>, </s> or eos).
std::vector<std::string> read_vocabulary(const std::filesystem::path& path);

}  // namespace nat

#endif  // NAT_DATA_HPP_

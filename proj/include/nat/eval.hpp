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

#ifndef NAT_EVAL_HPP_
#define NAT_EVAL_HPP_

#include <cstddef>
#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "nat/network.hpp"
#include "nat/rng.hpp"
#include "nat/transducer.hpp"

namespace nat {

struct EditCounts {
  std::size_t distance = 0;
  std::size_t substitutions = 0;
  std::size_t insertions = 0;  // extra hypothesis tokens
  std::size_t deletions = 0;   // reference tokens missing from the hypothesis

  bool operator==(const EditCounts&) const = default;
};

// Unit-cost edit distance. The backtrace prefers the diagonal (match or
// substitution), then deletion, then insertion.
EditCounts levenshtein(std::span<const int> hyp, std::span<const int> ref);

// Many-to-one token relabeling applied before scoring. EOS always maps to EOS.
class CollapseMap {
 public:
  CollapseMap() = default;
  explicit CollapseMap(std::size_t vocab_size);

  // `<from> <to>` per line, '#' starts a comment. Tokens are integer ids, or
  // symbols when a vocabulary is given. Unlisted tokens map to themselves.
  static CollapseMap load(const std::filesystem::path& path, std::size_t vocab_size,
                          std::span<const std::string> vocabulary = {});

  void set(int from, int to);
  int operator()(int token) const;
  bool is_identity() const { return table_.empty(); }

 private:
  std::vector<int> table_;  // empty means identity
};

struct EvalReport {
  std::size_t substitutions = 0;
  std::size_t insertions = 0;
  std::size_t deletions = 0;
  std::size_t reference_length = 0;
  double error_rate = 0.0;  // (S + I + D) / reference_length
};

// Corpus-level error rate. EOS tokens are dropped and the collapse map is
// applied to both sides before alignment.
EvalReport score(std::span<const std::vector<int>> hyps,
                 std::span<const std::vector<int>> refs,
                 const CollapseMap& collapse = {});

// One character per `chars_per_step` input steps: 'x' if any step in the
// group emitted, '-' otherwise.
std::string render_trace(std::span<const int> emissions, std::size_t chars_per_step);
std::string render_trace(const Trajectory& traj, std::size_t chars_per_step);

struct EmissionRow {
  std::size_t step = 0;  // 1-based
  double emit_prob = 0.0;
  int emitted = 0;
};

// Pre-sampling emission probability and the realized decision of one
// teacher-forced rollout.
std::vector<EmissionRow> export_emission_probs(const ModelParams& params,
                                               const EpisodeInput& episode, Rng& rng);
// Header `step,emit_prob,emitted`.
void write_emission_csv(std::span<const EmissionRow> rows, std::ostream& out);

// Fraction of emissions within the first or last `edge_fraction` of steps.
double clustering_score(std::span<const int> emissions, double edge_fraction = 0.1);

}  // namespace nat

#endif  // NAT_EVAL_HPP_

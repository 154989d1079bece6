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

#include "nat/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "nat/error.hpp"

namespace nat {

EditCounts levenshtein(std::span<const int> hyp, std::span<const int> ref) {
  const std::size_t n = hyp.size(), m = ref.size();
  // cost[i][j]: edits turning hyp[0, i) into ref[0, j)
  std::vector<std::size_t> cost((n + 1) * (m + 1));
  auto at = [m](std::size_t i, std::size_t j) { return i * (m + 1) + j; };
  for (std::size_t i = 0; i <= n; ++i) cost[at(i, 0)] = i;
  for (std::size_t j = 0; j <= m; ++j) cost[at(0, j)] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t diag = cost[at(i - 1, j - 1)] + (hyp[i - 1] != ref[j - 1]);
      cost[at(i, j)] = std::min({diag, cost[at(i - 1, j)] + 1, cost[at(i, j - 1)] + 1});
    }
  }
  EditCounts out;
  out.distance = cost[at(n, m)];
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    const std::size_t here = cost[at(i, j)];
    if (i > 0 && j > 0 && here == cost[at(i - 1, j - 1)] + (hyp[i - 1] != ref[j - 1])) {
      if (hyp[i - 1] != ref[j - 1]) ++out.substitutions;
      --i;
      --j;
    } else if (j > 0 && here == cost[at(i, j - 1)] + 1) {
      ++out.deletions;
      --j;
    } else {
      ++out.insertions;
      --i;
    }
  }
  return out;
}

CollapseMap::CollapseMap(std::size_t vocab_size) : table_(vocab_size) {
  for (std::size_t t = 0; t < vocab_size; ++t) table_[t] = static_cast<int>(t);
}

void CollapseMap::set(int from, int to) {
  if (from < 0 || to < 0 || static_cast<std::size_t>(from) >= table_.size() ||
      static_cast<std::size_t>(to) >= table_.size()) {
    throw InvalidArgument("collapse map entry " + std::to_string(from) + " -> " +
                          std::to_string(to) + " outside the vocabulary");
  }
  if ((from == kEos) != (to == kEos)) {
    throw InvalidArgument("collapse map must send EOS to EOS and nothing else to EOS");
  }
  table_[static_cast<std::size_t>(from)] = to;
}

int CollapseMap::operator()(int token) const {
  if (table_.empty()) return token;
  if (token < 0 || static_cast<std::size_t>(token) >= table_.size()) {
    throw InvalidArgument("token " + std::to_string(token) + " outside collapse map");
  }
  return table_[static_cast<std::size_t>(token)];
}

CollapseMap CollapseMap::load(const std::filesystem::path& path, std::size_t vocab_size,
                              std::span<const std::string> vocabulary) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open collapse map " + path.string());
  CollapseMap map(vocab_size);
  auto resolve = [&](const std::string& tok, std::size_t line_no) -> int {
    if (!vocabulary.empty()) {
      const auto it = std::find(vocabulary.begin(), vocabulary.end(), tok);
      if (it != vocabulary.end()) return static_cast<int>(it - vocabulary.begin());
    }
    try {
      std::size_t used = 0;
      const int id = std::stoi(tok, &used);
      if (used == tok.size()) return id;
    } catch (const std::exception&) {
    }
    throw ConfigError("collapse map " + path.string() + ":" + std::to_string(line_no) +
                      ": unknown token '" + tok + "'");
  };
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string from, to, extra;
    if (!(fields >> from)) continue;
    if (!(fields >> to) || (fields >> extra)) {
      throw ConfigError("collapse map " + path.string() + ":" + std::to_string(line_no) +
                        ": expected '<from> <to>'");
    }
    map.set(resolve(from, line_no), resolve(to, line_no));
  }
  return map;
}

EvalReport score(std::span<const std::vector<int>> hyps,
                 std::span<const std::vector<int>> refs, const CollapseMap& collapse) {
  if (hyps.size() != refs.size()) {
    throw InvalidArgument("score: " + std::to_string(hyps.size()) + " hypotheses for " +
                          std::to_string(refs.size()) + " references");
  }
  auto prepare = [&collapse](const std::vector<int>& seq) {
    std::vector<int> out;
    for (int t : seq) {
      if (t != kEos) out.push_back(collapse(t));
    }
    return out;
  };
  EvalReport report;
  for (std::size_t u = 0; u < hyps.size(); ++u) {
    const std::vector<int> h = prepare(hyps[u]);
    const std::vector<int> r = prepare(refs[u]);
    const EditCounts e = levenshtein(h, r);
    report.substitutions += e.substitutions;
    report.insertions += e.insertions;
    report.deletions += e.deletions;
    report.reference_length += r.size();
  }
  const std::size_t edits = report.substitutions + report.insertions + report.deletions;
  if (report.reference_length > 0) {
    report.error_rate =
        static_cast<double>(edits) / static_cast<double>(report.reference_length);
  } else {
    report.error_rate = edits == 0 ? 0.0 : 1.0;
  }
  return report;
}

std::string render_trace(std::span<const int> emissions, std::size_t chars_per_step) {
  if (chars_per_step < 1) throw InvalidArgument("render_trace: chars_per_step must be >= 1");
  const std::size_t n = (emissions.size() + chars_per_step - 1) / chars_per_step;
  std::string out(n, '-');
  for (std::size_t i = 0; i < emissions.size(); ++i) {
    if (emissions[i]) out[i / chars_per_step] = 'x';
  }
  return out;
}

std::string render_trace(const Trajectory& traj, std::size_t chars_per_step) {
  return render_trace(traj.emissions, chars_per_step);
}

std::vector<EmissionRow> export_emission_probs(const ModelParams& params,
                                               const EpisodeInput& episode, Rng& rng) {
  const Trajectory traj = sample_trajectory(params, episode, rng);
  std::vector<EmissionRow> rows;
  rows.reserve(traj.length());
  for (std::size_t i = 0; i < traj.length(); ++i) {
    rows.push_back({i + 1, traj.emit_probs[i], traj.emissions[i]});
  }
  return rows;
}

void write_emission_csv(std::span<const EmissionRow> rows, std::ostream& out) {
  out << "step,emit_prob,emitted\n";
  out << std::setprecision(17);
  for (const auto& r : rows) out << r.step << ',' << r.emit_prob << ',' << r.emitted << '\n';
}

double clustering_score(std::span<const int> emissions, double edge_fraction) {
  const std::size_t t = emissions.size();
  const auto edge = static_cast<std::size_t>(std::ceil(edge_fraction * static_cast<double>(t)));
  std::size_t total = 0, at_edges = 0;
  for (std::size_t i = 0; i < t; ++i) {
    if (!emissions[i]) continue;
    ++total;
    if (i < edge || i >= t - edge) ++at_edges;
  }
  return total == 0 ? 0.0 : static_cast<double>(at_edges) / static_cast<double>(total);
}

}  // namespace nat

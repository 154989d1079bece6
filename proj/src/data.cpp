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

#include "nat/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "binary_io.hpp"
#include "nat/error.hpp"
#include "nat/network.hpp"
#include "nat/rng.hpp"

namespace nat {
namespace {

constexpr std::uint64_t kSignatureStream = 0x5349474eull;  // "SIGN"
constexpr std::uint64_t kUtteranceStream = 0x55545452ull;  // "UTTR"

std::size_t draw_in_range(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.uniform_int(hi - lo + 1));
}

double peak(std::span<const double> s) {
  double p = 0.0;
  for (double v : s) p = std::max(p, std::abs(v));
  return p;
}

}  // namespace

void validate(const SyntheticTaskSpec& spec) {
  if (spec.vocab_size < 2) throw InvalidArgument("synthetic task needs vocab_size >= 2");
  if (spec.distinct_adjacent && spec.vocab_size < 3) {
    throw InvalidArgument("distinct adjacent tokens need at least two non-EOS tokens");
  }
  if (spec.min_tokens < 1 || spec.min_tokens > spec.max_tokens) {
    throw InvalidArgument("synthetic task token range is empty");
  }
  if (spec.min_frames < 1 || spec.min_frames > spec.max_frames) {
    throw InvalidArgument("synthetic task needs 1 <= min_frames <= max_frames");
  }
  if (spec.feature_dim == 0) throw InvalidArgument("synthetic task needs feature_dim > 0");
  if (!(spec.noise_std >= 0.0)) throw InvalidArgument("noise_std must be non-negative");
}

std::vector<Vector> token_signatures(const SyntheticTaskSpec& spec) {
  validate(spec);
  Rng rng(spec.seed, kSignatureStream);
  std::vector<Vector> sig(spec.vocab_size, Vector(spec.feature_dim));
  for (auto& s : sig) {
    for (double& v : s) v = static_cast<float>(sample_gaussian(0.0, 1.0, rng));
  }
  return sig;
}

std::vector<Utterance> gen_synthetic(const SyntheticTaskSpec& spec, std::size_t count,
                                     const std::string& id_prefix) {
  const std::vector<Vector> sig = token_signatures(spec);
  const Rng base(spec.seed, kUtteranceStream);
  std::vector<Utterance> out;
  out.reserve(count);
  for (std::size_t u = 0; u < count; ++u) {
    Rng rng = base.substream(u);
    Utterance utt;
    utt.id = id_prefix + std::to_string(u);
    const std::size_t n = draw_in_range(rng, spec.min_tokens, spec.max_tokens);
    int prev = -1;
    for (std::size_t j = 0; j < n; ++j) {
      int tok;
      do {
        tok = 1 + static_cast<int>(rng.uniform_int(spec.vocab_size - 1));
      } while (spec.distinct_adjacent && tok == prev);
      utt.targets.push_back(tok);
      prev = tok;
    }
    utt.targets.push_back(kEos);
    for (int tok : utt.targets) {
      const std::size_t run = draw_in_range(rng, spec.min_frames, spec.max_frames);
      for (std::size_t r = 0; r < run; ++r) {
        Vector frame = sig[static_cast<std::size_t>(tok)];
        // Stored at single precision so files round-trip exactly.
        for (double& v : frame) {
          v = static_cast<float>(v + sample_gaussian(0.0, spec.noise_std, rng));
        }
        utt.frames.push_back(std::move(frame));
      }
    }
    out.push_back(std::move(utt));
  }
  return out;
}

Vector mix_signals(std::span<const double> primary, std::span<const double> secondary,
                   double proportion) {
  if (!(proportion >= 0.0 && proportion <= 1.0)) {
    throw InvalidArgument("mixing proportion must lie in [0, 1]");
  }
  const double p_peak = peak(primary);
  if (p_peak == 0.0) throw InvalidArgument("cannot peak-normalize an all-zero primary signal");
  const double s_peak = peak(secondary);
  Vector out(primary.size());
  for (std::size_t i = 0; i < primary.size(); ++i) {
    double v = primary[i] / p_peak;
    if (i < secondary.size() && s_peak > 0.0) v += proportion * (secondary[i] / s_peak);
    out[i] = v;
  }
  return out;
}

std::map<std::string, std::string> pair_by_index(std::span<const Utterance> primary,
                                                 std::span<const Utterance> secondary,
                                                 std::size_t rotation) {
  if (secondary.size() < primary.size()) {
    throw InvalidArgument("secondary set has fewer utterances than the primary set");
  }
  std::map<std::string, std::string> pairing;
  for (std::size_t i = 0; i < primary.size(); ++i) {
    pairing[primary[i].id] = secondary[(i + rotation) % secondary.size()].id;
  }
  return pairing;
}

Utterance mix_utterance(const Utterance& primary, const Utterance& secondary,
                        double proportion) {
  if (primary.frames.empty()) throw InvalidArgument("primary utterance has no frames");
  const std::size_t dim = primary.frames.front().size();
  if (!secondary.frames.empty() && secondary.frames.front().size() != dim) {
    throw ShapeError("mixed utterances have different feature dims");
  }
  Vector p_flat, s_flat;
  for (const auto& f : primary.frames) p_flat.insert(p_flat.end(), f.begin(), f.end());
  for (const auto& f : secondary.frames) s_flat.insert(s_flat.end(), f.begin(), f.end());
  const Vector mixed = mix_signals(p_flat, s_flat, proportion);
  Utterance out;
  out.id = primary.id;
  out.targets = primary.targets;
  out.frames.resize(primary.frames.size());
  for (std::size_t t = 0; t < out.frames.size(); ++t) {
    out.frames[t].assign(mixed.begin() + static_cast<std::ptrdiff_t>(t * dim),
                         mixed.begin() + static_cast<std::ptrdiff_t>((t + 1) * dim));
  }
  return out;
}

std::vector<Utterance> mix_dataset(std::span<const Utterance> primary,
                                   std::span<const Utterance> secondary,
                                   const MixSpec& spec) {
  std::map<std::string, const Utterance*> by_id;
  for (const auto& u : secondary) by_id[u.id] = &u;
  std::vector<Utterance> out;
  out.reserve(primary.size());
  for (const auto& p : primary) {
    const auto it = spec.pairing.find(p.id);
    if (it == spec.pairing.end()) {
      throw InvalidArgument("no pairing for utterance " + p.id);
    }
    const auto sec = by_id.find(it->second);
    if (sec == by_id.end()) {
      throw InvalidArgument("paired utterance " + it->second + " not in secondary set");
    }
    out.push_back(mix_utterance(p, *sec->second, spec.proportion));
  }
  return out;
}

std::vector<Vector> stack_frames(std::span<const Vector> frames, std::size_t k) {
  if (frames.empty()) throw InvalidArgument("stack_frames: no frames");
  if (k < 1) throw InvalidArgument("stack_frames: k must be >= 1");
  const std::size_t dim = frames.front().size();
  const std::size_t n = (frames.size() + k - 1) / k;
  std::vector<Vector> out(n, Vector(k * dim, 0.0));
  for (std::size_t t = 0; t < frames.size(); ++t) {
    if (frames[t].size() != dim) throw ShapeError("stack_frames: ragged frame widths");
    std::copy(frames[t].begin(), frames[t].end(),
              out[t / k].begin() + static_cast<std::ptrdiff_t>((t % k) * dim));
  }
  return out;
}

std::vector<Utterance> stack_dataset(std::span<const Utterance> utts, std::size_t k) {
  std::vector<Utterance> out;
  out.reserve(utts.size());
  for (const auto& u : utts) {
    Utterance s{u.id, stack_frames(u.frames, k), u.targets};
    if (s.targets.size() > s.frames.size()) {
      throw InvalidArgument("utterance " + u.id + " has more targets than stacked frames");
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_dataset(std::span<const Utterance> utts, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write("NATD", 4);
  io::put<std::uint32_t>(out, kDatasetVersion);
  io::put<std::uint32_t>(out, static_cast<std::uint32_t>(utts.size()));
  for (const auto& u : utts) {
    const std::size_t dim = u.frames.empty() ? 0 : u.frames.front().size();
    io::put_string(out, u.id);
    io::put<std::uint32_t>(out, static_cast<std::uint32_t>(u.frames.size()));
    io::put<std::uint32_t>(out, static_cast<std::uint32_t>(dim));
    for (const auto& f : u.frames) {
      if (f.size() != dim) throw ShapeError("utterance " + u.id + " has ragged frames");
      for (double v : f) io::put<float>(out, static_cast<float>(v));
    }
    io::put<std::uint32_t>(out, static_cast<std::uint32_t>(u.targets.size()));
    for (int t : u.targets) io::put<std::uint32_t>(out, static_cast<std::uint32_t>(t));
  }
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<Utterance> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  io::expect_magic(in, "NATD");
  const auto version = io::get<std::uint32_t>(in, "version");
  if (version != kDatasetVersion) {
    throw FormatError(FormatError::Kind::kVersion,
                      "unsupported dataset version " + std::to_string(version));
  }
  const auto count = io::get<std::uint32_t>(in, "utterance count");
  std::vector<Utterance> utts;
  std::size_t common_dim = 0;
  for (std::uint32_t i = 0; i < count; ++i) {
    Utterance u;
    u.id = io::get_string(in, "utterance id");
    const auto t1 = io::get<std::uint32_t>(in, "frame count");
    const auto dim = io::get<std::uint32_t>(in, "feature dim");
    if (t1 > 0 && dim == 0) {
      throw FormatError(FormatError::Kind::kDimension, "utterance " + u.id + " has zero-width frames");
    }
    if (t1 > 0) {
      if (common_dim == 0) common_dim = dim;
      if (dim != common_dim) {
        throw FormatError(FormatError::Kind::kDimension,
                          "utterance " + u.id + " has feature dim " + std::to_string(dim) +
                              ", earlier utterances have " + std::to_string(common_dim));
      }
    }
    io::require_available(in, std::uint64_t{t1} * dim * sizeof(float), "frames");
    std::vector<float> raw(static_cast<std::size_t>(t1) * dim);
    io::read_exact(in, raw.data(), raw.size() * sizeof(float), "frames");
    u.frames.resize(t1);
    for (std::size_t t = 0; t < t1; ++t) {
      u.frames[t].assign(raw.begin() + static_cast<std::ptrdiff_t>(t * dim),
                         raw.begin() + static_cast<std::ptrdiff_t>((t + 1) * dim));
    }
    const auto t2 = io::get<std::uint32_t>(in, "target count");
    io::require_available(in, std::uint64_t{t2} * sizeof(std::uint32_t), "targets");
    std::vector<std::uint32_t> ids(t2);
    io::read_exact(in, ids.data(), ids.size() * sizeof(std::uint32_t), "targets");
    for (auto id : ids) {
      if (id > static_cast<std::uint32_t>(std::numeric_limits<int>::max())) {
        throw FormatError(FormatError::Kind::kCorrupt, "token id out of range in " + u.id);
      }
      u.targets.push_back(static_cast<int>(id));
    }
    utts.push_back(std::move(u));
  }
  return utts;
}

std::vector<std::string> read_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> symbols;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    symbols.push_back(line);
  }
  if (symbols.empty()) throw ConfigError("vocabulary " + path.string() + " is empty");
  const std::string& eos = symbols.front();
  if (eos != "<eos>" && eos != "</s>" && eos != "eos") {
    throw ConfigError("vocabulary " + path.string() +
                      " must list the end-of-sequence symbol as id 0");
  }
  return symbols;
}

}  // namespace nat

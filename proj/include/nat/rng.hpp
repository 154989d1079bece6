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

#ifndef NAT_RNG_HPP_
#define NAT_RNG_HPP_

#include <array>
#include <cstdint>

namespace nat {

// Counter-based generator (Philox4x32-10) keyed by (seed, stream). Each draw
// is a pure function of (seed, stream, counter), so two generators with the
// same key produce the same sequence regardless of which thread owns them.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::uint64_t counter() const { return counter_; }

  // Derived generator with an independent stream; depends only on this
  // generator's key and `index`, not on its position.
  Rng substream(std::uint64_t index) const;

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform();
  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_int(std::uint64_t n);

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int available_ = 0;
};

// Philox4x32-10 block function; exposed for tests.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// Returns 1 with probability p. Throws InvalidArgument if p is outside [0, 1].
int sample_bernoulli(double p, Rng& rng);

// Draw from N(mean, std^2) by Box-Muller. std == 0 returns mean exactly.
double sample_gaussian(double mean, double std, Rng& rng);

}  // namespace nat

#endif  // NAT_RNG_HPP_

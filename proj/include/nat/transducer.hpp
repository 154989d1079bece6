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

#ifndef NAT_TRANSDUCER_HPP_
#define NAT_TRANSDUCER_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nat/network.hpp"
#include "nat/rng.hpp"

namespace nat {

// Input frames and target tokens for one rollout. Targets end with EOS and
// there are never more targets than frames.
struct EpisodeInput {
  std::span<const Vector> features;
  std::span<const int> targets;
};

// Throws InvalidArgument unless 1 <= T2 <= T1, targets end in EOS, every id
// is in the vocabulary and the frames have the model's feature width.
void validate_episode(const ModelParams& params, const EpisodeInput& episode);

enum class StepKind : std::uint8_t { kFree, kForcedEmit, kForcedSilent };

// Decision rule at 1-based step `step` given `emitted` tokens so far. Emission
// is forced once the remaining frames (this one included) no longer exceed the
// remaining targets; it is suppressed once every target has been emitted.
StepKind step_kind(std::size_t step, std::size_t num_frames, std::size_t num_targets,
                   std::size_t emitted);

struct Trajectory {
  std::vector<int> emissions;          // sampled emit bits
  std::vector<int> positions;          // tokens emitted through each step
  std::vector<StepKind> kinds;
  std::vector<double> emit_logits;     // W_b h_i
  std::vector<double> emit_probs;      // sigmoid of the above
  std::vector<int> emitted_tokens;     // target id emitted at the step, -1 otherwise
  std::vector<double> token_logprobs;  // log d_i[target] at emitting steps, else 0
  std::vector<Vector> token_probs;     // d_i at emitting steps, else empty
  std::vector<Vector> h_tops;
  Tape tape;

  std::size_t length() const { return emissions.size(); }
  std::size_t num_emitted() const { return positions.empty() ? 0 : positions.back(); }
};

// Rolls the network over every frame with teacher-forced token feedback,
// sampling the free emission decisions from `rng`.
Trajectory sample_trajectory(const ModelParams& params, const EpisodeInput& episode,
                             Rng& rng);

// Re-runs the network along a fixed emission sequence. Throws
// InvalidArgument if the sequence violates the forcing rules.
Trajectory replay_trajectory(const ModelParams& params, const EpisodeInput& episode,
                             std::span<const int> emissions);

// Log-probability of the free decisions; forced steps contribute nothing.
double log_rho(const Trajectory& trajectory);

struct WeightedTrajectory {
  Trajectory trajectory;
  double probability = 0.0;
};

inline constexpr std::size_t kMaxEnumerationFrames = 12;

// Every emission sequence reachable under the forcing rules with its exact
// probability (a direct product of b_i and 1 - b_i). Throws InvalidArgument
// when the episode has more than `max_frames` frames.
std::vector<WeightedTrajectory> enumerate_trajectories(
    const ModelParams& params, const EpisodeInput& episode,
    std::size_t max_frames = kMaxEnumerationFrames);

struct Hypothesis {
  std::vector<int> tokens;            // includes the final EOS when emitted
  std::vector<std::size_t> emit_steps;  // 1-based input step of each token
};

// Deterministic decoding: emit whenever b_i >= 0.5, pick the arg-max token
// (lowest id on ties) and feed it back. Stops after EOS, after `max_tokens`
// tokens or when the input is exhausted.
Hypothesis greedy_decode(const ModelParams& params, std::span<const Vector> features,
                         std::size_t max_tokens);

}  // namespace nat

#endif  // NAT_TRANSDUCER_HPP_

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

#include "nat/transducer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "nat/error.hpp"

namespace nat {
namespace {

using Decider = std::function<int(std::size_t step, double prob)>;

Trajectory rollout(const ModelParams& params, const EpisodeInput& episode,
                   const Decider& decide) {
  validate_episode(params, episode);
  const std::size_t t1 = episode.features.size();
  const std::size_t t2 = episode.targets.size();

  Trajectory traj;
  traj.emissions.reserve(t1);
  traj.positions.reserve(t1);
  traj.kinds.reserve(t1);
  traj.emit_logits.reserve(t1);
  traj.emit_probs.reserve(t1);
  traj.emitted_tokens.reserve(t1);
  traj.token_logprobs.reserve(t1);
  traj.token_probs.resize(t1);
  traj.h_tops.reserve(t1);
  traj.tape.resize(t1);

  LstmState state = initial_state(params);
  int b_prev = 0;
  int token_prev = params.bos();
  std::size_t emitted = 0;
  for (std::size_t i = 0; i < t1; ++i) {
    const Vector input = step_input(episode.features[i], b_prev, token_prev, params);
    traj.tape[i].token_prev = token_prev;
    state = lstm_forward(params, state, input, &traj.tape[i], i + 1);
    const Vector& h = state.top();
    const double logit = emission_logit(h, params);
    const double prob = sigmoid(logit);

    const StepKind kind = step_kind(i + 1, t1, t2, emitted);
    int bit = 0;
    switch (kind) {
      case StepKind::kForcedEmit: bit = 1; break;
      case StepKind::kForcedSilent: bit = 0; break;
      case StepKind::kFree: bit = decide(i + 1, prob); break;
    }

    int token = -1;
    double logprob = 0.0;
    if (bit) {
      token = episode.targets[emitted];
      Vector d = output_dist(h, params);
      logprob = std::log(d[static_cast<std::size_t>(token)]);
      traj.token_probs[i] = std::move(d);
      ++emitted;
    }
    traj.emissions.push_back(bit);
    traj.positions.push_back(static_cast<int>(emitted));
    traj.kinds.push_back(kind);
    traj.emit_logits.push_back(logit);
    traj.emit_probs.push_back(prob);
    traj.emitted_tokens.push_back(token);
    traj.token_logprobs.push_back(logprob);
    traj.h_tops.push_back(h);

    b_prev = bit;
    token_prev = emitted > 0 ? episode.targets[emitted - 1] : params.bos();
  }
  return traj;
}

void enumerate_bits(std::size_t step, std::size_t t1, std::size_t t2, std::size_t emitted,
                    std::vector<int>& prefix, std::vector<std::vector<int>>& out) {
  if (step > t1) {
    out.push_back(prefix);
    return;
  }
  const StepKind kind = step_kind(step, t1, t2, emitted);
  if (kind != StepKind::kForcedEmit) {
    prefix.push_back(0);
    enumerate_bits(step + 1, t1, t2, emitted, prefix, out);
    prefix.pop_back();
  }
  if (kind != StepKind::kForcedSilent) {
    prefix.push_back(1);
    enumerate_bits(step + 1, t1, t2, emitted + 1, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

void validate_episode(const ModelParams& params, const EpisodeInput& episode) {
  const std::size_t t1 = episode.features.size();
  const std::size_t t2 = episode.targets.size();
  if (t1 == 0) throw InvalidArgument("episode has no input frames");
  if (t2 == 0) throw InvalidArgument("episode has no targets");
  if (t2 > t1) {
    throw InvalidArgument("episode has " + std::to_string(t2) + " targets but only " +
                          std::to_string(t1) + " frames");
  }
  if (episode.targets.back() != kEos) {
    throw InvalidArgument("episode targets must end with EOS");
  }
  for (int t : episode.targets) {
    if (t < 0 || static_cast<std::size_t>(t) >= params.vocab_size()) {
      throw InvalidArgument("target id " + std::to_string(t) + " outside vocabulary");
    }
  }
  const std::size_t dim = params.feature_dim();
  for (const auto& f : episode.features) {
    if (f.size() != dim) {
      throw ShapeError("frame has " + std::to_string(f.size()) +
                       " features, model expects " + std::to_string(dim));
    }
  }
}

StepKind step_kind(std::size_t step, std::size_t num_frames, std::size_t num_targets,
                   std::size_t emitted) {
  if (emitted >= num_targets) return StepKind::kForcedSilent;
  const std::size_t frames_left = num_frames - step + 1;
  if (frames_left <= num_targets - emitted) return StepKind::kForcedEmit;
  return StepKind::kFree;
}

Trajectory sample_trajectory(const ModelParams& params, const EpisodeInput& episode,
                             Rng& rng) {
  return rollout(params, episode,
                 [&rng](std::size_t, double prob) { return sample_bernoulli(prob, rng); });
}

Trajectory replay_trajectory(const ModelParams& params, const EpisodeInput& episode,
                             std::span<const int> emissions) {
  if (emissions.size() != episode.features.size()) {
    throw InvalidArgument("replay: emission sequence length differs from frame count");
  }
  Trajectory traj = rollout(params, episode, [&emissions](std::size_t step, double) {
    return emissions[step - 1] ? 1 : 0;
  });
  for (std::size_t i = 0; i < emissions.size(); ++i) {
    if ((emissions[i] != 0) != (traj.emissions[i] != 0)) {
      throw InvalidArgument("replay: emission at step " + std::to_string(i + 1) +
                            " contradicts the forcing rules");
    }
  }
  return traj;
}

double log_rho(const Trajectory& trajectory) {
  double total = 0.0;
  for (std::size_t i = 0; i < trajectory.length(); ++i) {
    if (trajectory.kinds[i] != StepKind::kFree) continue;
    const double z = trajectory.emit_logits[i];
    total += trajectory.emissions[i] ? log_sigmoid(z) : log_sigmoid(-z);
  }
  return total;
}

std::vector<WeightedTrajectory> enumerate_trajectories(const ModelParams& params,
                                                       const EpisodeInput& episode,
                                                       std::size_t max_frames) {
  validate_episode(params, episode);
  const std::size_t t1 = episode.features.size();
  if (t1 > max_frames) {
    throw InvalidArgument("enumeration limited to " + std::to_string(max_frames) +
                          " frames (episode has " + std::to_string(t1) +
                          "); use Monte Carlo sampling instead");
  }
  std::vector<std::vector<int>> sequences;
  std::vector<int> prefix;
  enumerate_bits(1, t1, episode.targets.size(), 0, prefix, sequences);

  std::vector<WeightedTrajectory> out;
  out.reserve(sequences.size());
  for (const auto& bits : sequences) {
    WeightedTrajectory w;
    w.trajectory = replay_trajectory(params, episode, bits);
    double prob = 1.0;
    for (std::size_t i = 0; i < t1; ++i) {
      if (w.trajectory.kinds[i] != StepKind::kFree) continue;
      const double b = w.trajectory.emit_probs[i];
      prob *= bits[i] ? b : 1.0 - b;
    }
    w.probability = prob;
    out.push_back(std::move(w));
  }
  return out;
}

Hypothesis greedy_decode(const ModelParams& params, std::span<const Vector> features,
                         std::size_t max_tokens) {
  if (features.empty()) throw InvalidArgument("greedy_decode: no input frames");
  Hypothesis hyp;
  LstmState state = initial_state(params);
  int b_prev = 0;
  int token_prev = params.bos();
  for (std::size_t i = 0; i < features.size() && hyp.tokens.size() < max_tokens; ++i) {
    const Vector input = step_input(features[i], b_prev, token_prev, params);
    state = lstm_forward(params, state, input, nullptr, i + 1);
    if (emission_prob(state.top(), params) < 0.5) {
      b_prev = 0;
      continue;
    }
    const Vector logits = output_logits(state.top(), params);
    const int token = static_cast<int>(
        std::max_element(logits.begin(), logits.end()) - logits.begin());
    hyp.tokens.push_back(token);
    hyp.emit_steps.push_back(i + 1);
    if (token == kEos) break;
    b_prev = 1;
    token_prev = token;
  }
  return hyp;
}

}  // namespace nat

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

#ifndef NAT_ESTIMATOR_HPP_
#define NAT_ESTIMATOR_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nat/network.hpp"
#include "nat/rng.hpp"
#include "nat/transducer.hpp"

namespace nat {

enum class BaselineKind { kNone, kParametric, kLeaveOneOut };

// kSymmetric subtracts lambda * log p(action taken) at every free step.
// kPaperLiteral uses -lambda*b*log p(emit) + lambda*(1-b)*log p(silent).
enum class EntropyMode { kSymmetric, kPaperLiteral };

BaselineKind parse_baseline_kind(const std::string& s);
EntropyMode parse_entropy_mode(const std::string& s);
std::string to_string(BaselineKind kind);
std::string to_string(EntropyMode mode);

struct RewardConfig {
  double entropy_weight = 0.0;
  EntropyMode entropy_mode = EntropyMode::kSymmetric;
  // Optional KL(Bernoulli(rate) || Bernoulli(b_i)) penalty at free steps.
  std::optional<double> kl_target_rate;
  double kl_weight = 0.0;
};

struct EstimatorConfig {
  std::size_t num_samples = 16;
  BaselineKind baseline = BaselineKind::kLeaveOneOut;
  RewardConfig reward;
  // Run the K rollouts and backward passes on OpenMP threads. Results do not
  // depend on this flag.
  bool parallel = true;
};

void validate(const EstimatorConfig& cfg);

struct RewardTrace {
  Vector per_step;
  double total = 0.0;
};

// Token log-likelihood at emitting steps plus the entropy term at free steps.
RewardTrace step_rewards(const Trajectory& traj, double lambda, EntropyMode mode);

// -weight * KL(Bernoulli(target_rate) || Bernoulli(b_i)) at each free step.
RewardTrace kl_rate_penalty(const Trajectory& traj, double target_rate, double weight);

// step_rewards plus the optional KL penalty.
RewardTrace trajectory_rewards(const Trajectory& traj, const RewardConfig& cfg);

// Suffix sums: out[j] = sum_{i >= j} R_i.
Vector reward_to_go(const RewardTrace& trace);

// Omega_j = W' h_j + o.
Vector parametric_baseline(std::span<const Vector> h_tops, const ModelParams& params);

// Ascent gradient of -1/2 sum_j (Omega_j - G_j)^2 over free steps with
// respect to the baseline projection, added into `grads`.
void accumulate_baseline_gradient(const Trajectory& traj, std::span<const double> omega,
                                  std::span<const double> returns, ModelParams& grads);

// Leave-one-out baseline with the residual correction for differing past
// rewards. Row k holds Omega^k. Throws InvalidArgument when K < 2 or the
// traces have different lengths.
Matrix loo_baseline(std::span<const RewardTrace> traces);

// Partial derivatives of R(b) with the emission sequence held fixed.
std::vector<StepSignal> pathwise_signals(const Trajectory& traj, const RewardConfig& cfg);

struct GradEstimate {
  ModelParams grad;            // ascent direction, shaped like the model
  double mean_reward = 0.0;    // mean total reward (exact expectation for exact_gradient)
  Vector score_variance;       // per step, across samples
  double mean_score_variance = 0.0;
  std::size_t num_samples = 0;
};

// K-sample score-function estimate with per-step reward-to-go, plus the
// pathwise gradient of the sampled rewards. Sample k draws from
// rng.substream(k); the reduction runs in sample order.
GradEstimate policy_gradient(const ModelParams& params, const EpisodeInput& episode,
                             const EstimatorConfig& cfg, const Rng& rng);

// Exact gradient of E[R] by enumerating every trajectory. Limited to
// kMaxEnumerationFrames frames.
GradEstimate exact_gradient(const ModelParams& params, const EpisodeInput& episode,
                            const RewardConfig& cfg);

}  // namespace nat

#endif  // NAT_ESTIMATOR_HPP_

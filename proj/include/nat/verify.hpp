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

#ifndef NAT_VERIFY_HPP_
#define NAT_VERIFY_HPP_

// Self-check battery behind `nat check`: exact-enumeration, finite-difference
// and Monte Carlo oracles for the estimator on small random instances. Every
// oracle here uses only forward passes or direct formula evaluation, never
// the backward pass it is checking.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nat/estimator.hpp"
#include "nat/network.hpp"
#include "nat/transducer.hpp"

namespace nat {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct CheckOptions {
  std::uint64_t seed = 1;
  std::size_t enumeration_instances = 20;
  std::size_t law_instances = 5;
  std::size_t law_samples = 100000;
  std::size_t unbiased_draws = 200000;
  std::vector<std::size_t> unbiased_k = {2, 16};
  std::size_t unbiased_components = 20;
  std::size_t neutrality_draws = 20000;
  std::size_t variance_instances = 10;
  std::size_t variance_draws = 2000;
  std::size_t variance_k = 16;
  std::size_t edit_pairs = 1000;
  // Analytic gradients are multiplied by this before comparison; anything
  // but 1 simulates a broken backward pass.
  double gradient_scale = 1.0;
};

// Small model plus episode with weights drawn uniformly from
// [-weight_scale, weight_scale].
struct Instance {
  ModelParams params;
  std::vector<Vector> features;
  std::vector<int> targets;

  EpisodeInput episode() const { return {features, targets}; }
};

Instance random_instance(Rng& rng, std::size_t t1, std::size_t t2, const ModelShape& shape,
                         double weight_scale = 0.5);

// Central differences of f over every non-baseline parameter.
std::vector<double> finite_difference_gradient(
    const ModelParams& params, const std::function<double(const ModelParams&)>& f,
    double step = 1e-5);

// E[R] by enumeration, recomputing each trajectory's reward directly.
double expected_reward(const ModelParams& params, const EpisodeInput& episode,
                       const RewardConfig& cfg);

// Sum of token log-likelihoods along a fixed emission sequence.
double sequence_log_likelihood(const ModelParams& params, const EpisodeInput& episode,
                               std::span<const int> emissions);

// Minimum edit count over every edit script (no memoization).
std::size_t brute_force_edit_distance(std::span<const int> a, std::span<const int> b);

struct MonteCarloSummary {
  std::vector<double> mean;
  std::vector<double> std_error;
  double total_variance = 0.0;  // trace of the per-draw covariance
};

// Mean and standard error of `draws` independent policy_gradient calls,
// flattened in block order.
MonteCarloSummary estimator_moments(const ModelParams& params, const EpisodeInput& episode,
                                    const EstimatorConfig& cfg, std::size_t draws,
                                    const Rng& rng);

CheckResult check_enumeration_normalization(const CheckOptions& opts);
CheckResult check_trajectory_law(const CheckOptions& opts);
CheckResult check_supervised_gradient(const CheckOptions& opts);
CheckResult check_expected_reward_gradient(const CheckOptions& opts);
CheckResult check_unbiasedness(const CheckOptions& opts);
CheckResult check_baseline_neutrality(const CheckOptions& opts);
CheckResult check_variance_reduction(const CheckOptions& opts);
CheckResult check_schedule_anchors();
CheckResult check_levenshtein_oracle(const CheckOptions& opts);

std::vector<CheckResult> run_check_battery(const CheckOptions& opts);

}  // namespace nat

#endif  // NAT_VERIFY_HPP_

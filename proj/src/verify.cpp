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

#include "nat/verify.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "nat/eval.hpp"
#include "nat/optimizer.hpp"

namespace nat {
namespace {

// Shape used by the estimator checks: small enough for 10^5-draw Monte Carlo.
constexpr ModelShape kTinyShape{2, 3, 2, 4, 1};
// Shape used by the supervised gradient check.
constexpr ModelShape kTwoLayerShape{3, 4, 4, 8, 2};

std::vector<bool> baseline_mask(const ModelParams& params) {
  std::vector<bool> mask;
  for (const auto& b : blocks(params)) mask.insert(mask.end(), b.values.size(), b.is_baseline);
  return mask;
}

bool close(double analytic, double numeric, double rel, double floor) {
  const double diff = std::abs(analytic - numeric);
  return diff <= floor || diff <= rel * std::max(std::abs(analytic), std::abs(numeric));
}

std::string format_double(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

std::size_t binomial(std::size_t n, std::size_t k) {
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::vector<std::size_t> pick_components(const std::vector<double>& exact,
                                         const std::vector<bool>& is_baseline,
                                         std::size_t count, Rng& rng) {
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    if (!is_baseline[i] && std::abs(exact[i]) > 1e-10) candidates.push_back(i);
  }
  for (std::size_t i = candidates.size(); i > 1; --i) {
    std::swap(candidates[i - 1], candidates[rng.uniform_int(i)]);
  }
  if (candidates.size() > count) candidates.resize(count);
  std::sort(candidates.begin(), candidates.end());
  return candidates;
}

}  // namespace

Instance random_instance(Rng& rng, std::size_t t1, std::size_t t2, const ModelShape& shape,
                         double weight_scale) {
  Instance inst;
  inst.params = init_params(shape, rng);
  for (auto& b : blocks(inst.params)) {
    for (double& v : b.values) v = (2.0 * rng.uniform() - 1.0) * weight_scale;
  }
  inst.features.assign(t1, Vector(shape.feature_dim));
  for (auto& f : inst.features) {
    for (double& v : f) v = sample_gaussian(0.0, 1.0, rng);
  }
  for (std::size_t j = 0; j + 1 < t2; ++j) {
    inst.targets.push_back(1 + static_cast<int>(rng.uniform_int(shape.vocab_size - 1)));
  }
  inst.targets.push_back(kEos);
  return inst;
}

std::vector<double> finite_difference_gradient(
    const ModelParams& params, const std::function<double(const ModelParams&)>& f,
    double step) {
  ModelParams work = params;
  std::vector<double> grad;
  grad.reserve(parameter_count(params));
  for (auto& b : blocks(work)) {
    for (double& v : b.values) {
      if (b.is_baseline) {
        grad.push_back(0.0);
        continue;
      }
      const double orig = v;
      v = orig + step;
      const double plus = f(work);
      v = orig - step;
      const double minus = f(work);
      v = orig;
      grad.push_back((plus - minus) / (2.0 * step));
    }
  }
  return grad;
}

double expected_reward(const ModelParams& params, const EpisodeInput& episode,
                       const RewardConfig& cfg) {
  double total = 0.0;
  for (const auto& w : enumerate_trajectories(params, episode)) {
    total += w.probability * trajectory_rewards(w.trajectory, cfg).total;
  }
  return total;
}

double sequence_log_likelihood(const ModelParams& params, const EpisodeInput& episode,
                               std::span<const int> emissions) {
  const Trajectory traj = replay_trajectory(params, episode, emissions);
  double total = 0.0;
  for (double lp : traj.token_logprobs) total += lp;
  return total;
}

std::size_t brute_force_edit_distance(std::span<const int> a, std::span<const int> b) {
  if (a.empty()) return b.size();
  if (b.empty()) return a.size();
  const std::size_t keep_or_swap =
      brute_force_edit_distance(a.subspan(1), b.subspan(1)) + (a[0] != b[0]);
  const std::size_t drop_a = brute_force_edit_distance(a.subspan(1), b) + 1;
  const std::size_t drop_b = brute_force_edit_distance(a, b.subspan(1)) + 1;
  return std::min({keep_or_swap, drop_a, drop_b});
}

MonteCarloSummary estimator_moments(const ModelParams& params, const EpisodeInput& episode,
                                    const EstimatorConfig& cfg, std::size_t draws,
                                    const Rng& rng) {
  const std::size_t n = parameter_count(params);
  std::vector<double> mean(n, 0.0), m2(n, 0.0);
  for (std::size_t d = 0; d < draws; ++d) {
    const GradEstimate est = policy_gradient(params, episode, cfg, rng.substream(d));
    const std::vector<double> g = flatten(est.grad);
    const double count = static_cast<double>(d + 1);
    for (std::size_t i = 0; i < n; ++i) {
      const double delta = g[i] - mean[i];
      mean[i] += delta / count;
      m2[i] += delta * (g[i] - mean[i]);
    }
  }
  MonteCarloSummary s;
  s.mean = std::move(mean);
  s.std_error.resize(n);
  const std::vector<bool> is_baseline = baseline_mask(params);
  for (std::size_t i = 0; i < n; ++i) {
    const double var = draws > 1 ? m2[i] / static_cast<double>(draws - 1) : 0.0;
    s.std_error[i] = std::sqrt(var / static_cast<double>(draws));
    if (!is_baseline[i]) s.total_variance += var;
  }
  return s;
}

CheckResult check_enumeration_normalization(const CheckOptions& opts) {
  CheckResult r{"enumeration normalization", true, ""};
  Rng rng(opts.seed, 101);
  double worst = 0.0;
  for (std::size_t n = 0; n < opts.enumeration_instances; ++n) {
    const std::size_t t1 = 3 + rng.uniform_int(3);
    const std::size_t t2 = 1 + rng.uniform_int(t1);
    const Instance inst = random_instance(rng, t1, t2, kTinyShape, 1.0);
    const auto all = enumerate_trajectories(inst.params, inst.episode());
    double total = 0.0;
    for (const auto& w : all) total += w.probability;
    worst = std::max(worst, std::abs(total - 1.0));
    if (all.size() != binomial(t1, t2)) {
      r.passed = false;
      r.detail = "T1=" + std::to_string(t1) + " T2=" + std::to_string(t2) + " gave " +
                 std::to_string(all.size()) + " trajectories";
      return r;
    }
  }
  r.passed = worst <= 1e-10;
  r.detail = "max |sum p - 1| = " + format_double(worst);
  return r;
}

CheckResult check_trajectory_law(const CheckOptions& opts) {
  CheckResult r{"trajectory law (Monte Carlo vs enumeration)", true, ""};
  Rng rng(opts.seed, 102);
  double worst_z = 0.0;
  std::size_t failures = 0, compared = 0;
  for (std::size_t n = 0; n < opts.law_instances; ++n) {
    const std::size_t t1 = 3 + rng.uniform_int(3);
    const std::size_t t2 = 1 + rng.uniform_int(t1 - 1);
    const Instance inst = random_instance(rng, t1, t2, kTinyShape, 1.0);
    std::map<std::vector<int>, double> exact;
    for (const auto& w : enumerate_trajectories(inst.params, inst.episode())) {
      exact[w.trajectory.emissions] = w.probability;
    }
    std::map<std::vector<int>, std::size_t> counts;
    const Rng base = rng.substream(n);
    for (std::size_t s = 0; s < opts.law_samples; ++s) {
      Rng stream = base.substream(s);
      ++counts[sample_trajectory(inst.params, inst.episode(), stream).emissions];
    }
    const double samples = static_cast<double>(opts.law_samples);
    for (const auto& [bits, p] : exact) {
      const double freq = static_cast<double>(counts[bits]) / samples;
      const double se = std::sqrt(p * (1.0 - p) / samples);
      const double z = se > 0.0 ? std::abs(freq - p) / se : (freq == p ? 0.0 : 1e9);
      worst_z = std::max(worst_z, z);
      ++compared;
      if (z > 3.0) ++failures;
    }
    for (const auto& [bits, c] : counts) {
      if (!exact.count(bits)) ++failures;  // sampled an unreachable sequence
    }
  }
  r.passed = failures == 0;
  r.detail = std::to_string(compared) + " trajectory probabilities, " +
             std::to_string(failures) + " outside 3 SE, max z = " + format_double(worst_z);
  return r;
}

CheckResult check_supervised_gradient(const CheckOptions& opts) {
  CheckResult r{"supervised-path gradient vs finite differences", true, ""};
  Rng rng(opts.seed, 103);
  const std::size_t t = 5;
  const Instance inst = random_instance(rng, t, t, kTwoLayerShape, 0.5);
  const std::vector<int> all_emit(t, 1);
  const Trajectory traj = replay_trajectory(inst.params, inst.episode(), all_emit);
  const RewardConfig plain;
  ModelParams analytic = backward(inst.params, traj.tape, pathwise_signals(traj, plain));
  scale(opts.gradient_scale, analytic);
  const std::vector<double> fd = finite_difference_gradient(
      inst.params, [&](const ModelParams& p) {
        return sequence_log_likelihood(p, inst.episode(), all_emit);
      });
  const std::vector<double> an = flatten(analytic);
  std::size_t bad = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < an.size(); ++i) {
    const double denom = std::max(std::abs(an[i]), std::abs(fd[i]));
    if (denom > 1e-7) worst = std::max(worst, std::abs(an[i] - fd[i]) / denom);
    if (!close(an[i], fd[i], 1e-4, 1e-7)) ++bad;
  }
  r.passed = bad == 0;
  r.detail = std::to_string(an.size()) + " parameters, " + std::to_string(bad) +
             " mismatches, max rel err = " + format_double(worst);
  return r;
}

CheckResult check_expected_reward_gradient(const CheckOptions& opts) {
  CheckResult r{"exact expected-reward gradient vs finite differences", true, ""};
  Rng rng(opts.seed, 104);
  const Instance inst = random_instance(rng, 4, 2, kTinyShape, 0.8);
  std::size_t bad = 0, compared = 0;
  double worst = 0.0;
  for (double lambda : {0.0, 0.5}) {
    for (EntropyMode mode : {EntropyMode::kSymmetric, EntropyMode::kPaperLiteral}) {
      RewardConfig cfg;
      cfg.entropy_weight = lambda;
      cfg.entropy_mode = mode;
      GradEstimate exact = exact_gradient(inst.params, inst.episode(), cfg);
      scale(opts.gradient_scale, exact.grad);
      const std::vector<double> an = flatten(exact.grad);
      const std::vector<double> fd = finite_difference_gradient(
          inst.params,
          [&](const ModelParams& p) { return expected_reward(p, inst.episode(), cfg); });
      for (std::size_t i = 0; i < an.size(); ++i) {
        const double denom = std::max(std::abs(an[i]), std::abs(fd[i]));
        if (denom > 1e-7) worst = std::max(worst, std::abs(an[i] - fd[i]) / denom);
        if (!close(an[i], fd[i], 1e-4, 1e-7)) ++bad;
        ++compared;
      }
    }
  }
  r.passed = bad == 0;
  r.detail = std::to_string(compared) + " comparisons over 4 reward settings, " +
             std::to_string(bad) + " mismatches, max rel err = " + format_double(worst);
  return r;
}

CheckResult check_unbiasedness(const CheckOptions& opts) {
  CheckResult r{"estimator unbiasedness", true, ""};
  Rng rng(opts.seed, 105);
  const Instance inst = random_instance(rng, 5, 2, kTinyShape, 0.8);
  RewardConfig reward;
  reward.entropy_weight = 0.25;
  const std::vector<double> exact =
      flatten(exact_gradient(inst.params, inst.episode(), reward).grad);
  const std::vector<std::size_t> comps =
      pick_components(exact, baseline_mask(inst.params), opts.unbiased_components, rng);
  std::ostringstream detail;
  detail << comps.size() << " components;";
  std::size_t config_index = 0;
  for (std::size_t k : opts.unbiased_k) {
    for (BaselineKind kind :
         {BaselineKind::kNone, BaselineKind::kParametric, BaselineKind::kLeaveOneOut}) {
      if (kind == BaselineKind::kLeaveOneOut && k < 2) continue;
      EstimatorConfig cfg;
      cfg.num_samples = k;
      cfg.baseline = kind;
      cfg.reward = reward;
      cfg.parallel = false;
      const MonteCarloSummary s = estimator_moments(inst.params, inst.episode(), cfg,
                                                    opts.unbiased_draws,
                                                    Rng(opts.seed, 1050 + config_index++));
      std::size_t bad = 0;
      double worst_z = 0.0;
      for (std::size_t i : comps) {
        const double diff = std::abs(opts.gradient_scale * s.mean[i] - exact[i]);
        const double tol = 3.0 * s.std_error[i] + 1e-12;
        if (diff > tol) ++bad;
        if (s.std_error[i] > 0.0) worst_z = std::max(worst_z, diff / s.std_error[i]);
      }
      if (bad > 0) r.passed = false;
      detail << " K=" << k << "/" << to_string(kind) << ": " << bad
             << " out, max z " << format_double(worst_z) << ";";
    }
  }
  if (comps.size() < std::min<std::size_t>(opts.unbiased_components, 1)) r.passed = false;
  r.detail = detail.str();
  return r;
}

CheckResult check_baseline_neutrality(const CheckOptions& opts) {
  CheckResult r{"baseline neutrality", true, ""};
  Rng rng(opts.seed, 106);
  const Instance inst = random_instance(rng, 5, 2, kTinyShape, 0.8);
  RewardConfig reward;
  reward.entropy_weight = 0.25;
  const std::vector<double> exact =
      flatten(exact_gradient(inst.params, inst.episode(), reward).grad);
  const std::vector<std::size_t> comps =
      pick_components(exact, baseline_mask(inst.params), opts.unbiased_components, rng);
  auto run = [&](BaselineKind kind, std::uint64_t stream) {
    EstimatorConfig cfg;
    cfg.num_samples = 4;
    cfg.baseline = kind;
    cfg.reward = reward;
    cfg.parallel = false;
    return estimator_moments(inst.params, inst.episode(), cfg, opts.neutrality_draws,
                             Rng(opts.seed, stream));
  };
  const MonteCarloSummary none = run(BaselineKind::kNone, 1060);
  std::ostringstream detail;
  for (auto [kind, stream] : {std::pair{BaselineKind::kParametric, 1061},
                              std::pair{BaselineKind::kLeaveOneOut, 1062}}) {
    const MonteCarloSummary other = run(kind, static_cast<std::uint64_t>(stream));
    std::size_t bad = 0;
    for (std::size_t i : comps) {
      const double se = std::hypot(none.std_error[i], other.std_error[i]);
      if (std::abs(none.mean[i] - other.mean[i]) > 3.0 * se + 1e-12) ++bad;
    }
    if (bad > 0) r.passed = false;
    detail << to_string(kind) << " vs none: " << bad << "/" << comps.size() << " differ; ";
  }
  r.detail = detail.str();
  return r;
}

CheckResult check_variance_reduction(const CheckOptions& opts) {
  CheckResult r{"leave-one-out variance reduction", true, ""};
  Rng rng(opts.seed, 107);
  std::size_t wins = 0;
  std::ostringstream detail;
  for (std::size_t n = 0; n < opts.variance_instances; ++n) {
    const std::size_t t1 = 4 + rng.uniform_int(2);
    const std::size_t t2 = 1 + rng.uniform_int(t1 - 1);
    const Instance inst = random_instance(rng, t1, t2, kTinyShape, 0.8);
    EstimatorConfig cfg;
    cfg.num_samples = opts.variance_k;
    cfg.parallel = false;
    cfg.baseline = BaselineKind::kNone;
    const double v_none =
        estimator_moments(inst.params, inst.episode(), cfg, opts.variance_draws,
                          Rng(opts.seed, 2000 + 2 * n))
            .total_variance;
    cfg.baseline = BaselineKind::kLeaveOneOut;
    const double v_loo =
        estimator_moments(inst.params, inst.episode(), cfg, opts.variance_draws,
                          Rng(opts.seed, 2001 + 2 * n))
            .total_variance;
    if (v_loo < v_none) ++wins;
    detail << format_double(v_loo / v_none) << (n + 1 < opts.variance_instances ? " " : "");
  }
  const std::size_t needed = (opts.variance_instances * 8 + 9) / 10;
  r.passed = wins >= needed;
  r.detail = std::to_string(wins) + "/" + std::to_string(opts.variance_instances) +
             " instances lower (need " + std::to_string(needed) +
             "); variance ratios loo/none: " + detail.str();
  return r;
}

CheckResult check_schedule_anchors() {
  CheckResult r{"schedule anchors", true, ""};
  const Schedules s;
  const bool ok = schedule_value(s.entropy, 10000) == 1.0 &&
                  schedule_value(s.entropy, 200000) == 0.1 &&
                  schedule_value(s.entropy, 300000) == 0.1 &&
                  schedule_value(s.noise_std, 10000) == 0.0 &&
                  schedule_value(s.noise_std, 200000) == 0.15 &&
                  std::abs(schedule_value(s.entropy, 105000) - 0.55) < 1e-12 &&
                  s.l2_weight == 0.001 && s.lr == 7e-5;
  r.passed = ok;
  r.detail = "entropy 1.0@10k, 0.1@200k/300k; noise 0@10k, 0.15@200k";
  return r;
}

CheckResult check_levenshtein_oracle(const CheckOptions& opts) {
  CheckResult r{"levenshtein vs brute-force edit scripts", true, ""};
  Rng rng(opts.seed, 108);
  std::size_t bad = 0;
  for (std::size_t n = 0; n < opts.edit_pairs; ++n) {
    std::vector<int> a(rng.uniform_int(7)), b(rng.uniform_int(7));
    for (int& v : a) v = static_cast<int>(rng.uniform_int(3));
    for (int& v : b) v = static_cast<int>(rng.uniform_int(3));
    const EditCounts e = levenshtein(a, b);
    if (e.distance != brute_force_edit_distance(a, b) ||
        e.substitutions + e.insertions + e.deletions != e.distance) {
      ++bad;
    }
  }
  r.passed = bad == 0;
  r.detail = std::to_string(opts.edit_pairs) + " random pairs, " + std::to_string(bad) +
             " disagreements";
  return r;
}

std::vector<CheckResult> run_check_battery(const CheckOptions& opts) {
  return {check_enumeration_normalization(opts), check_trajectory_law(opts),
          check_supervised_gradient(opts),       check_expected_reward_gradient(opts),
          check_unbiasedness(opts),              check_baseline_neutrality(opts),
          check_variance_reduction(opts),        check_schedule_anchors(),
          check_levenshtein_oracle(opts)};
}

}  // namespace nat

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

#include "nat/estimator.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "nat/error.hpp"
#include "parallel.hpp"

namespace nat {
namespace {

double log_prob_taken(const Trajectory& traj, std::size_t i) {
  const double z = traj.emit_logits[i];
  return traj.emissions[i] ? log_sigmoid(z) : log_sigmoid(-z);
}

// Checks the ascent gradient and reports the first offending block.
void check_finite(const ModelParams& grad, const char* where) {
  for (const auto& b : blocks(grad)) {
    for (std::size_t j = 0; j < b.values.size(); ++j) {
      if (!std::isfinite(b.values[j])) {
        throw NumericError(std::string(where) + ": non-finite gradient in block " + b.name +
                           " at index " + std::to_string(j));
      }
    }
  }
}

}  // namespace

BaselineKind parse_baseline_kind(const std::string& s) {
  if (s == "none") return BaselineKind::kNone;
  if (s == "parametric") return BaselineKind::kParametric;
  if (s == "loo" || s == "leave-one-out") return BaselineKind::kLeaveOneOut;
  throw InvalidArgument("unknown baseline kind '" + s + "'");
}

EntropyMode parse_entropy_mode(const std::string& s) {
  if (s == "symmetric") return EntropyMode::kSymmetric;
  if (s == "paper-literal" || s == "literal") return EntropyMode::kPaperLiteral;
  throw InvalidArgument("unknown entropy mode '" + s + "'");
}

std::string to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kNone: return "none";
    case BaselineKind::kParametric: return "parametric";
    case BaselineKind::kLeaveOneOut: return "leave-one-out";
  }
  return "?";
}

std::string to_string(EntropyMode mode) {
  return mode == EntropyMode::kSymmetric ? "symmetric" : "paper-literal";
}

void validate(const EstimatorConfig& cfg) {
  if (cfg.num_samples < 1) throw InvalidArgument("estimator needs K >= 1");
  if (cfg.baseline == BaselineKind::kLeaveOneOut && cfg.num_samples < 2) {
    throw InvalidArgument("leave-one-out baseline needs K >= 2");
  }
  if (!(cfg.reward.entropy_weight >= 0.0)) {
    throw InvalidArgument("entropy weight must be non-negative");
  }
  if (cfg.reward.kl_target_rate) {
    const double r = *cfg.reward.kl_target_rate;
    if (!(r > 0.0 && r < 1.0)) throw InvalidArgument("KL target rate must lie in (0, 1)");
  }
}

RewardTrace step_rewards(const Trajectory& traj, double lambda, EntropyMode mode) {
  RewardTrace out;
  out.per_step.assign(traj.length(), 0.0);
  for (std::size_t i = 0; i < traj.length(); ++i) {
    double r = traj.emissions[i] ? traj.token_logprobs[i] : 0.0;
    if (lambda != 0.0 && traj.kinds[i] == StepKind::kFree) {
      const double z = traj.emit_logits[i];
      if (mode == EntropyMode::kSymmetric) {
        r -= lambda * log_prob_taken(traj, i);
      } else if (traj.emissions[i]) {
        r -= lambda * log_sigmoid(z);
      } else {
        r += lambda * log_sigmoid(-z);
      }
    }
    out.per_step[i] = r;
    out.total += r;
  }
  return out;
}

RewardTrace kl_rate_penalty(const Trajectory& traj, double target_rate, double weight) {
  if (!(target_rate > 0.0 && target_rate < 1.0)) {
    throw InvalidArgument("KL target rate must lie in (0, 1)");
  }
  RewardTrace out;
  out.per_step.assign(traj.length(), 0.0);
  if (weight == 0.0) return out;
  const double r = target_rate;
  for (std::size_t i = 0; i < traj.length(); ++i) {
    if (traj.kinds[i] != StepKind::kFree) continue;
    const double z = traj.emit_logits[i];
    const double kl = r * (std::log(r) - log_sigmoid(z)) +
                      (1.0 - r) * (std::log1p(-r) - log_sigmoid(-z));
    out.per_step[i] = -weight * kl;
    out.total += out.per_step[i];
  }
  return out;
}

RewardTrace trajectory_rewards(const Trajectory& traj, const RewardConfig& cfg) {
  RewardTrace trace = step_rewards(traj, cfg.entropy_weight, cfg.entropy_mode);
  if (cfg.kl_target_rate && cfg.kl_weight != 0.0) {
    const RewardTrace kl = kl_rate_penalty(traj, *cfg.kl_target_rate, cfg.kl_weight);
    trace.total = 0.0;
    for (std::size_t i = 0; i < trace.per_step.size(); ++i) {
      trace.per_step[i] += kl.per_step[i];
      trace.total += trace.per_step[i];
    }
  }
  return trace;
}

Vector reward_to_go(const RewardTrace& trace) {
  Vector out(trace.per_step.size(), 0.0);
  double acc = 0.0;
  for (std::size_t j = out.size(); j-- > 0;) {
    acc += trace.per_step[j];
    out[j] = acc;
  }
  return out;
}

Vector parametric_baseline(std::span<const Vector> h_tops, const ModelParams& params) {
  Vector out;
  out.reserve(h_tops.size());
  for (const auto& h : h_tops) {
    out.push_back(dot(params.baseline_proj.row(0), h) + params.baseline_bias);
  }
  return out;
}

void accumulate_baseline_gradient(const Trajectory& traj, std::span<const double> omega,
                                  std::span<const double> returns, ModelParams& grads) {
  auto w = grads.baseline_proj.row(0);
  for (std::size_t j = 0; j < traj.length(); ++j) {
    if (traj.kinds[j] != StepKind::kFree) continue;
    const double err = omega[j] - returns[j];
    const Vector& h = traj.h_tops[j];
    for (std::size_t c = 0; c < h.size(); ++c) w[c] -= err * h[c];
    grads.baseline_bias -= err;
  }
}

Matrix loo_baseline(std::span<const RewardTrace> traces) {
  const std::size_t k_count = traces.size();
  if (k_count < 2) throw InvalidArgument("leave-one-out baseline needs K >= 2");
  const std::size_t t = traces.front().per_step.size();
  for (const auto& tr : traces) {
    if (tr.per_step.size() != t) {
      throw InvalidArgument("leave-one-out baseline: traces have different lengths");
    }
  }
  // future[k][j] = sum_{i >= j} R^k_i, past[k][j] = sum_{i < j} R^k_i
  std::vector<Vector> future(k_count), past(k_count, Vector(t, 0.0));
  for (std::size_t k = 0; k < k_count; ++k) {
    future[k] = reward_to_go(traces[k]);
    for (std::size_t j = 1; j < t; ++j) past[k][j] = past[k][j - 1] + traces[k].per_step[j - 1];
  }
  const double inv = 1.0 / static_cast<double>(k_count - 1);
  Matrix omega(k_count, t);
  for (std::size_t k = 0; k < k_count; ++k) {
    for (std::size_t j = 0; j < t; ++j) {
      double others_future = 0.0, residual = 0.0;
      for (std::size_t other = 0; other < k_count; ++other) {
        if (other == k) continue;
        others_future += future[other][j];
        residual += past[other][j] - past[k][j];
      }
      omega(k, j) = inv * others_future + inv * residual;
    }
  }
  return omega;
}

std::vector<StepSignal> pathwise_signals(const Trajectory& traj, const RewardConfig& cfg) {
  std::vector<StepSignal> signals(traj.length());
  const double lambda = cfg.entropy_weight;
  const bool kl = cfg.kl_target_rate && cfg.kl_weight != 0.0;
  for (std::size_t i = 0; i < traj.length(); ++i) {
    StepSignal& s = signals[i];
    if (traj.emissions[i]) {
      // d log softmax(u)[y] / du = onehot(y) - d
      s.token_logits = traj.token_probs[i];
      for (double& v : s.token_logits) v = -v;
      s.token_logits[static_cast<std::size_t>(traj.emitted_tokens[i])] += 1.0;
    }
    if (traj.kinds[i] != StepKind::kFree) continue;
    const double b = traj.emit_probs[i];
    const double bit = traj.emissions[i] ? 1.0 : 0.0;
    if (lambda != 0.0) {
      if (cfg.entropy_mode == EntropyMode::kSymmetric) {
        s.emit_logit -= lambda * (bit - b);
      } else {
        s.emit_logit -= lambda * (bit * (1.0 - b) + (1.0 - bit) * b);
      }
    }
    if (kl) s.emit_logit -= cfg.kl_weight * (b - *cfg.kl_target_rate);
  }
  return signals;
}

GradEstimate policy_gradient(const ModelParams& params, const EpisodeInput& episode,
                             const EstimatorConfig& cfg, const Rng& rng) {
  validate(cfg);
  validate_episode(params, episode);
  const std::size_t k_count = cfg.num_samples;
  const std::size_t t1 = episode.features.size();

  std::vector<Trajectory> trajs(k_count);
  std::vector<RewardTrace> rewards(k_count);
  detail::parallel_for(k_count, cfg.parallel, [&](std::size_t k) {
    Rng stream = rng.substream(k);
    trajs[k] = sample_trajectory(params, episode, stream);
    rewards[k] = trajectory_rewards(trajs[k], cfg.reward);
  });

  Matrix omega(k_count, t1);
  if (cfg.baseline == BaselineKind::kLeaveOneOut) {
    omega = loo_baseline(rewards);
  } else if (cfg.baseline == BaselineKind::kParametric) {
    for (std::size_t k = 0; k < k_count; ++k) {
      const Vector row = parametric_baseline(trajs[k].h_tops, params);
      std::copy(row.begin(), row.end(), omega.row(k).begin());
    }
  }

  std::vector<ModelParams> grads(k_count);
  Matrix score(k_count, t1);
  detail::parallel_for(k_count, cfg.parallel, [&](std::size_t k) {
    const Trajectory& traj = trajs[k];
    const Vector future = reward_to_go(rewards[k]);
    std::vector<StepSignal> signals = pathwise_signals(traj, cfg.reward);
    for (std::size_t j = 0; j < t1; ++j) {
      if (traj.kinds[j] != StepKind::kFree) continue;
      const double bit = traj.emissions[j] ? 1.0 : 0.0;
      // d log p(b_j) / d logit = b_j - sigmoid(logit)
      const double s = (future[j] - omega(k, j)) * (bit - traj.emit_probs[j]);
      score(k, j) = s;
      signals[j].emit_logit += s;
    }
    grads[k] = backward(params, traj.tape, signals);
    if (cfg.baseline == BaselineKind::kParametric) {
      accumulate_baseline_gradient(traj, omega.row(k), future, grads[k]);
    }
  });

  GradEstimate est;
  est.num_samples = k_count;
  est.grad = zeros_like(params);
  // Running mean in sample order: identical samples give their common value exactly.
  auto mean_blocks = blocks(est.grad);
  for (std::size_t k = 0; k < k_count; ++k) {
    const double w = 1.0 / static_cast<double>(k + 1);
    const auto sample_blocks = blocks(std::as_const(grads[k]));
    for (std::size_t b = 0; b < mean_blocks.size(); ++b) {
      auto m = mean_blocks[b].values;
      const auto g = sample_blocks[b].values;
      for (std::size_t i = 0; i < m.size(); ++i) m[i] += (g[i] - m[i]) * w;
    }
    est.mean_reward += (rewards[k].total - est.mean_reward) * w;
  }
  const double inv_k = 1.0 / static_cast<double>(k_count);

  est.score_variance.assign(t1, 0.0);
  if (k_count > 1) {
    for (std::size_t j = 0; j < t1; ++j) {
      double mean = 0.0;
      for (std::size_t k = 0; k < k_count; ++k) mean += score(k, j);
      mean *= inv_k;
      double var = 0.0;
      for (std::size_t k = 0; k < k_count; ++k) {
        const double d = score(k, j) - mean;
        var += d * d;
      }
      est.score_variance[j] = var / static_cast<double>(k_count - 1);
      est.mean_score_variance += est.score_variance[j];
    }
    est.mean_score_variance /= static_cast<double>(t1);
  }
  check_finite(est.grad, "policy_gradient");
  return est;
}

GradEstimate exact_gradient(const ModelParams& params, const EpisodeInput& episode,
                            const RewardConfig& cfg) {
  const std::vector<WeightedTrajectory> all = enumerate_trajectories(params, episode);
  GradEstimate est;
  est.grad = zeros_like(params);
  est.num_samples = all.size();
  est.score_variance.assign(episode.features.size(), 0.0);
  for (const auto& w : all) {
    const Trajectory& traj = w.trajectory;
    const RewardTrace trace = trajectory_rewards(traj, cfg);
    std::vector<StepSignal> signals = pathwise_signals(traj, cfg);
    for (std::size_t j = 0; j < traj.length(); ++j) {
      if (traj.kinds[j] != StepKind::kFree) continue;
      const double bit = traj.emissions[j] ? 1.0 : 0.0;
      signals[j].emit_logit += trace.total * (bit - traj.emit_probs[j]);
    }
    const ModelParams g = backward(params, traj.tape, signals);
    axpy(w.probability, g, est.grad);
    est.mean_reward += w.probability * trace.total;
  }
  check_finite(est.grad, "exact_gradient");
  return est;
}

}  // namespace nat

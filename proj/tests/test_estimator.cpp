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

#include <doctest.h>

#include <cmath>

#include "nat/error.hpp"
#include "nat/estimator.hpp"
#include "oracles.hpp"

namespace nat {
namespace {

struct Fixture {
  ModelParams params;
  std::vector<Vector> frames;
  std::vector<int> targets;
  EpisodeInput episode() const { return {frames, targets}; }
};

Fixture make_fixture(std::size_t t1, std::size_t t2, std::uint64_t seed, double scale = 0.8) {
  Rng rng(seed, 0);
  Fixture f;
  f.params = init_params({2, 4, 2, 4, 1}, rng);
  for (auto& b : blocks(f.params)) {
    for (double& v : b.values) v = scale * (2.0 * rng.uniform() - 1.0);
  }
  f.frames.assign(t1, Vector(2));
  for (auto& fr : f.frames) {
    for (double& v : fr) v = sample_gaussian(0.0, 1.0, rng);
  }
  for (std::size_t j = 0; j + 1 < t2; ++j) f.targets.push_back(1 + static_cast<int>(rng.uniform_int(3)));
  f.targets.push_back(kEos);
  return f;
}

// Makes every top hidden state the same positive vector, independent of input.
Vector constant_hidden(ModelParams& p) {
  for (auto& layer : p.layers) {
    std::fill(layer.weights.values().begin(), layer.weights.values().end(), 0.0);
    std::fill(layer.bias.begin(), layer.bias.end(), 3.0);
  }
  const double h = oracle::sigmoid(3.0) * std::tanh(oracle::sigmoid(3.0) * std::tanh(3.0));
  return Vector(p.hidden_size(), h);
}

// Reward recomputed from the trajectory's recorded probabilities.
double direct_total_reward(const Trajectory& t, double lambda, EntropyMode mode) {
  double total = 0.0;
  for (std::size_t i = 0; i < t.length(); ++i) {
    if (t.emissions[i]) total += std::log(t.token_probs[i][static_cast<std::size_t>(t.emitted_tokens[i])]);
    if (t.kinds[i] != StepKind::kFree) continue;
    const double b = t.emit_probs[i];
    if (mode == EntropyMode::kSymmetric) {
      total -= lambda * std::log(t.emissions[i] ? b : 1.0 - b);
    } else {
      total += t.emissions[i] ? -lambda * std::log(b) : lambda * std::log(1.0 - b);
    }
  }
  return total;
}

ModelParams supervised_gradient(const ModelParams& p, const Trajectory& t) {
  std::vector<StepSignal> signals(t.length());
  for (std::size_t i = 0; i < t.length(); ++i) {
    if (!t.emissions[i]) continue;
    const Vector d = output_dist(t.h_tops[i], p);
    signals[i].token_logits.resize(d.size());
    for (std::size_t v = 0; v < d.size(); ++v) {
      signals[i].token_logits[v] = (static_cast<int>(v) == t.emitted_tokens[i] ? 1.0 : 0.0) - d[v];
    }
  }
  return backward(p, t.tape, signals);
}

TEST_CASE("parsing and validation") {
  CHECK(parse_baseline_kind("none") == BaselineKind::kNone);
  CHECK(parse_baseline_kind("parametric") == BaselineKind::kParametric);
  CHECK(parse_baseline_kind("leave-one-out") == BaselineKind::kLeaveOneOut);
  CHECK(parse_baseline_kind("loo") == BaselineKind::kLeaveOneOut);
  CHECK(parse_entropy_mode("symmetric") == EntropyMode::kSymmetric);
  CHECK(parse_entropy_mode("paper-literal") == EntropyMode::kPaperLiteral);
  CHECK_THROWS_AS(parse_baseline_kind("mean"), InvalidArgument);
  CHECK(parse_baseline_kind(to_string(BaselineKind::kParametric)) == BaselineKind::kParametric);

  EstimatorConfig cfg;
  cfg.num_samples = 1;
  CHECK_THROWS_AS(validate(cfg), InvalidArgument);
  cfg.baseline = BaselineKind::kNone;
  CHECK_NOTHROW(validate(cfg));
  cfg.num_samples = 0;
  CHECK_THROWS_AS(validate(cfg), InvalidArgument);
  cfg.num_samples = 4;
  cfg.reward.entropy_weight = -0.1;
  CHECK_THROWS_AS(validate(cfg), InvalidArgument);
}

TEST_CASE("step rewards on a uniform output layer") {
  Fixture f = make_fixture(3, 1, 1);
  std::fill(f.params.emit_proj.values().begin(), f.params.emit_proj.values().end(), 0.0);
  f.params.output_proj = Matrix(4, 4);
  const Trajectory t = replay_trajectory(f.params, f.episode(), std::vector<int>{0, 1, 0});

  const RewardTrace plain = step_rewards(t, 0.0, EntropyMode::kSymmetric);
  CHECK(plain.per_step[0] == 0.0);
  CHECK(plain.per_step[1] == doctest::Approx(std::log(0.25)).epsilon(1e-15));
  CHECK(plain.per_step[2] == 0.0);
  CHECK(plain.total == plain.per_step[1]);

  const double lambda = 0.7;
  const RewardTrace sym = step_rewards(t, lambda, EntropyMode::kSymmetric);
  CHECK(sym.per_step[0] == doctest::Approx(0.6931471805599453 * lambda).epsilon(1e-14));
  CHECK(sym.per_step[1] == doctest::Approx(std::log(0.25) - lambda * std::log(0.5)).epsilon(1e-14));
  CHECK(sym.per_step[2] == 0.0);  // forced silent
}

TEST_CASE("literal entropy mode on a confident emission") {
  Fixture f = make_fixture(3, 1, 2);
  const Vector h = constant_hidden(f.params);
  f.params.emit_proj = Matrix(1, 4);
  f.params.emit_proj(0, 0) = std::log(9.0) / h[0];
  const Trajectory t = replay_trajectory(f.params, f.episode(), std::vector<int>{1, 0, 0});
  REQUIRE(t.emit_probs[0] == doctest::Approx(0.9).epsilon(1e-12));
  const double lambda = 2.0;
  const RewardTrace lit = step_rewards(t, lambda, EntropyMode::kPaperLiteral);
  const RewardTrace base = step_rewards(t, 0.0, EntropyMode::kPaperLiteral);
  CHECK(lit.per_step[0] - base.per_step[0] == doctest::Approx(0.10536051565782628 * lambda).epsilon(1e-9));
  CHECK(lit.per_step[1] == 0.0);
}

TEST_CASE("rewards agree with a direct recomputation") {
  for (std::uint64_t seed = 3; seed < 8; ++seed) {
    const Fixture f = make_fixture(6, 3, seed, 1.2);
    Rng rng(seed, 1);
    const Trajectory t = sample_trajectory(f.params, f.episode(), rng);
    for (EntropyMode mode : {EntropyMode::kSymmetric, EntropyMode::kPaperLiteral}) {
      const RewardTrace r = step_rewards(t, 0.4, mode);
      double sum = 0.0;
      for (double v : r.per_step) sum += v;
      CHECK(r.total == doctest::Approx(sum).epsilon(1e-14));
      CHECK(r.total == doctest::Approx(direct_total_reward(t, 0.4, mode)).epsilon(1e-12));
    }
  }
}

TEST_CASE("KL rate penalty") {
  Fixture f = make_fixture(4, 1, 9);
  std::fill(f.params.emit_proj.values().begin(), f.params.emit_proj.values().end(), 0.0);
  const Trajectory t = replay_trajectory(f.params, f.episode(), std::vector<int>{0, 0, 1, 0});
  for (double v : kl_rate_penalty(t, 0.5, 3.0).per_step) CHECK(v == doctest::Approx(0.0).epsilon(1e-15));
  const double kl = 0.3 * std::log(0.3 / 0.5) + 0.7 * std::log(0.7 / 0.5);
  CHECK(kl == doctest::Approx(0.0823).epsilon(1e-3));
  const RewardTrace pen = kl_rate_penalty(t, 0.3, 2.0);
  for (std::size_t i = 0; i < 3; ++i) CHECK(pen.per_step[i] == doctest::Approx(-2.0 * kl).epsilon(1e-12));
  CHECK(pen.per_step[3] == 0.0);  // forced silent
  for (double v : kl_rate_penalty(t, 0.3, 0.0).per_step) CHECK(v == 0.0);
  CHECK_THROWS_AS(kl_rate_penalty(t, 1.0, 1.0), InvalidArgument);
}

TEST_CASE("parametric baseline") {
  Fixture f = make_fixture(5, 2, 10);
  f.params.baseline_proj = Matrix(1, 4);
  f.params.baseline_bias = 2.0;
  Rng rng(10, 1);
  const Trajectory t = sample_trajectory(f.params, f.episode(), rng);
  for (double v : parametric_baseline(t.h_tops, f.params)) CHECK(v == 2.0);
}

TEST_CASE("parametric baseline fitting reduces the squared residual") {
  Fixture f = make_fixture(6, 2, 11, 1.0);
  f.params.baseline_proj = Matrix(1, 4);
  f.params.baseline_bias = 0.0;
  std::vector<Trajectory> trajs;
  std::vector<Vector> returns;
  for (std::uint64_t s = 0; s < 8; ++s) {
    Rng rng(11, s);
    trajs.push_back(sample_trajectory(f.params, f.episode(), rng));
    returns.push_back(reward_to_go(step_rewards(trajs.back(), 0.0, EntropyMode::kSymmetric)));
  }
  auto mse = [&] {
    double total = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < trajs.size(); ++k) {
      const Vector omega = parametric_baseline(trajs[k].h_tops, f.params);
      for (std::size_t j = 0; j < omega.size(); ++j) {
        if (trajs[k].kinds[j] != StepKind::kFree) continue;
        total += (omega[j] - returns[k][j]) * (omega[j] - returns[k][j]);
        ++n;
      }
    }
    return total / static_cast<double>(n);
  };
  double prev = mse();
  for (int step = 0; step < 100; ++step) {
    ModelParams g = zeros_like(f.params);
    for (std::size_t k = 0; k < trajs.size(); ++k) {
      accumulate_baseline_gradient(trajs[k], parametric_baseline(trajs[k].h_tops, f.params),
                                   returns[k], g);
    }
    axpy(0.005, g, f.params);
    const double now = mse();
    CHECK(now < prev);
    CHECK(std::isfinite(now));
    prev = now;
  }
}

TEST_CASE("leave-one-out baseline") {
  RewardTrace a{{0.5, -1.0, 2.0}, 1.5};
  const Matrix same = loo_baseline(std::vector<RewardTrace>{a, a});
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(same(k, 0) == doctest::Approx(1.5));
    CHECK(same(k, 1) == doctest::Approx(1.0));
    CHECK(same(k, 2) == doctest::Approx(2.0));
  }

  Rng rng(12, 0);
  std::vector<RewardTrace> traces(3);
  std::vector<std::vector<double>> raw(3);
  for (std::size_t k = 0; k < 3; ++k) {
    for (int j = 0; j < 5; ++j) {
      const double r = sample_gaussian(0.0, 1.0, rng);
      traces[k].per_step.push_back(r);
      traces[k].total += r;
      raw[k].push_back(r);
    }
  }
  const Matrix got = loo_baseline(traces);
  const auto want = oracle::loo_direct(raw);
  for (std::size_t k = 0; k < 3; ++k) {
    const double others = (traces[(k + 1) % 3].total + traces[(k + 2) % 3].total) / 2.0;
    CHECK(got(k, 0) == doctest::Approx(others).epsilon(1e-14));
    for (std::size_t j = 0; j < 5; ++j) CHECK(got(k, j) == doctest::Approx(want[k][j]).epsilon(1e-13));
  }
  CHECK_THROWS_AS(loo_baseline(std::vector<RewardTrace>{a}), InvalidArgument);
}

TEST_CASE("fully forced episodes reduce to the supervised gradient") {
  const Fixture f = make_fixture(4, 4, 13, 0.7);
  const Trajectory t = replay_trajectory(f.params, f.episode(), std::vector<int>(4, 1));
  const ModelParams want = supervised_gradient(f.params, t);
  for (std::size_t k : {1u, 2u, 16u}) {
    for (BaselineKind kind : {BaselineKind::kNone, BaselineKind::kParametric, BaselineKind::kLeaveOneOut}) {
      if (kind == BaselineKind::kLeaveOneOut && k < 2) continue;
      EstimatorConfig cfg;
      cfg.num_samples = k;
      cfg.baseline = kind;
      cfg.reward.entropy_weight = 0.5;
      const GradEstimate est = policy_gradient(f.params, f.episode(), cfg, Rng(13, k));
      ModelParams got = est.grad;
      got.baseline_proj = want.baseline_proj;
      got.baseline_bias = want.baseline_bias;
      CHECK(got == want);
      for (double v : est.grad.emit_proj.values()) CHECK(v == 0.0);
    }
  }
  RewardConfig rc;
  rc.entropy_weight = 0.5;
  CHECK(exact_gradient(f.params, f.episode(), rc).grad == want);
}

TEST_CASE("forced steps carry no emission-logit signal") {
  const Fixture f = make_fixture(6, 3, 14, 1.0);
  Rng rng(14, 1);
  const Trajectory t = sample_trajectory(f.params, f.episode(), rng);
  RewardConfig rc;
  rc.entropy_weight = 0.8;
  rc.kl_target_rate = 0.4;
  rc.kl_weight = 0.5;
  const auto signals = pathwise_signals(t, rc);
  for (std::size_t i = 0; i < t.length(); ++i) {
    if (t.kinds[i] != StepKind::kFree) CHECK(signals[i].emit_logit == 0.0);
  }
}

TEST_CASE("exact expected reward matches an independent enumeration pass") {
  const Fixture f = make_fixture(5, 2, 15, 1.0);
  for (EntropyMode mode : {EntropyMode::kSymmetric, EntropyMode::kPaperLiteral}) {
    RewardConfig rc;
    rc.entropy_weight = 0.3;
    rc.entropy_mode = mode;
    double want = 0.0;
    for (const auto& w : enumerate_trajectories(f.params, f.episode())) {
      want += w.probability * direct_total_reward(w.trajectory, 0.3, mode);
    }
    CHECK(exact_gradient(f.params, f.episode(), rc).mean_reward == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("exact gradient matches finite differences of the enumerated reward") {
  const Fixture f = make_fixture(4, 2, 16, 0.8);
  RewardConfig rc;
  rc.entropy_weight = 0.5;
  rc.kl_target_rate = 0.3;
  rc.kl_weight = 0.2;
  auto expected = [&](const ModelParams& p) {
    double total = 0.0;
    for (const auto& w : enumerate_trajectories(p, f.episode())) {
      total += w.probability * trajectory_rewards(w.trajectory, rc).total;
    }
    return total;
  };
  const std::vector<double> fd = oracle::central_differences(f.params, expected);
  const GradEstimate exact = exact_gradient(f.params, f.episode(), rc);
  const std::vector<double> got = flatten(exact.grad);
  std::size_t offset = 0;
  for (const auto& block : blocks(exact.grad)) {
    CAPTURE(block.name);
    if (!block.is_baseline) {
      for (std::size_t i = 0; i < block.values.size(); ++i) {
        CHECK(oracle::relative_match(got[offset + i], fd[offset + i], 1e-4, 1e-7));
      }
    }
    offset += block.values.size();
  }
}

TEST_CASE("parallel and serial estimates are identical") {
  const Fixture f = make_fixture(8, 3, 17, 1.0);
  EstimatorConfig cfg;
  cfg.num_samples = 16;
  cfg.reward.entropy_weight = 0.2;
  cfg.parallel = false;
  const GradEstimate serial = policy_gradient(f.params, f.episode(), cfg, Rng(17, 3));
  cfg.parallel = true;
  const GradEstimate parallel = policy_gradient(f.params, f.episode(), cfg, Rng(17, 3));
  CHECK(serial.grad == parallel.grad);
  CHECK(serial.mean_reward == parallel.mean_reward);
  CHECK(serial.score_variance == parallel.score_variance);
  CHECK(serial.num_samples == 16);
}

TEST_CASE("small Monte Carlo run centres on the exact gradient") {
  const Fixture f = make_fixture(4, 2, 18, 0.8);
  EstimatorConfig cfg;
  cfg.num_samples = 4;
  cfg.parallel = false;
  const std::vector<double> exact = flatten(exact_gradient(f.params, f.episode(), cfg.reward).grad);
  constexpr std::size_t kDraws = 4000;
  std::vector<double> mean(exact.size(), 0.0), sq(exact.size(), 0.0);
  for (std::size_t d = 0; d < kDraws; ++d) {
    const std::vector<double> g = flatten(policy_gradient(f.params, f.episode(), cfg, Rng(18, d)).grad);
    for (std::size_t i = 0; i < g.size(); ++i) {
      mean[i] += g[i] / kDraws;
      sq[i] += g[i] * g[i] / kDraws;
    }
  }
  std::size_t outside = 0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    const double se = std::sqrt(std::max(sq[i] - mean[i] * mean[i], 0.0) / kDraws);
    if (std::abs(mean[i] - exact[i]) > 4.0 * se + 1e-12) ++outside;
  }
  CHECK(outside <= exact.size() / 100);
}

}  // namespace
}  // namespace nat

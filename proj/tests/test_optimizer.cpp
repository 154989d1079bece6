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
#include "nat/optimizer.hpp"

namespace nat {
namespace {

ModelParams random_params(std::uint64_t seed, double scale) {
  Rng rng(seed, 0);
  ModelParams p = init_params({3, 4, 2, 5, 2}, rng);
  for (auto& b : blocks(p)) {
    for (double& v : b.values) v = scale * (2.0 * rng.uniform() - 1.0);
  }
  return p;
}

double squared_norm(const ModelParams& p) {
  double s = 0.0;
  for (double v : flatten(p)) s += v * v;
  return s;
}

TEST_CASE("zero gradient at the origin leaves parameters unchanged") {
  ModelParams p = random_params(1, 1.0);
  for (auto& b : blocks(p)) std::fill(b.values.begin(), b.values.end(), 0.0);
  const ModelParams before = p;
  AdamState s = make_adam_state(p);
  adam_step(p, s, zeros_like(p), AdamOptions{});
  CHECK(p == before);
  CHECK(s.t == 1);
}

TEST_CASE("zero gradient without L2 is a no-op from a fresh moment state") {
  ModelParams p = random_params(2, 1.0);
  const ModelParams before = p;
  AdamOptions opts;
  opts.l2_weight = 0.0;
  AdamState s = make_adam_state(p);
  s.t = 17;
  for (auto& b : blocks(s.v)) {
    for (double& v : b.values) v = 0.3;
  }
  for (int i = 0; i < 5; ++i) adam_step(p, s, zeros_like(p), opts);
  CHECK(p == before);
}

TEST_CASE("matches a scalar transcription of the update") {
  ModelParams p = random_params(3, 0.5);
  const ModelParams g = random_params(4, 2.0);
  AdamOptions opts;
  opts.lr = 0.01;
  opts.l2_weight = 0.1;
  AdamState s = make_adam_state(p);

  std::vector<double> w = flatten(p), m(w.size(), 0.0), v(w.size(), 0.0);
  const std::vector<double> grad = flatten(g);
  std::vector<bool> bias;
  for (const auto& b : blocks(p)) bias.insert(bias.end(), b.values.size(), b.is_bias);
  for (int t = 1; t <= 5; ++t) {
    adam_step(p, s, g, opts);
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double d = -grad[i] + (bias[i] ? 0.0 : 0.1 * w[i]);
      m[i] = 0.9 * m[i] + 0.1 * d;
      v[i] = 0.999 * v[i] + 0.001 * d * d;
      const double mh = m[i] / (1.0 - std::pow(0.9, t));
      const double vh = v[i] / (1.0 - std::pow(0.999, t));
      w[i] -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
    }
  }
  const std::vector<double> got = flatten(p);
  for (std::size_t i = 0; i < w.size(); ++i) CHECK(got[i] == doctest::Approx(w[i]).epsilon(1e-13));
}

TEST_CASE("constant gradient steps approach the learning rate") {
  ModelParams p = random_params(5, 0.5);
  ModelParams g = zeros_like(p);
  for (auto& b : blocks(g)) std::fill(b.values.begin(), b.values.end(), 0.7);
  AdamOptions opts;
  opts.lr = 1e-3;
  opts.l2_weight = 0.0;
  AdamState s = make_adam_state(p);
  double last = 0.0;
  for (int t = 0; t < 2000; ++t) {
    const double before = p.emit_proj(0, 0);
    adam_step(p, s, g, opts);
    last = p.emit_proj(0, 0) - before;
  }
  CHECK(last == doctest::Approx(1e-3).epsilon(1e-6));  // ascent: moves with the gradient
}

TEST_CASE("L2 alone shrinks the parameter norm") {
  ModelParams p = random_params(6, 0.5);
  for (auto& b : blocks(p)) {
    if (b.is_bias) std::fill(b.values.begin(), b.values.end(), 0.0);
  }
  REQUIRE(squared_norm(p) > 0.0);
  AdamOptions opts;
  opts.lr = 1e-4;
  opts.l2_weight = 0.01;
  AdamState s = make_adam_state(p);
  double prev = squared_norm(p);
  for (int t = 0; t < 50; ++t) {
    adam_step(p, s, zeros_like(p), opts);
    const double now = squared_norm(p);
    CHECK(now < prev);
    prev = now;
  }
}

TEST_CASE("biases are exempt from L2") {
  ModelParams p = random_params(7, 0.5);
  const ModelParams before = p;
  AdamOptions opts;
  opts.l2_weight = 0.5;
  AdamState s = make_adam_state(p);
  adam_step(p, s, zeros_like(p), opts);
  CHECK(p.layers[0].bias == before.layers[0].bias);
  CHECK(p.baseline_bias == before.baseline_bias);
  CHECK(p.layers[0].weights != before.layers[0].weights);
}

TEST_CASE("clipping rescales the gradient by its global norm") {
  ModelParams p1 = random_params(8, 0.5), p2 = p1;
  const ModelParams g = random_params(9, 3.0);
  ModelParams g_scaled = g;
  double norm = std::sqrt(squared_norm(g));
  scale(1.0 / norm, g_scaled);
  AdamOptions clipped;
  clipped.clip_norm = 1.0;
  clipped.l2_weight = 0.0;
  AdamOptions plain = clipped;
  plain.clip_norm = 0.0;
  AdamState s1 = make_adam_state(p1), s2 = make_adam_state(p2);
  adam_step(p1, s1, g, clipped);
  adam_step(p2, s2, g_scaled, plain);
  const auto a = flatten(s1.v), b = flatten(s2.v);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

TEST_CASE("bad gradients are rejected before any update") {
  ModelParams p = random_params(10, 0.5);
  const ModelParams before = p;
  AdamState s = make_adam_state(p);
  ModelParams g = zeros_like(p);
  g.output_proj(1, 1) = std::nan("");
  CHECK_THROWS_AS(adam_step(p, s, g, AdamOptions{}), NumericError);
  CHECK(p == before);
  CHECK(s.t == 0);
  Rng rng(1, 0);
  const ModelParams other = init_params({3, 4, 2, 6, 2}, rng);
  CHECK_THROWS_AS(adam_step(p, s, other, AdamOptions{}), ShapeError);
}

TEST_CASE("adam is deterministic") {
  ModelParams a = random_params(11, 0.5), b = a;
  const ModelParams g = random_params(12, 1.0);
  AdamState sa = make_adam_state(a), sb = make_adam_state(b);
  for (int i = 0; i < 10; ++i) {
    adam_step(a, sa, g, AdamOptions{});
    adam_step(b, sb, g, AdamOptions{});
  }
  CHECK(a == b);
  CHECK(sa.m == sb.m);
}

TEST_CASE("default schedules hit their anchors") {
  const Schedules s;
  CHECK(schedule_value(s.entropy, 0) == 1.0);
  CHECK(schedule_value(s.entropy, 10000) == 1.0);
  CHECK(schedule_value(s.entropy, 105000) == doctest::Approx(0.55).epsilon(1e-14));
  CHECK(schedule_value(s.entropy, 200000) == 0.1);
  CHECK(schedule_value(s.entropy, 300000) == 0.1);
  CHECK(schedule_value(s.noise_std, 10000) == 0.0);
  CHECK(schedule_value(s.noise_std, 200000) == 0.15);
  CHECK(s.lr == 7e-5);
  CHECK(s.l2_weight == 0.001);
}

TEST_CASE("schedules are monotone and continuous over the ramp") {
  const LinearRamp down{1.0, 0.1, 10000, 200000};
  const LinearRamp up{0.0, 0.15, 10000, 200000};
  double prev_down = schedule_value(down, 9990), prev_up = schedule_value(up, 9990);
  for (std::size_t step = 9991; step <= 200010; ++step) {
    const double d = schedule_value(down, step), u = schedule_value(up, step);
    CHECK_UNARY(d <= prev_down);
    CHECK_UNARY(u >= prev_up);
    CHECK_UNARY(std::abs(d - prev_down) < 1e-5);
    CHECK_UNARY(std::abs(u - prev_up) < 1e-5);
    prev_down = d;
    prev_up = u;
  }
  CHECK_THROWS_AS(validate(LinearRamp{1.0, 0.0, 10, 10}), InvalidArgument);
  CHECK_THROWS_AS(validate(LinearRamp{-1.0, 0.0, 0, 10}), InvalidArgument);
}

}  // namespace
}  // namespace nat

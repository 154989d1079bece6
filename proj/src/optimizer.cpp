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

#include "nat/optimizer.hpp"

#include <cmath>
#include <string>

#include "nat/error.hpp"

namespace nat {

AdamState make_adam_state(const ModelParams& params) {
  return {zeros_like(params), zeros_like(params), 0};
}

void adam_step(ModelParams& params, AdamState& state, const ModelParams& ascent_grad,
               const AdamOptions& opts) {
  auto ps = blocks(params);
  auto gs = blocks(ascent_grad);
  auto ms = blocks(state.m);
  auto vs = blocks(state.v);
  if (gs.size() != ps.size() || ms.size() != ps.size() || vs.size() != ps.size()) {
    throw ShapeError("adam_step: block count mismatch");
  }
  double sq_norm = 0.0;
  for (std::size_t b = 0; b < ps.size(); ++b) {
    if (gs[b].values.size() != ps[b].values.size() ||
        ms[b].values.size() != ps[b].values.size() ||
        vs[b].values.size() != ps[b].values.size()) {
      throw ShapeError("adam_step: block " + ps[b].name + " size mismatch");
    }
    for (double g : gs[b].values) {
      if (!std::isfinite(g)) {
        throw NumericError("adam_step: non-finite gradient in block " + gs[b].name);
      }
      sq_norm += g * g;
    }
  }
  double clip = 1.0;
  if (opts.clip_norm > 0.0 && sq_norm > opts.clip_norm * opts.clip_norm) {
    clip = opts.clip_norm / std::sqrt(sq_norm);
  }

  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double correction1 = 1.0 - std::pow(opts.beta1, t);
  const double correction2 = 1.0 - std::pow(opts.beta2, t);
  for (std::size_t b = 0; b < ps.size(); ++b) {
    const double l2 = ps[b].is_bias ? 0.0 : opts.l2_weight;
    auto p = ps[b].values;
    auto g = gs[b].values;
    auto m = ms[b].values;
    auto v = vs[b].values;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double descent = -clip * g[i] + l2 * p[i];
      m[i] = opts.beta1 * m[i] + (1.0 - opts.beta1) * descent;
      v[i] = opts.beta2 * v[i] + (1.0 - opts.beta2) * descent * descent;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p[i] -= opts.lr * m_hat / (std::sqrt(v_hat) + opts.epsilon);
    }
  }
}

void validate(const LinearRamp& ramp) {
  if (ramp.ramp_begin >= ramp.ramp_end) {
    throw InvalidArgument("schedule ramp_begin must precede ramp_end");
  }
  if (!(ramp.start >= 0.0) || !(ramp.end >= 0.0)) {
    throw InvalidArgument("schedule values must be non-negative");
  }
}

double schedule_value(const LinearRamp& ramp, std::size_t step) {
  if (step <= ramp.ramp_begin) return ramp.start;
  if (step >= ramp.ramp_end) return ramp.end;
  const double frac = static_cast<double>(step - ramp.ramp_begin) /
                      static_cast<double>(ramp.ramp_end - ramp.ramp_begin);
  return ramp.start + (ramp.end - ramp.start) * frac;
}

}  // namespace nat

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

#ifndef NAT_OPTIMIZER_HPP_
#define NAT_OPTIMIZER_HPP_

#include <cstddef>

#include "nat/network.hpp"

namespace nat {

struct AdamOptions {
  double lr = 7e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // Added to the descent gradient as l2_weight * w; biases are exempt.
  double l2_weight = 0.001;
  // Global-norm cap on the task gradient; 0 disables clipping.
  double clip_norm = 0.0;
};

struct AdamState {
  ModelParams m;
  ModelParams v;
  std::size_t t = 0;
};

AdamState make_adam_state(const ModelParams& params);

// One bias-corrected Adam update. `ascent_grad` points uphill on the reward;
// the step descends on -(ascent_grad) + l2_weight * weights. Throws
// NumericError on a non-finite gradient and ShapeError on mismatched shapes,
// leaving params and state untouched in both cases.
void adam_step(ModelParams& params, AdamState& state, const ModelParams& ascent_grad,
               const AdamOptions& opts);

// Constant `start` up to ramp_begin, linear to `end` at ramp_end, then
// constant `end`.
struct LinearRamp {
  double start = 0.0;
  double end = 0.0;
  std::size_t ramp_begin = 0;
  std::size_t ramp_end = 1;
};

void validate(const LinearRamp& ramp);
double schedule_value(const LinearRamp& ramp, std::size_t step);

struct Schedules {
  LinearRamp entropy{1.0, 0.1, 10000, 200000};
  LinearRamp noise_std{0.0, 0.15, 10000, 200000};
  double l2_weight = 0.001;
  double lr = 7e-5;
};

}  // namespace nat

#endif  // NAT_OPTIMIZER_HPP_

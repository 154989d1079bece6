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

#ifndef NAT_TESTS_ORACLES_HPP_
#define NAT_TESTS_ORACLES_HPP_

// Independent reference computations used by the unit tests. Nothing here
// calls into the code it is used to check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "nat/network.hpp"

namespace nat::oracle {

inline std::vector<double> naive_affine(const Matrix& w, const std::vector<double>& x,
                                        const std::vector<double>& b) {
  std::vector<double> out(w.rows());
  for (std::size_t r = 0; r < w.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < w.cols(); ++c) s += w(r, c) * x[c];
    out[r] = s + b[r];
  }
  return out;
}

inline std::vector<double> softmax_long_double(const std::vector<double>& z) {
  long double total = 0.0L;
  std::vector<long double> e(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    e[i] = std::exp(static_cast<long double>(z[i]));
    total += e[i];
  }
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = static_cast<double>(e[i] / total);
  return out;
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Central differences over every entry of flatten(params).
inline std::vector<double> central_differences(
    const ModelParams& params, const std::function<double(const ModelParams&)>& f,
    double h = 1e-5) {
  std::vector<double> flat = flatten(params);
  std::vector<double> grad(flat.size());
  ModelParams work = params;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const double orig = flat[i];
    flat[i] = orig + h;
    unflatten(flat, work);
    const double plus = f(work);
    flat[i] = orig - h;
    unflatten(flat, work);
    const double minus = f(work);
    flat[i] = orig;
    grad[i] = (plus - minus) / (2.0 * h);
  }
  return grad;
}

inline bool relative_match(double a, double b, double rel, double floor) {
  const double diff = std::abs(a - b);
  return diff <= floor || diff <= rel * std::max(std::abs(a), std::abs(b));
}

// Leave-one-out baseline transcribed term by term; steps are 0-based.
inline std::vector<std::vector<double>> loo_direct(
    const std::vector<std::vector<double>>& rewards) {
  const std::size_t k_count = rewards.size();
  const std::size_t t = rewards.front().size();
  std::vector<std::vector<double>> omega(k_count, std::vector<double>(t));
  for (std::size_t k = 0; k < k_count; ++k) {
    for (std::size_t j = 0; j < t; ++j) {
      double future = 0.0, residual = 0.0;
      for (std::size_t other = 0; other < k_count; ++other) {
        if (other == k) continue;
        for (std::size_t i = j; i < t; ++i) future += rewards[other][i];
        for (std::size_t i = 0; i < j; ++i) residual += rewards[other][i] - rewards[k][i];
      }
      omega[k][j] = (future + residual) / static_cast<double>(k_count - 1);
    }
  }
  return omega;
}

// Edit distance as the minimum over every edit script.
inline std::size_t edit_distance_exhaustive(std::span<const int> a, std::span<const int> b) {
  if (a.empty()) return b.size();
  if (b.empty()) return a.size();
  return std::min({edit_distance_exhaustive(a.subspan(1), b.subspan(1)) + (a[0] != b[0] ? 1u : 0u),
                   edit_distance_exhaustive(a.subspan(1), b) + 1,
                   edit_distance_exhaustive(a, b.subspan(1)) + 1});
}

}  // namespace nat::oracle

#endif  // NAT_TESTS_ORACLES_HPP_

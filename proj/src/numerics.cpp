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

#include "nat/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <omp.h>

#include "nat/error.hpp"

namespace nat {
namespace {

// Below this many multiply-adds the fork/join costs more than it saves.
constexpr std::size_t kParallelWork = 1 << 14;

bool go_parallel(std::size_t work) {
  return work >= kParallelWork && !omp_in_parallel();
}

std::string shape(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

void check_affine(const Matrix& w, std::size_t x, std::size_t b, std::size_t out) {
  if (w.cols() != x || w.rows() != b || w.rows() != out) {
    throw ShapeError("affine: W is " + shape(w.rows(), w.cols()) + ", x has " +
                     std::to_string(x) + " entries, b has " + std::to_string(b) +
                     ", out has " + std::to_string(out));
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ShapeError("matrix " + shape(rows, cols) + " given " +
                     std::to_string(data_.size()) + " values");
  }
}

void affine(const Matrix& w, std::span<const double> x, std::span<const double> b,
            std::span<double> out) {
  check_affine(w, x.size(), b.size(), out.size());
  const auto rows = static_cast<std::ptrdiff_t>(w.rows());
  const std::size_t cols = w.cols();
  const double* wd = w.values().data();
#pragma omp parallel for schedule(static) if (go_parallel(w.size()))
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    const double* wr = wd + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * x[c];
    out[r] = acc + b[r];
  }
}

Vector affine(const Matrix& w, std::span<const double> x, std::span<const double> b) {
  Vector out(w.rows());
  affine(w, x, b, out);
  return out;
}

void accumulate_transposed(const Matrix& w, std::span<const double> y,
                           std::span<double> out) {
  if (w.rows() != y.size() || w.cols() != out.size()) {
    throw ShapeError("accumulate_transposed: W is " + shape(w.rows(), w.cols()) +
                     ", y has " + std::to_string(y.size()) + ", out has " +
                     std::to_string(out.size()));
  }
  const std::size_t rows = w.rows();
  const auto cols = static_cast<std::ptrdiff_t>(w.cols());
  const double* wd = w.values().data();
#pragma omp parallel for schedule(static) if (go_parallel(w.size()))
  for (std::ptrdiff_t c = 0; c < cols; ++c) {
    double acc = 0.0;
    for (std::size_t r = 0; r < rows; ++r) acc += wd[r * cols + c] * y[r];
    out[c] += acc;
  }
}

void accumulate_outer(Matrix& g, std::span<const double> y, std::span<const double> x) {
  if (g.rows() != y.size() || g.cols() != x.size()) {
    throw ShapeError("accumulate_outer: G is " + shape(g.rows(), g.cols()) +
                     ", y has " + std::to_string(y.size()) + ", x has " +
                     std::to_string(x.size()));
  }
  const auto rows = static_cast<std::ptrdiff_t>(g.rows());
  const std::size_t cols = g.cols();
  double* gd = g.values().data();
#pragma omp parallel for schedule(static) if (go_parallel(g.size()))
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    const double yr = y[r];
    if (yr == 0.0) continue;
    double* gr = gd + r * cols;
    for (std::size_t c = 0; c < cols; ++c) gr[c] += yr * x[c];
  }
}

Vector affine_reference(const Matrix& w, std::span<const double> x,
                        std::span<const double> b) {
  check_affine(w, x.size(), b.size(), w.rows());
  Vector out(w.rows());
  for (std::size_t r = 0; r < w.rows(); ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < w.cols(); ++c) acc += w(r, c) * x[c];
    out[r] = acc + b[r];
  }
  return out;
}

void accumulate_transposed_reference(const Matrix& w, std::span<const double> y,
                                     std::span<double> out) {
  if (w.rows() != y.size() || w.cols() != out.size()) {
    throw ShapeError("accumulate_transposed: shape mismatch");
  }
  for (std::size_t c = 0; c < w.cols(); ++c) {
    double acc = 0.0;
    for (std::size_t r = 0; r < w.rows(); ++r) acc += w(r, c) * y[r];
    out[c] += acc;
  }
}

void accumulate_outer_reference(Matrix& g, std::span<const double> y,
                                std::span<const double> x) {
  if (g.rows() != y.size() || g.cols() != x.size()) {
    throw ShapeError("accumulate_outer: shape mismatch");
  }
  for (std::size_t r = 0; r < g.rows(); ++r) {
    for (std::size_t c = 0; c < g.cols(); ++c) g(r, c) += y[r] * x[c];
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ShapeError("dot: lengths " + std::to_string(a.size()) + " and " +
                     std::to_string(b.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

Vector softmax_stable(std::span<const double> z) {
  if (z.empty()) throw InvalidArgument("softmax_stable: empty input");
  const double top = *std::max_element(z.begin(), z.end());
  Vector out(z.size());
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = std::exp(z[i] - top);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double log_sigmoid(double z) {
  // log(sigmoid(z)) = -log1p(exp(-z)) = z - log1p(exp(z))
  if (z >= 0.0) return -std::log1p(std::exp(-z));
  return z - std::log1p(std::exp(z));
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace nat

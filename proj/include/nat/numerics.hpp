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

#ifndef NAT_NUMERICS_HPP_
#define NAT_NUMERICS_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace nat {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  // Throws ShapeError unless data.size() == rows * cols.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Row-parallel kernels. Each output element is reduced serially in column
// order, so results are bit-identical to the *_reference versions for any
// thread count.

// out = W x + b
void affine(const Matrix& w, std::span<const double> x, std::span<const double> b,
            std::span<double> out);
Vector affine(const Matrix& w, std::span<const double> x, std::span<const double> b);

// out += W^T y
void accumulate_transposed(const Matrix& w, std::span<const double> y,
                           std::span<double> out);

// G += y x^T
void accumulate_outer(Matrix& g, std::span<const double> y, std::span<const double> x);

// Serial versions kept as the reference for the parallel kernels.
Vector affine_reference(const Matrix& w, std::span<const double> x,
                        std::span<const double> b);
void accumulate_transposed_reference(const Matrix& w, std::span<const double> y,
                                     std::span<double> out);
void accumulate_outer_reference(Matrix& g, std::span<const double> y,
                                std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b);

Vector softmax_stable(std::span<const double> z);

double sigmoid(double z);
// log(sigmoid(z)), finite for |z| <= 700.
double log_sigmoid(double z);

bool all_finite(std::span<const double> v);

}  // namespace nat

#endif  // NAT_NUMERICS_HPP_

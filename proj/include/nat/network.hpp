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

#ifndef NAT_NETWORK_HPP_
#define NAT_NETWORK_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nat/numerics.hpp"
#include "nat/rng.hpp"

namespace nat {

// Token id 0 is the end-of-sequence symbol in every vocabulary. The
// beginning-of-sequence symbol is not a vocabulary entry; it is the extra
// last row of the embedding table (id == vocab_size).
inline constexpr int kEos = 0;

struct ModelShape {
  std::size_t feature_dim = 0;
  std::size_t vocab_size = 0;  // includes EOS
  std::size_t embed_size = 16;
  std::size_t hidden_size = 0;
  std::size_t num_layers = 1;
};

struct LstmLayerParams {
  std::size_t input_size = 0;
  std::size_t hidden_size = 0;
  // 4H x (input_size + H). Gate row blocks are ordered input, forget,
  // output, candidate; columns are [layer input; previous h].
  Matrix weights;
  Vector bias;  // 4H

  bool operator==(const LstmLayerParams&) const = default;
};

struct ModelParams {
  std::vector<LstmLayerParams> layers;
  Matrix emit_proj;       // 1 x H, emission logit
  Matrix output_proj;     // V x H, token logits
  Matrix baseline_proj;   // 1 x H, parametric baseline
  double baseline_bias = 0.0;
  Matrix embedding;       // (V + 1) x E, last row is BOS

  std::size_t feature_dim() const;
  std::size_t vocab_size() const { return output_proj.rows(); }
  std::size_t embed_size() const { return embedding.cols(); }
  std::size_t hidden_size() const { return emit_proj.cols(); }
  int bos() const { return static_cast<int>(vocab_size()); }
  ModelShape shape() const;

  bool operator==(const ModelParams&) const = default;
};

// Uniform weights in [-0.05, 0.05], zero biases except forget gates (1.0).
ModelParams init_params(const ModelShape& shape, Rng& rng);
ModelParams zeros_like(const ModelParams& params);
// Throws ShapeError if the blocks disagree with each other.
void validate(const ModelParams& params);

// Flat view of one named parameter block.
template <typename T>
struct BlockView {
  std::string name;
  std::span<T> values;
  std::size_t rows = 0;
  std::size_t cols = 0;
  bool is_bias = false;
  bool is_baseline = false;
};

std::vector<BlockView<double>> blocks(ModelParams& params);
std::vector<BlockView<const double>> blocks(const ModelParams& params);
std::size_t parameter_count(const ModelParams& params);
std::vector<double> flatten(const ModelParams& params);
void unflatten(std::span<const double> flat, ModelParams& params);
// y += a * x
void axpy(double a, const ModelParams& x, ModelParams& y);
void scale(double a, ModelParams& params);

struct LayerState {
  Vector h;
  Vector c;
};

struct LstmState {
  std::vector<LayerState> layers;
  const Vector& top() const { return layers.back().h; }
};

LstmState initial_state(const ModelParams& params);

// Activations cached by the forward pass for one layer at one step.
struct LayerRecord {
  Vector input;   // [layer input; previous h]
  Vector gates;   // activated gates, 4H, same order as the weights
  Vector c_prev;
  Vector tanh_c;
};

struct StepRecord {
  std::vector<LayerRecord> layers;
  int token_prev = 0;
};

using Tape = std::vector<StepRecord>;

// concat(x, b_prev, embedding[token_prev]).
Vector step_input(std::span<const double> features, int b_prev, int token_prev,
                  const ModelParams& params);

// One LSTM step through every layer. When `record` is non-null the
// activations are written to it. Throws NumericError naming the step and
// layer if an activation is not finite.
LstmState lstm_forward(const ModelParams& params, const LstmState& state,
                       std::span<const double> input, StepRecord* record = nullptr,
                       std::size_t step = 0);

double emission_logit(std::span<const double> h_top, const ModelParams& params);
double emission_prob(std::span<const double> h_top, const ModelParams& params);
Vector output_logits(std::span<const double> h_top, const ModelParams& params);
Vector output_dist(std::span<const double> h_top, const ModelParams& params);

// Returns a copy with i.i.d. N(0, std^2) added to every weight and bias.
ModelParams apply_weight_noise(const ModelParams& params, double std, Rng& rng);

// Per-step partial derivatives of a scalar objective. Empty vectors mean zero.
struct StepSignal {
  double emit_logit = 0.0;
  Vector token_logits;  // d/d(W_o h), length V
  Vector hidden;        // direct d/d(h_top), length H
};

// Backpropagation through time. Accumulates into `grads`, which must have
// the shape of `params`. Baseline blocks are never touched. Throws
// ShapeError when signals and tape lengths differ.
void backward(const ModelParams& params, const Tape& tape,
              std::span<const StepSignal> signals, ModelParams& grads);
ModelParams backward(const ModelParams& params, const Tape& tape,
                     std::span<const StepSignal> signals);

// h_top reconstructed from a tape record.
Vector top_hidden(const StepRecord& record);

}  // namespace nat

#endif  // NAT_NETWORK_HPP_

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

#include "nat/network.hpp"

#include <cmath>
#include <string>

#include "nat/error.hpp"

namespace nat {
namespace {

constexpr double kInitRange = 0.05;
constexpr double kForgetBias = 1.0;

void fill_uniform(std::span<double> values, Rng& rng) {
  for (double& v : values) v = (2.0 * rng.uniform() - 1.0) * kInitRange;
}

template <typename T, typename P>
std::vector<BlockView<T>> collect_blocks(P& params) {
  std::vector<BlockView<T>> out;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    auto& layer = params.layers[l];
    const std::string prefix = "lstm." + std::to_string(l);
    out.push_back({prefix + ".weights", layer.weights.values(), layer.weights.rows(),
                   layer.weights.cols(), false, false});
    out.push_back({prefix + ".bias", std::span<T>(layer.bias), layer.bias.size(), 1,
                   true, false});
  }
  out.push_back({"emit.weights", params.emit_proj.values(), params.emit_proj.rows(),
                 params.emit_proj.cols(), false, false});
  out.push_back({"output.weights", params.output_proj.values(),
                 params.output_proj.rows(), params.output_proj.cols(), false, false});
  out.push_back({"embedding", params.embedding.values(), params.embedding.rows(),
                 params.embedding.cols(), false, false});
  out.push_back({"baseline.weights", params.baseline_proj.values(),
                 params.baseline_proj.rows(), params.baseline_proj.cols(), false, true});
  out.push_back({"baseline.bias", std::span<T>(&params.baseline_bias, 1), 1, 1, true,
                 true});
  return out;
}

}  // namespace

std::size_t ModelParams::feature_dim() const {
  if (layers.empty()) return 0;
  return layers.front().input_size - 1 - embed_size();
}

ModelShape ModelParams::shape() const {
  return {feature_dim(), vocab_size(), embed_size(), hidden_size(), layers.size()};
}

ModelParams init_params(const ModelShape& shape, Rng& rng) {
  if (shape.vocab_size < 2) throw InvalidArgument("vocab_size must be at least 2");
  if (shape.hidden_size == 0 || shape.num_layers == 0) {
    throw InvalidArgument("model needs at least one layer with nonzero width");
  }
  const std::size_t h = shape.hidden_size;
  ModelParams p;
  std::size_t input = shape.feature_dim + 1 + shape.embed_size;
  for (std::size_t l = 0; l < shape.num_layers; ++l) {
    LstmLayerParams layer;
    layer.input_size = input;
    layer.hidden_size = h;
    layer.weights = Matrix(4 * h, input + h);
    fill_uniform(layer.weights.values(), rng);
    layer.bias.assign(4 * h, 0.0);
    for (std::size_t j = h; j < 2 * h; ++j) layer.bias[j] = kForgetBias;
    p.layers.push_back(std::move(layer));
    input = h;
  }
  p.emit_proj = Matrix(1, h);
  fill_uniform(p.emit_proj.values(), rng);
  p.output_proj = Matrix(shape.vocab_size, h);
  fill_uniform(p.output_proj.values(), rng);
  p.baseline_proj = Matrix(1, h);
  fill_uniform(p.baseline_proj.values(), rng);
  p.baseline_bias = 0.0;
  p.embedding = Matrix(shape.vocab_size + 1, shape.embed_size);
  fill_uniform(p.embedding.values(), rng);
  return p;
}

ModelParams zeros_like(const ModelParams& params) {
  ModelParams z = params;
  for (auto& b : blocks(z)) std::fill(b.values.begin(), b.values.end(), 0.0);
  return z;
}

void validate(const ModelParams& p) {
  if (p.layers.empty()) throw ShapeError("model has no LSTM layers");
  if (p.vocab_size() < 2) throw ShapeError("vocab_size must be at least 2");
  const std::size_t h = p.hidden_size();
  std::size_t expected_input = p.layers.front().input_size;
  if (expected_input < 1 + p.embed_size()) {
    throw ShapeError("layer 0 input narrower than feedback features");
  }
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const auto& layer = p.layers[l];
    if (layer.hidden_size != h || layer.input_size != expected_input ||
        layer.weights.rows() != 4 * h ||
        layer.weights.cols() != layer.input_size + h || layer.bias.size() != 4 * h) {
      throw ShapeError("lstm layer " + std::to_string(l) + " has inconsistent shapes");
    }
    expected_input = h;
  }
  if (p.emit_proj.rows() != 1 || p.baseline_proj.rows() != 1 ||
      p.baseline_proj.cols() != h || p.output_proj.cols() != h) {
    throw ShapeError("projection shapes disagree with hidden size " + std::to_string(h));
  }
  if (p.embedding.rows() != p.vocab_size() + 1) {
    throw ShapeError("embedding needs vocab_size + 1 rows");
  }
}

std::vector<BlockView<double>> blocks(ModelParams& params) {
  return collect_blocks<double>(params);
}

std::vector<BlockView<const double>> blocks(const ModelParams& params) {
  return collect_blocks<const double>(params);
}

std::size_t parameter_count(const ModelParams& params) {
  std::size_t n = 0;
  for (const auto& b : blocks(params)) n += b.values.size();
  return n;
}

std::vector<double> flatten(const ModelParams& params) {
  std::vector<double> flat;
  flat.reserve(parameter_count(params));
  for (const auto& b : blocks(params)) flat.insert(flat.end(), b.values.begin(), b.values.end());
  return flat;
}

void unflatten(std::span<const double> flat, ModelParams& params) {
  if (flat.size() != parameter_count(params)) {
    throw ShapeError("unflatten: " + std::to_string(flat.size()) + " values for " +
                     std::to_string(parameter_count(params)) + " parameters");
  }
  std::size_t offset = 0;
  for (auto& b : blocks(params)) {
    std::copy_n(flat.begin() + offset, b.values.size(), b.values.begin());
    offset += b.values.size();
  }
}

void axpy(double a, const ModelParams& x, ModelParams& y) {
  auto xs = blocks(x);
  auto ys = blocks(y);
  if (xs.size() != ys.size()) throw ShapeError("axpy: block count mismatch");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i].values.size() != ys[i].values.size()) {
      throw ShapeError("axpy: block " + xs[i].name + " size mismatch");
    }
    for (std::size_t j = 0; j < xs[i].values.size(); ++j) {
      ys[i].values[j] += a * xs[i].values[j];
    }
  }
}

void scale(double a, ModelParams& params) {
  for (auto& b : blocks(params)) {
    for (double& v : b.values) v *= a;
  }
}

LstmState initial_state(const ModelParams& params) {
  LstmState s;
  for (const auto& layer : params.layers) {
    s.layers.push_back({Vector(layer.hidden_size, 0.0), Vector(layer.hidden_size, 0.0)});
  }
  return s;
}

Vector step_input(std::span<const double> features, int b_prev, int token_prev,
                  const ModelParams& params) {
  if (features.size() != params.feature_dim()) {
    throw ShapeError("step_input: feature dim " + std::to_string(features.size()) +
                     " but layer 0 expects " + std::to_string(params.feature_dim()));
  }
  if (token_prev < 0 || token_prev > params.bos()) {
    throw InvalidArgument("step_input: token id " + std::to_string(token_prev) +
                          " out of range");
  }
  Vector in;
  in.reserve(params.layers.front().input_size);
  in.insert(in.end(), features.begin(), features.end());
  in.push_back(b_prev ? 1.0 : 0.0);
  const auto row = params.embedding.row(static_cast<std::size_t>(token_prev));
  in.insert(in.end(), row.begin(), row.end());
  return in;
}

LstmState lstm_forward(const ModelParams& params, const LstmState& state,
                       std::span<const double> input, StepRecord* record,
                       std::size_t step) {
  if (state.layers.size() != params.layers.size()) {
    throw ShapeError("lstm_forward: state has " + std::to_string(state.layers.size()) +
                     " layers, params have " + std::to_string(params.layers.size()));
  }
  if (record) record->layers.resize(params.layers.size());
  LstmState next;
  next.layers.resize(params.layers.size());
  Vector concat;
  std::span<const double> layer_input = input;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    const std::size_t h = layer.hidden_size;
    const auto& prev = state.layers[l];
    if (layer_input.size() != layer.input_size || prev.h.size() != h ||
        prev.c.size() != h) {
      throw ShapeError("lstm_forward: layer " + std::to_string(l) + " expects input " +
                       std::to_string(layer.input_size) + ", got " +
                       std::to_string(layer_input.size()));
    }
    concat.assign(layer_input.begin(), layer_input.end());
    concat.insert(concat.end(), prev.h.begin(), prev.h.end());

    Vector gates(4 * h);
    affine(layer.weights, concat, layer.bias, gates);
    for (std::size_t j = 0; j < 3 * h; ++j) gates[j] = sigmoid(gates[j]);
    for (std::size_t j = 3 * h; j < 4 * h; ++j) gates[j] = std::tanh(gates[j]);

    LayerState& out = next.layers[l];
    out.c.resize(h);
    out.h.resize(h);
    Vector tanh_c(h);
    for (std::size_t j = 0; j < h; ++j) {
      const double i_g = gates[j], f_g = gates[h + j], o_g = gates[2 * h + j],
                   g_g = gates[3 * h + j];
      out.c[j] = f_g * prev.c[j] + i_g * g_g;
      tanh_c[j] = std::tanh(out.c[j]);
      out.h[j] = o_g * tanh_c[j];
    }
    if (!all_finite(out.h) || !all_finite(out.c)) {
      throw NumericError("non-finite activation at step " + std::to_string(step) +
                         ", layer " + std::to_string(l));
    }
    if (record) {
      LayerRecord& rec = record->layers[l];
      rec.input = concat;
      rec.gates = std::move(gates);
      rec.c_prev = prev.c;
      rec.tanh_c = std::move(tanh_c);
    }
    layer_input = out.h;
  }
  return next;
}

double emission_logit(std::span<const double> h_top, const ModelParams& params) {
  return dot(params.emit_proj.row(0), h_top);
}

double emission_prob(std::span<const double> h_top, const ModelParams& params) {
  return sigmoid(emission_logit(h_top, params));
}

Vector output_logits(std::span<const double> h_top, const ModelParams& params) {
  const Vector zero(params.vocab_size(), 0.0);
  return affine(params.output_proj, h_top, zero);
}

Vector output_dist(std::span<const double> h_top, const ModelParams& params) {
  return softmax_stable(output_logits(h_top, params));
}

ModelParams apply_weight_noise(const ModelParams& params, double std, Rng& rng) {
  if (!(std >= 0.0)) throw InvalidArgument("weight noise std must be non-negative");
  ModelParams noisy = params;
  if (std == 0.0) return noisy;
  for (auto& b : blocks(noisy)) {
    for (double& v : b.values) v += sample_gaussian(0.0, std, rng);
  }
  return noisy;
}

Vector top_hidden(const StepRecord& record) {
  const LayerRecord& top = record.layers.back();
  const std::size_t h = top.tanh_c.size();
  Vector out(h);
  for (std::size_t j = 0; j < h; ++j) out[j] = top.gates[2 * h + j] * top.tanh_c[j];
  return out;
}

void backward(const ModelParams& params, const Tape& tape,
              std::span<const StepSignal> signals, ModelParams& grads) {
  if (tape.size() != signals.size()) {
    throw ShapeError("backward: tape has " + std::to_string(tape.size()) +
                     " steps but " + std::to_string(signals.size()) + " signals");
  }
  const std::size_t num_layers = params.layers.size();
  const std::size_t h = params.hidden_size();
  const std::size_t feature_and_flag = params.feature_dim() + 1;
  const std::size_t embed = params.embed_size();

  // Gradients carried backwards in time, per layer.
  std::vector<Vector> dh_next(num_layers, Vector(h, 0.0));
  std::vector<Vector> dc_next(num_layers, Vector(h, 0.0));
  Vector dh(h), dc(h), dz(4 * h);

  for (std::size_t t = tape.size(); t-- > 0;) {
    const StepRecord& rec = tape[t];
    const StepSignal& sig = signals[t];
    if (rec.layers.size() != num_layers) throw ShapeError("backward: malformed tape");

    // Gradient arriving at the top hidden state from the step's heads.
    Vector from_above(h, 0.0);
    const bool has_emit = sig.emit_logit != 0.0;
    const bool has_tokens = !sig.token_logits.empty();
    if (has_emit || has_tokens) {
      const Vector h_top = top_hidden(rec);
      if (has_emit) {
        const double g = sig.emit_logit;
        accumulate_outer(grads.emit_proj, std::span<const double>(&g, 1), h_top);
        accumulate_transposed(params.emit_proj, std::span<const double>(&g, 1), from_above);
      }
      if (has_tokens) {
        if (sig.token_logits.size() != params.vocab_size()) {
          throw ShapeError("backward: token signal length mismatch at step " +
                           std::to_string(t));
        }
        accumulate_outer(grads.output_proj, sig.token_logits, h_top);
        accumulate_transposed(params.output_proj, sig.token_logits, from_above);
      }
    }
    if (!sig.hidden.empty()) {
      if (sig.hidden.size() != h) {
        throw ShapeError("backward: hidden signal length mismatch at step " +
                         std::to_string(t));
      }
      for (std::size_t j = 0; j < h; ++j) from_above[j] += sig.hidden[j];
    }

    for (std::size_t l = num_layers; l-- > 0;) {
      const LayerRecord& lr = rec.layers[l];
      const LstmLayerParams& layer = params.layers[l];
      for (std::size_t j = 0; j < h; ++j) dh[j] = from_above[j] + dh_next[l][j];
      for (std::size_t j = 0; j < h; ++j) {
        const double i_g = lr.gates[j], f_g = lr.gates[h + j], o_g = lr.gates[2 * h + j],
                     g_g = lr.gates[3 * h + j], tc = lr.tanh_c[j];
        dc[j] = dc_next[l][j] + dh[j] * o_g * (1.0 - tc * tc);
        dz[j] = dc[j] * g_g * i_g * (1.0 - i_g);
        dz[h + j] = dc[j] * lr.c_prev[j] * f_g * (1.0 - f_g);
        dz[2 * h + j] = dh[j] * tc * o_g * (1.0 - o_g);
        dz[3 * h + j] = dc[j] * i_g * (1.0 - g_g * g_g);
        dc_next[l][j] = dc[j] * f_g;
      }
      LstmLayerParams& gl = grads.layers[l];
      accumulate_outer(gl.weights, dz, lr.input);
      for (std::size_t j = 0; j < 4 * h; ++j) gl.bias[j] += dz[j];

      Vector dconcat(lr.input.size(), 0.0);
      accumulate_transposed(layer.weights, dz, dconcat);
      const std::size_t in = layer.input_size;
      std::copy(dconcat.begin() + in, dconcat.end(), dh_next[l].begin());
      if (l > 0) {
        from_above.assign(dconcat.begin(), dconcat.begin() + in);
      } else {
        auto row = grads.embedding.row(static_cast<std::size_t>(rec.token_prev));
        for (std::size_t e = 0; e < embed; ++e) row[e] += dconcat[feature_and_flag + e];
      }
    }
  }
}

ModelParams backward(const ModelParams& params, const Tape& tape,
                     std::span<const StepSignal> signals) {
  ModelParams grads = zeros_like(params);
  backward(params, tape, signals, grads);
  return grads;
}

}  // namespace nat

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

#ifndef NAT_TRAINER_HPP_
#define NAT_TRAINER_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "nat/config.hpp"
#include "nat/data.hpp"
#include "nat/eval.hpp"
#include "nat/network.hpp"
#include "nat/optimizer.hpp"
#include "nat/transducer.hpp"

namespace nat {

struct MetricsRow {
  std::size_t step = 0;
  double mean_reward = 0.0;     // averaged over the steps since the last row
  double score_variance = 0.0;  // same averaging
  double dev_error = 0.0;
  double entropy_weight = 0.0;
  double noise_std = 0.0;
};

struct TrainingState {
  ModelParams params;
  AdamState adam;
  std::size_t step = 0;
};

void save_training_checkpoint(const std::filesystem::path& path, const TrainingState& state);
TrainingState load_training_checkpoint(const std::filesystem::path& path);
// Model weights only; works on any checkpoint written by the trainer.
ModelParams load_model(const std::filesystem::path& path);

struct TrainOutput {
  // Metrics, diagnostics and checkpoints go here; empty disables all files.
  std::filesystem::path dir;
  std::optional<std::filesystem::path> resume_from;
  CollapseMap collapse;
};

struct TrainResult {
  TrainingState state;
  std::vector<MetricsRow> metrics;
  double final_dev_error = 0.0;
};

// Fresh model for the given data dimensions, seeded from the run seed.
ModelParams initial_model(const RunConfig& cfg, std::size_t feature_dim,
                          std::size_t vocab_size);

// One utterance per step in seeded epoch-shuffled order: weight noise per
// schedule, K-sample policy gradient, Adam. `train` and `dev` must already be
// frame-stacked. Throws NumericError on a non-finite update; checkpoints
// already written are kept.
TrainResult train_model(const RunConfig& cfg, std::span<const Utterance> train,
                        std::span<const Utterance> dev, const TrainOutput& out = {});

std::vector<Hypothesis> decode_all(const ModelParams& params, std::span<const Utterance> utts,
                                   std::size_t max_tokens, bool parallel);
EvalReport evaluate(const ModelParams& params, std::span<const Utterance> utts,
                    const CollapseMap& collapse, std::size_t max_tokens, bool parallel);

// Mean clustering score of one teacher-forced rollout per utterance.
double mean_clustering_score(const ModelParams& params, std::span<const Utterance> utts,
                             std::uint64_t seed);

}  // namespace nat

#endif  // NAT_TRAINER_HPP_

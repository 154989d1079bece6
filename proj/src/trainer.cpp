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

#include "nat/trainer.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include <omp.h>

#include "nat/checkpoint.hpp"
#include "nat/error.hpp"
#include "nat/estimator.hpp"
#include "nat/log.hpp"
#include "parallel.hpp"

namespace nat {
namespace {

constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kShuffleStream = 2;
constexpr std::uint64_t kNoiseStream = 3;
constexpr std::uint64_t kSampleStream = 4;
constexpr std::uint64_t kProbeStream = 5;

constexpr const char* kMetricsHeader =
    "step,mean_reward,score_variance,dev_per,entropy_weight,noise_std";
constexpr const char* kDiagnosticsHeader = "step,mean_reward,score_variance,entropy_weight";

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = Rng(seed, kShuffleStream).substream(epoch);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[rng.uniform_int(i)]);
  }
  return order;
}

NamedBlock scalar_block(const std::string& name, double value) {
  return {name, 1, 1, {value}};
}

double scalar_from(std::span<const NamedBlock> blocks, const std::string& name) {
  const NamedBlock* b = find_block(blocks, name);
  if (!b || b->data.size() != 1) {
    throw FormatError(FormatError::Kind::kCorrupt, "checkpoint lacks scalar " + name);
  }
  return b->data[0];
}

// Keeps the header and rows whose leading step is <= `step`.
void truncate_csv(const std::filesystem::path& path, std::size_t step) {
  std::ifstream in(path);
  if (!in) return;
  std::vector<std::string> keep;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      keep.push_back(line);
      header = false;
      continue;
    }
    if (line.empty()) continue;
    if (std::stoull(line.substr(0, line.find(','))) <= step) keep.push_back(line);
  }
  in.close();
  std::ofstream out(path, std::ios::trunc);
  for (const auto& l : keep) out << l << '\n';
}

std::ofstream open_csv(const std::filesystem::path& path, const char* header) {
  const bool fresh = !std::filesystem::exists(path);
  std::ofstream out(path, std::ios::app);
  if (!out) throw IoError("cannot open " + path.string());
  if (fresh) out << header << '\n';
  out << std::setprecision(17);
  return out;
}

std::filesystem::path checkpoint_path(const std::filesystem::path& dir, std::size_t step) {
  std::ostringstream name;
  name << "ckpt-" << std::setw(9) << std::setfill('0') << step << ".natc";
  return dir / name.str();
}

void write_atomically(const std::filesystem::path& path, const TrainingState& state) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  save_training_checkpoint(tmp, state);
  std::filesystem::rename(tmp, path);
}

void prune_checkpoints(const std::filesystem::path& dir, std::size_t keep) {
  std::vector<std::filesystem::path> found;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("ckpt-", 0) == 0 && entry.path().extension() == ".natc") {
      found.push_back(entry.path());
    }
  }
  std::sort(found.begin(), found.end());
  while (found.size() > keep) {
    std::filesystem::remove(found.front());
    found.erase(found.begin());
  }
}

std::size_t decode_limit(std::size_t configured, const Utterance& u) {
  return configured > 0 ? configured : u.frames.size();
}

}  // namespace

void save_training_checkpoint(const std::filesystem::path& path, const TrainingState& state) {
  std::vector<NamedBlock> all = to_named_blocks(state.params);
  const auto m = to_named_blocks(state.adam.m, "adam.m.");
  const auto v = to_named_blocks(state.adam.v, "adam.v.");
  all.insert(all.end(), m.begin(), m.end());
  all.insert(all.end(), v.begin(), v.end());
  all.push_back(scalar_block("adam.t", static_cast<double>(state.adam.t)));
  all.push_back(scalar_block("train.step", static_cast<double>(state.step)));
  write_checkpoint(path, all);
}

TrainingState load_training_checkpoint(const std::filesystem::path& path) {
  const std::vector<NamedBlock> all = read_checkpoint(path);
  TrainingState state;
  state.params = params_from_blocks(all);
  state.adam = make_adam_state(state.params);
  if (find_block(all, "adam.t")) {
    load_into(all, "adam.m.", state.adam.m);
    load_into(all, "adam.v.", state.adam.v);
    state.adam.t = static_cast<std::size_t>(scalar_from(all, "adam.t"));
  }
  if (find_block(all, "train.step")) {
    state.step = static_cast<std::size_t>(scalar_from(all, "train.step"));
  }
  return state;
}

ModelParams load_model(const std::filesystem::path& path) {
  return params_from_blocks(read_checkpoint(path));
}

ModelParams initial_model(const RunConfig& cfg, std::size_t feature_dim,
                          std::size_t vocab_size) {
  if (!cfg.train.seed) throw ConfigError("train.seed is required");
  ModelShape shape = cfg.model;
  shape.feature_dim = feature_dim;
  shape.vocab_size = vocab_size;
  Rng rng(*cfg.train.seed, kInitStream);
  return init_params(shape, rng);
}

std::vector<Hypothesis> decode_all(const ModelParams& params, std::span<const Utterance> utts,
                                   std::size_t max_tokens, bool parallel) {
  std::vector<Hypothesis> hyps(utts.size());
  detail::parallel_for(utts.size(), parallel, [&](std::size_t i) {
    hyps[i] = greedy_decode(params, utts[i].frames, decode_limit(max_tokens, utts[i]));
  });
  return hyps;
}

EvalReport evaluate(const ModelParams& params, std::span<const Utterance> utts,
                    const CollapseMap& collapse, std::size_t max_tokens, bool parallel) {
  const std::vector<Hypothesis> hyps = decode_all(params, utts, max_tokens, parallel);
  std::vector<std::vector<int>> h, r;
  for (std::size_t i = 0; i < utts.size(); ++i) {
    h.push_back(hyps[i].tokens);
    r.push_back(utts[i].targets);
  }
  return score(h, r, collapse);
}

double mean_clustering_score(const ModelParams& params, std::span<const Utterance> utts,
                             std::uint64_t seed) {
  if (utts.empty()) return 0.0;
  const Rng base(seed, kProbeStream);
  double total = 0.0;
  for (std::size_t i = 0; i < utts.size(); ++i) {
    Rng rng = base.substream(i);
    const Trajectory traj = sample_trajectory(params, utts[i].episode(), rng);
    total += clustering_score(traj.emissions);
  }
  return total / static_cast<double>(utts.size());
}

TrainResult train_model(const RunConfig& cfg, std::span<const Utterance> train,
                        std::span<const Utterance> dev, const TrainOutput& out) {
  if (!cfg.train.seed) throw ConfigError("train.seed is required");
  if (train.empty()) throw ConfigError("training set is empty");
  const std::uint64_t seed = *cfg.train.seed;
  const bool files = !out.dir.empty();
  const bool parallel = cfg.train.threads > 1;
  omp_set_num_threads(cfg.train.threads);

  std::size_t vocab = cfg.model.vocab_size;
  if (vocab == 0) {
    int top = 0;
    for (auto set : {train, dev}) {
      for (const auto& u : set) {
        for (int t : u.targets) top = std::max(top, t);
      }
    }
    vocab = static_cast<std::size_t>(top) + 1;
  }
  const std::size_t feature_dim = train.front().frames.front().size();

  TrainResult result;
  TrainingState& state = result.state;
  if (out.resume_from) {
    state = load_training_checkpoint(*out.resume_from);
    if (state.params.feature_dim() != feature_dim || state.params.vocab_size() < vocab) {
      throw ConfigError("checkpoint " + out.resume_from->string() +
                        " does not match the training data dimensions");
    }
    log(LogLevel::kInfo, "resuming from step " + std::to_string(state.step));
  } else {
    state.params = initial_model(cfg, feature_dim, vocab);
    state.adam = make_adam_state(state.params);
  }

  std::ofstream metrics_csv, diag_csv;
  if (files) {
    std::filesystem::create_directories(out.dir);
    if (out.resume_from) {
      truncate_csv(out.dir / "metrics.csv", state.step);
      truncate_csv(out.dir / "diagnostics.csv", state.step);
    } else {
      std::filesystem::remove(out.dir / "metrics.csv");
      std::filesystem::remove(out.dir / "diagnostics.csv");
    }
    metrics_csv = open_csv(out.dir / "metrics.csv", kMetricsHeader);
    diag_csv = open_csv(out.dir / "diagnostics.csv", kDiagnosticsHeader);
  }

  EstimatorConfig est_cfg = cfg.estimator;
  est_cfg.parallel = parallel;
  const Rng noise_base(seed, kNoiseStream);
  const Rng sample_base(seed, kSampleStream);

  std::size_t cached_epoch = static_cast<std::size_t>(-1);
  std::vector<std::size_t> order;
  double reward_acc = 0.0, variance_acc = 0.0;
  std::size_t acc_steps = 0;

  while (state.step < cfg.train.max_steps) {
    const std::size_t step = state.step + 1;
    const std::size_t epoch = (step - 1) / train.size();
    if (epoch != cached_epoch) {
      order = epoch_order(train.size(), seed, epoch);
      cached_epoch = epoch;
    }
    const Utterance& utt = train[order[(step - 1) % train.size()]];

    const double lambda = schedule_value(cfg.schedules.entropy, step);
    const double noise = schedule_value(cfg.schedules.noise_std, step);
    est_cfg.reward.entropy_weight = lambda;

    Rng noise_rng = noise_base.substream(step);
    const ModelParams noisy = apply_weight_noise(state.params, noise, noise_rng);
    const GradEstimate est = policy_gradient(noisy, utt.episode(), est_cfg,
                                             sample_base.substream(step));
    adam_step(state.params, state.adam, est.grad, cfg.optimizer);
    state.step = step;

    reward_acc += est.mean_reward;
    variance_acc += est.mean_score_variance;
    ++acc_steps;
    if (files) {
      diag_csv << step << ',' << est.mean_reward << ',' << est.mean_score_variance << ','
               << lambda << '\n';
    }

    const bool last = step == cfg.train.max_steps;
    if (step % cfg.train.eval_interval == 0 || last) {
      MetricsRow row;
      row.step = step;
      row.mean_reward = reward_acc / static_cast<double>(acc_steps);
      row.score_variance = variance_acc / static_cast<double>(acc_steps);
      row.dev_error = dev.empty() ? 0.0
                                  : evaluate(state.params, dev, out.collapse,
                                             cfg.train.max_decode_tokens, parallel)
                                        .error_rate;
      row.entropy_weight = lambda;
      row.noise_std = noise;
      result.metrics.push_back(row);
      reward_acc = variance_acc = 0.0;
      acc_steps = 0;
      if (files) {
        metrics_csv << row.step << ',' << row.mean_reward << ',' << row.score_variance << ','
                    << row.dev_error << ',' << row.entropy_weight << ',' << row.noise_std
                    << '\n';
        metrics_csv.flush();
        diag_csv.flush();
      }
      std::ostringstream msg;
      msg << "step " << step << " reward " << row.mean_reward << " dev_per "
          << row.dev_error << " lambda " << lambda << " noise " << noise;
      log(LogLevel::kInfo, msg.str());
    }
    if (files && step % cfg.train.checkpoint_interval == 0) {
      write_atomically(checkpoint_path(out.dir, step), state);
      prune_checkpoints(out.dir, cfg.train.keep_checkpoints);
    }
  }

  if (files) write_atomically(out.dir / "final.natc", state);
  result.final_dev_error = result.metrics.empty() ? 0.0 : result.metrics.back().dev_error;
  return result;
}

}  // namespace nat

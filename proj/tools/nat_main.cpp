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

// nat: train, evaluate, trace and verify Neural Autoregressive Transducers.

#include <CLI11.hpp>

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nat/config.hpp"
#include "nat/data.hpp"
#include "nat/error.hpp"
#include "nat/eval.hpp"
#include "nat/log.hpp"
#include "nat/trainer.hpp"
#include "nat/verify.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string checkpoint;
  std::optional<int> threads;
};

nat::RunConfig load_config(const CommonFlags& flags) {
  nat::RunConfig cfg;
  if (!flags.config.empty()) cfg = nat::load_run_config(flags.config);
  if (flags.seed) cfg.train.seed = *flags.seed;
  if (!flags.out.empty()) cfg.train.out_dir = flags.out;
  if (flags.threads) {
    if (*flags.threads < 1) throw nat::ConfigError("--threads must be at least 1");
    cfg.train.threads = *flags.threads;
  }
  return cfg;
}

void require_file(const fs::path& path, const std::string& what) {
  if (path.empty()) throw nat::ConfigError(what + " is required");
  if (!fs::exists(path)) throw nat::ConfigError(what + " not found: " + path.string());
}

std::vector<nat::Utterance> load_split(const fs::path& path, std::size_t stack) {
  return nat::stack_dataset(nat::read_dataset(path), stack);
}

std::size_t infer_vocab(const nat::RunConfig& cfg, std::span<const nat::Utterance> utts) {
  if (cfg.model.vocab_size != 0) return cfg.model.vocab_size;
  int top = 0;
  for (const auto& u : utts) {
    for (int t : u.targets) top = std::max(top, t);
  }
  return static_cast<std::size_t>(top) + 1;
}

nat::CollapseMap load_collapse(const nat::RunConfig& cfg, std::size_t vocab_size) {
  if (cfg.data.collapse.empty()) return {};
  std::vector<std::string> vocabulary;
  if (!cfg.data.vocab.empty()) vocabulary = nat::read_vocabulary(cfg.data.vocab);
  return nat::CollapseMap::load(cfg.data.collapse, vocab_size, vocabulary);
}

std::string join_tokens(std::span<const int> tokens) {
  std::string s;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(tokens[i]);
  }
  return s;
}

int cmd_train(const CommonFlags& flags) {
  nat::RunConfig cfg = load_config(flags);
  nat::require_training_inputs(cfg);
  const auto train = load_split(cfg.data.train, cfg.data.stack);
  const auto dev = load_split(cfg.data.dev, cfg.data.stack);
  std::vector<nat::Utterance> all(train);
  all.insert(all.end(), dev.begin(), dev.end());

  nat::TrainOutput out;
  out.dir = cfg.train.out_dir;
  out.collapse = load_collapse(cfg, infer_vocab(cfg, all));
  if (!flags.checkpoint.empty()) {
    require_file(flags.checkpoint, "checkpoint");
    out.resume_from = fs::path(flags.checkpoint);
  }
  const nat::TrainResult result = nat::train_model(cfg, train, dev, out);
  std::cout << "step " << result.state.step << " dev_per " << result.final_dev_error
            << "\n";
  return kExitOk;
}

int cmd_eval(const CommonFlags& flags, const std::string& data_flag, bool refs_as_hyps) {
  nat::RunConfig cfg = load_config(flags);
  const fs::path data = data_flag.empty() ? cfg.data.dev : fs::path(data_flag);
  require_file(data, "dataset");
  const auto utts = load_split(data, cfg.data.stack);

  std::vector<std::vector<int>> refs, hyps;
  for (const auto& u : utts) refs.push_back(u.targets);
  std::size_t vocab = infer_vocab(cfg, utts);
  if (refs_as_hyps) {
    hyps = refs;
  } else {
    require_file(flags.checkpoint, "checkpoint");
    const nat::ModelParams params = nat::load_model(flags.checkpoint);
    if (params.feature_dim() != utts.front().frames.front().size()) {
      throw nat::ConfigError("checkpoint feature size does not match the dataset");
    }
    vocab = std::max(vocab, params.vocab_size());
    omp_set_num_threads(cfg.train.threads);
    for (auto& h : nat::decode_all(params, utts, cfg.train.max_decode_tokens,
                                   cfg.train.threads > 1)) {
      hyps.push_back(std::move(h.tokens));
    }
  }
  const nat::CollapseMap collapse = load_collapse(cfg, vocab);
  const nat::EvalReport report = nat::score(hyps, refs, collapse);

  fs::create_directories(cfg.train.out_dir);
  const fs::path report_path = cfg.train.out_dir / "eval_report.csv";
  std::ofstream csv(report_path);
  if (!csv) throw nat::IoError("cannot write " + report_path.string());
  csv << "id,ref_len,substitutions,insertions,deletions,error_rate,hypothesis\n";
  for (std::size_t i = 0; i < utts.size(); ++i) {
    const nat::EvalReport one = nat::score(std::span(hyps).subspan(i, 1),
                                           std::span(refs).subspan(i, 1), collapse);
    csv << utts[i].id << ',' << one.reference_length << ',' << one.substitutions << ','
        << one.insertions << ',' << one.deletions << ',' << one.error_rate << ','
        << join_tokens(hyps[i]) << '\n';
  }
  std::cout << "PER " << std::fixed << std::setprecision(4) << report.error_rate << " (S "
            << report.substitutions << " I " << report.insertions << " D "
            << report.deletions << " N " << report.reference_length << ")\n";
  return kExitOk;
}

int cmd_trace(const CommonFlags& flags, const std::string& data_flag, const std::string& utt_id,
              std::size_t chars_per_step) {
  nat::RunConfig cfg = load_config(flags);
  const fs::path data = data_flag.empty() ? cfg.data.dev : fs::path(data_flag);
  require_file(data, "dataset");
  require_file(flags.checkpoint, "checkpoint");
  const auto utts = load_split(data, cfg.data.stack);
  const auto it = std::find_if(utts.begin(), utts.end(),
                               [&](const nat::Utterance& u) { return u.id == utt_id; });
  if (it == utts.end()) throw nat::ConfigError("utterance not found: " + utt_id);
  const nat::ModelParams params = nat::load_model(flags.checkpoint);

  nat::Rng rng(cfg.train.seed.value_or(0), 6);
  const auto rows = nat::export_emission_probs(params, it->episode(), rng);
  std::vector<int> emissions;
  for (const auto& r : rows) emissions.push_back(r.emitted);
  std::cout << nat::render_trace(emissions, chars_per_step) << "\n";

  fs::create_directories(cfg.train.out_dir);
  const fs::path csv_path = cfg.train.out_dir / ("trace-" + utt_id + ".csv");
  std::ofstream csv(csv_path);
  if (!csv) throw nat::IoError("cannot write " + csv_path.string());
  nat::write_emission_csv(rows, csv);
  return kExitOk;
}

int cmd_gen(const CommonFlags& flags) {
  nat::RunConfig cfg = load_config(flags);
  if (flags.seed) cfg.gen.seed = *flags.seed;
  auto utts = nat::gen_synthetic(cfg.gen, cfg.gen_count + cfg.gen_dev_count);
  const std::vector<nat::Utterance> train(utts.begin(), utts.begin() + cfg.gen_count);
  const std::vector<nat::Utterance> dev(utts.begin() + cfg.gen_count, utts.end());
  fs::create_directories(cfg.train.out_dir);
  nat::write_dataset(train, cfg.train.out_dir / "train.natd");
  nat::write_dataset(dev, cfg.train.out_dir / "dev.natd");
  std::cout << "wrote " << train.size() << " train and " << dev.size()
            << " dev utterances to " << cfg.train.out_dir.string() << "\n";
  return kExitOk;
}

std::map<std::string, std::string> read_pairings(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw nat::IoError("cannot read " + path.string());
  std::map<std::string, std::string> pairs;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string a, b, extra;
    if (!(fields >> a)) continue;
    if (!(fields >> b) || (fields >> extra)) {
      throw nat::ConfigError(path.string() + ": expected '<primary> <secondary>': " + line);
    }
    pairs[a] = b;
  }
  return pairs;
}

int cmd_mix(const std::string& primary_path, const std::string& secondary_path,
            double proportion, const std::string& pairings, std::size_t rotation,
            const std::string& out_path) {
  require_file(primary_path, "primary dataset");
  require_file(secondary_path, "secondary dataset");
  if (out_path.empty()) throw nat::ConfigError("--out is required");
  const auto primary = nat::read_dataset(primary_path);
  const auto secondary = nat::read_dataset(secondary_path);
  nat::MixSpec spec;
  spec.proportion = proportion;
  if (!pairings.empty()) {
    require_file(pairings, "pairing file");
    spec.pairing = read_pairings(pairings);
  } else {
    spec.pairing = nat::pair_by_index(primary, secondary, rotation);
  }
  const auto mixed = nat::mix_dataset(primary, secondary, spec);
  if (fs::path(out_path).has_parent_path()) fs::create_directories(fs::path(out_path).parent_path());
  nat::write_dataset(mixed, out_path);
  std::cout << "wrote " << mixed.size() << " mixed utterances to " << out_path << "\n";
  return kExitOk;
}

int cmd_check(const CommonFlags& flags, bool corrupt) {
  const nat::RunConfig cfg = load_config(flags);
  nat::CheckOptions opts;
  opts.seed = cfg.train.seed.value_or(1);
  opts.unbiased_draws = cfg.check.draws;
  opts.neutrality_draws = cfg.check.draws;
  opts.law_samples = cfg.check.law_samples;
  opts.variance_draws = cfg.check.variance_draws;
  if (corrupt) opts.gradient_scale = 1.01;

  std::size_t failed = 0;
  std::string first_failure;
  for (const auto& r : nat::run_check_battery(opts)) {
    std::cout << (r.passed ? "PASS  " : "FAIL  ") << std::left << std::setw(54) << r.name
              << r.detail << "\n";
    if (!r.passed && failed++ == 0) first_failure = r.name;
  }
  if (failed > 0) {
    std::cerr << "nat: check-failed: " << first_failure
              << (failed > 1 ? " (and " + std::to_string(failed - 1) + " more)" : "")
              << "\n";
    return kExitCheckFailed;
  }
  return kExitOk;
}

int exit_code_for(const nat::Error& e) {
  return dynamic_cast<const nat::NumericError*>(&e) ? kExitNumeric : kExitUsage;
}

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural Autoregressive Transducer toolkit"};
  app.require_subcommand(1);
  CommonFlags flags;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "key = value run configuration");
    sub->add_option("--seed", flags.seed, "seed for all random streams");
    sub->add_option("--out", flags.out, "output directory");
    sub->add_option("--checkpoint", flags.checkpoint, "checkpoint to load or resume from");
    sub->add_option("--threads", flags.threads, "worker threads");
  };

  auto* train = app.add_subcommand("train", "train a model");
  add_common(train);

  std::string data;
  bool refs_as_hyps = false;
  auto* eval = app.add_subcommand("eval", "greedy-decode a dataset and report PER");
  add_common(eval);
  eval->add_option("--data", data, "dataset (defaults to data.dev)");
  eval->add_flag("--reference-hypotheses", refs_as_hyps,
                 "score the references against themselves");

  std::string utt;
  std::size_t chars_per_step = 3;
  auto* trace = app.add_subcommand("trace", "print an emission trace for one utterance");
  add_common(trace);
  trace->add_option("--data", data, "dataset (defaults to data.dev)");
  trace->add_option("--utt", utt, "utterance id")->required();
  trace->add_option("--chars-per-step", chars_per_step, "input steps per character")
      ->check(CLI::PositiveNumber);

  auto* gen = app.add_subcommand("gen", "write synthetic train.natd and dev.natd");
  add_common(gen);

  std::string primary, secondary, pairings, mix_out;
  double proportion = 0.0;
  std::size_t rotation = 1;
  auto* mix = app.add_subcommand("mix", "mix two datasets at a fixed proportion");
  mix->add_option("primary", primary, "dataset providing the labels")->required();
  mix->add_option("secondary", secondary, "interfering dataset")->required();
  mix->add_option("--proportion", proportion, "secondary weight in [0, 1)")->required();
  mix->add_option("--pairings", pairings, "'<primary-id> <secondary-id>' per line");
  mix->add_option("--rotation", rotation, "index offset when pairing by position");
  mix->add_option("--out", mix_out, "output dataset")->required();

  bool corrupt = false;
  auto* check = app.add_subcommand("check", "run the verification battery");
  add_common(check);
  check->add_flag("--corrupt-gradient", corrupt, "perturb analytic gradients (harness test)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "nat: usage: " << one_line(e.what()) << "\n";
    return kExitUsage;
  }

  try {
    if (*train) return cmd_train(flags);
    if (*eval) return cmd_eval(flags, data, refs_as_hyps);
    if (*trace) return cmd_trace(flags, data, utt, chars_per_step);
    if (*gen) return cmd_gen(flags);
    if (*mix) return cmd_mix(primary, secondary, proportion, pairings, rotation, mix_out);
    if (*check) return cmd_check(flags, corrupt);
  } catch (const nat::Error& e) {
    std::cerr << "nat: " << e.category() << ": " << one_line(e.what()) << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "nat: internal: " << one_line(e.what()) << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

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

// Acceptance suite. Each criterion prints exactly one PASS or FAIL line;
// the exit status is nonzero if any selected criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nat/config.hpp"
#include "nat/data.hpp"
#include "nat/log.hpp"
#include "nat/trainer.hpp"
#include "nat/verify.hpp"

namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  std::function<Outcome()> run;
};

Outcome from_check(const nat::CheckResult& r) { return {r.passed, r.detail}; }

nat::CheckOptions full_size_options() {
  nat::CheckOptions opts;
  opts.seed = 1;
  opts.enumeration_instances = 20;
  opts.law_instances = 5;
  opts.law_samples = 100000;
  opts.unbiased_draws = 200000;
  opts.unbiased_k = {2, 16};
  opts.unbiased_components = 20;
  opts.variance_instances = 10;
  opts.variance_k = 16;
  opts.edit_pairs = 1000;
  return opts;
}

fs::path config_dir() { return fs::path(NAT_CONFIG_DIR); }

struct Split {
  std::vector<nat::Utterance> train;
  std::vector<nat::Utterance> dev;
};

// Same generation and split as `nat gen`, then frame stacking.
Split synthetic_split(const nat::RunConfig& cfg) {
  const auto utts = nat::gen_synthetic(cfg.gen, cfg.gen_count + cfg.gen_dev_count);
  Split raw;
  raw.train.assign(utts.begin(), utts.begin() + static_cast<std::ptrdiff_t>(cfg.gen_count));
  raw.dev.assign(utts.begin() + static_cast<std::ptrdiff_t>(cfg.gen_count), utts.end());
  return raw;
}

Split stacked(const Split& s, std::size_t k) {
  return {nat::stack_dataset(s.train, k), nat::stack_dataset(s.dev, k)};
}

// Each split is mixed with itself under a fixed index rotation.
Split mixed(const Split& s, double proportion) {
  auto mix_one = [&](const std::vector<nat::Utterance>& utts) {
    nat::MixSpec spec;
    spec.proportion = proportion;
    spec.pairing = nat::pair_by_index(utts, utts, 1);
    return nat::mix_dataset(utts, utts, spec);
  };
  return {mix_one(s.train), mix_one(s.dev)};
}

double mean_frames(const std::vector<nat::Utterance>& utts) {
  double total = 0.0;
  for (const auto& u : utts) total += static_cast<double>(u.frames.size());
  return utts.empty() ? 0.0 : total / static_cast<double>(utts.size());
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(precision);
  s << v;
  return s.str();
}

Outcome end_to_end_learning() {
  const nat::RunConfig cfg = nat::load_run_config(config_dir() / "clean.cfg");
  const Split data = stacked(synthetic_split(cfg), cfg.data.stack);
  if (cfg.train.max_steps > 20000) return {false, "pinned config exceeds 20k steps"};
  const auto result = nat::train_model(cfg, data.train, data.dev);
  std::ostringstream d;
  d << "dev error " << fmt(result.final_dev_error) << " after " << result.state.step
    << " steps, mean T1 " << fmt(mean_frames(data.dev), 1) << ", threshold 0.05";
  return {result.final_dev_error <= 0.05, d.str()};
}

Outcome entropy_effect() {
  nat::RunConfig cfg = nat::load_run_config(config_dir() / "clean.cfg");
  cfg.train.max_steps = 5000;
  cfg.train.eval_interval = cfg.train.max_steps;
  const Split data = stacked(synthetic_split(cfg), cfg.data.stack);
  std::vector<double> with_schedule;
  std::vector<double> without;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    nat::RunConfig run = cfg;
    run.train.seed = seed;
    with_schedule.push_back(nat::mean_clustering_score(
        nat::train_model(run, data.train, data.dev).state.params, data.dev, seed));
    run.schedules.entropy = {0.0, 0.0, 0, 1};
    without.push_back(nat::mean_clustering_score(
        nat::train_model(run, data.train, data.dev).state.params, data.dev, seed));
  }
  const double a = median(with_schedule);
  const double b = median(without);
  std::ostringstream d;
  d << "median clustering " << fmt(a) << " with schedule vs " << fmt(b) << " at lambda=0";
  return {a < b, d.str()};
}

Outcome mixing_trend() {
  nat::RunConfig cfg = nat::load_run_config(config_dir() / "mixed.cfg");
  cfg.train.eval_interval = cfg.train.max_steps;
  const Split raw = synthetic_split(cfg);
  const std::vector<double> proportions = {0.1, 0.25, 0.5};
  std::vector<Split> sets;
  for (double p : proportions) sets.push_back(stacked(mixed(raw, p), cfg.data.stack));
  int monotone_seeds = 0;
  std::ostringstream d;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    std::vector<double> errors;
    for (const auto& s : sets) {
      nat::RunConfig run = cfg;
      run.train.seed = seed;
      errors.push_back(nat::train_model(run, s.train, s.dev).final_dev_error);
    }
    const bool monotone = std::is_sorted(errors.begin(), errors.end());
    monotone_seeds += monotone ? 1 : 0;
    d << "seed " << seed << " [" << fmt(errors[0]) << " " << fmt(errors[1]) << " "
      << fmt(errors[2]) << "]" << (monotone ? "" : "*") << " ";
  }
  d << "monotone " << monotone_seeds << "/3";
  return {monotone_seeds >= 2, d.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_nat(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(NAT_BINARY) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "nat_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  fs::copy_file(config_dir() / "determinism.cfg", dir / "run.cfg");
  const std::string cfg = "--config " + (dir / "run.cfg").string();
  const fs::path log = dir / "log.txt";
  if (run_nat("gen " + cfg + " --out " + (dir / "data").string(), log) != 0) {
    return {false, "gen failed: " + slurp(log)};
  }
  for (const auto& [name, threads] : {std::pair{"a", 1}, std::pair{"b", 1}, std::pair{"c", 4}}) {
    const std::string args = "train " + cfg + " --out " + (dir / name).string() +
                             " --threads " + std::to_string(threads);
    if (run_nat(args, log) != 0) return {false, std::string("train ") + name + " failed: " + slurp(log)};
  }
  const std::string ckpt_a = slurp(dir / "a" / "final.natc");
  const bool metrics_same = slurp(dir / "a" / "metrics.csv") == slurp(dir / "b" / "metrics.csv");
  const bool ckpt_same = !ckpt_a.empty() && ckpt_a == slurp(dir / "b" / "final.natc");
  const bool threads_same = ckpt_a == slurp(dir / "c" / "final.natc");
  std::ostringstream d;
  d << "metrics " << (metrics_same ? "identical" : "differ") << ", checkpoints "
    << (ckpt_same ? "identical" : "differ") << ", 4-thread checkpoint "
    << (threads_same ? "identical" : "differs");
  fs::remove_all(dir);
  return {metrics_same && ckpt_same && threads_same, d.str()};
}

std::vector<Criterion> criteria() {
  const nat::CheckOptions opts = full_size_options();
  return {
      {1, "enumeration-normalization",
       [=] { return from_check(nat::check_enumeration_normalization(opts)); }},
      {2, "trajectory-law", [=] { return from_check(nat::check_trajectory_law(opts)); }},
      {3, "supervised-gradient", [=] { return from_check(nat::check_supervised_gradient(opts)); }},
      {4, "expected-reward-gradient",
       [=] { return from_check(nat::check_expected_reward_gradient(opts)); }},
      {5, "estimator-unbiasedness", [=] { return from_check(nat::check_unbiasedness(opts)); }},
      {6, "loo-variance-reduction",
       [=] { return from_check(nat::check_variance_reduction(opts)); }},
      {7, "schedule-anchors", [] { return from_check(nat::check_schedule_anchors()); }},
      {8, "end-to-end-learning", end_to_end_learning},
      {9, "entropy-clustering-effect", entropy_effect},
      {10, "mixing-degradation-trend", mixing_trend},
      {11, "levenshtein-oracle", [=] { return from_check(nat::check_levenshtein_oracle(opts)); }},
      {12, "determinism", determinism},
  };
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nat acceptance criteria"};
  std::vector<int> only;
  bool list = false;
  app.add_option("--only", only, "run just these criteria (repeatable)");
  app.add_flag("--list", list, "print criterion ids and names");
  CLI11_PARSE(app, argc, argv);

  nat::set_log_level(nat::LogLevel::kError);
  const std::set<int> selected(only.begin(), only.end());
  int failures = 0;
  for (const auto& c : criteria()) {
    if (!selected.empty() && selected.count(c.id) == 0) continue;
    if (list) {
      std::cout << c.id << " " << c.name << "\n";
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += out.passed ? 0 : 1;
    std::printf("[%2d] %s  %-26s %s (%.1f s)\n", c.id, out.passed ? "PASS" : "FAIL",
                c.name.c_str(), out.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}

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

#include "nat/config.hpp"

#include <fstream>
#include <sstream>

#include "nat/error.hpp"

namespace nat {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text, const std::string& origin) {
  KeyValueConfig kv;
  kv.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
    if (kv.values_.count(key)) {
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": duplicate key " + key);
    }
    kv.values_[key] = value;
  }
  return kv;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  KeyValueConfig kv = parse(buf.str(), path.string());
  kv.base_dir_ = path.parent_path();
  return kv;
}

std::optional<std::string> KeyValueConfig::find(const std::string& key) const {
  used_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) const {
  return find(key).value_or(fallback);
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  const auto v = find(key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    const double d = std::stod(*v, &used);
    if (used == v->size()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError(origin_ + ": " + key + " is not a number: '" + *v + "'");
}

std::uint64_t KeyValueConfig::get_uint(const std::string& key,
                                       std::uint64_t fallback) const {
  const auto v = find(key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    if (!v->empty() && (*v)[0] != '-') {
      const unsigned long long u = std::stoull(*v, &used);
      if (used == v->size()) return u;
    }
  } catch (const std::exception&) {
  }
  throw ConfigError(origin_ + ": " + key + " is not a non-negative integer: '" + *v + "'");
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  const auto v = find(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ConfigError(origin_ + ": " + key + " is not a boolean: '" + *v + "'");
}

void KeyValueConfig::reject_unknown() const {
  for (const auto& [key, value] : values_) {
    if (!used_.count(key)) throw ConfigError(origin_ + ": unknown key " + key);
  }
}

RunConfig run_config_from(const KeyValueConfig& kv) {
  RunConfig c;
  auto path = [&kv](const std::string& key) -> std::filesystem::path {
    const std::string v = kv.get_string(key, "");
    if (v.empty()) return {};
    std::filesystem::path p(v);
    return p.is_relative() ? kv.base_dir() / p : p;
  };

  c.model.num_layers = kv.get_uint("model.layers", 2);
  c.model.hidden_size = kv.get_uint("model.hidden", 256);
  c.model.embed_size = kv.get_uint("model.embed", 16);
  c.model.vocab_size = kv.get_uint("model.vocab", 0);
  c.model.feature_dim = 0;

  try {
    c.estimator.num_samples = kv.get_uint("estimator.K", 16);
    c.estimator.baseline = parse_baseline_kind(kv.get_string("estimator.baseline", "loo"));
    c.estimator.reward.entropy_mode =
        parse_entropy_mode(kv.get_string("estimator.entropy_mode", "symmetric"));
  } catch (const InvalidArgument& e) {
    throw ConfigError(kv.origin() + ": " + e.what());
  }
  if (kv.find("estimator.kl_target_rate")) {
    c.estimator.reward.kl_target_rate = kv.get_double("estimator.kl_target_rate", 0.0);
  }
  c.estimator.reward.kl_weight = kv.get_double("estimator.kl_weight", 0.0);
  if (c.estimator.reward.kl_weight != 0.0 && !c.estimator.reward.kl_target_rate) {
    throw ConfigError(kv.origin() + ": estimator.kl_weight needs estimator.kl_target_rate");
  }

  c.optimizer.lr = kv.get_double("optimizer.lr", 7e-5);
  c.optimizer.beta1 = kv.get_double("optimizer.beta1", 0.9);
  c.optimizer.beta2 = kv.get_double("optimizer.beta2", 0.999);
  c.optimizer.epsilon = kv.get_double("optimizer.epsilon", 1e-8);
  c.optimizer.l2_weight = kv.get_double("optimizer.l2", 0.001);
  c.optimizer.clip_norm = kv.get_double("optimizer.clip_norm", 0.0);
  c.schedules.lr = c.optimizer.lr;
  c.schedules.l2_weight = c.optimizer.l2_weight;

  auto ramp = [&kv](const std::string& prefix, LinearRamp r) {
    r.start = kv.get_double(prefix + ".start", r.start);
    r.end = kv.get_double(prefix + ".end", r.end);
    r.ramp_begin = kv.get_uint(prefix + ".ramp_begin", r.ramp_begin);
    r.ramp_end = kv.get_uint(prefix + ".ramp_end", r.ramp_end);
    return r;
  };
  c.schedules.entropy = ramp("schedule.entropy", c.schedules.entropy);
  c.schedules.noise_std = ramp("schedule.noise", c.schedules.noise_std);

  c.data.train = path("data.train");
  c.data.dev = path("data.dev");
  c.data.collapse = path("data.collapse");
  c.data.vocab = path("data.vocab");
  c.data.stack = kv.get_uint("data.stack", 3);

  if (kv.find("train.seed")) c.train.seed = kv.get_uint("train.seed", 0);
  c.train.max_steps = kv.get_uint("train.max_steps", c.train.max_steps);
  c.train.eval_interval = kv.get_uint("train.eval_interval", c.train.eval_interval);
  c.train.checkpoint_interval =
      kv.get_uint("train.checkpoint_interval", c.train.checkpoint_interval);
  c.train.keep_checkpoints = kv.get_uint("train.keep_checkpoints", c.train.keep_checkpoints);
  if (const auto out = path("train.out_dir"); !out.empty()) c.train.out_dir = out;
  c.train.threads = static_cast<int>(kv.get_uint("train.threads", 1));
  c.train.max_decode_tokens = kv.get_uint("train.max_decode_tokens", 0);

  c.gen.vocab_size = kv.get_uint("gen.vocab", c.gen.vocab_size);
  c.gen.min_tokens = kv.get_uint("gen.min_tokens", c.gen.min_tokens);
  c.gen.max_tokens = kv.get_uint("gen.max_tokens", c.gen.max_tokens);
  c.gen.min_frames = kv.get_uint("gen.min_frames", c.gen.min_frames);
  c.gen.max_frames = kv.get_uint("gen.max_frames", c.gen.max_frames);
  c.gen.feature_dim = kv.get_uint("gen.dim", c.gen.feature_dim);
  c.gen.noise_std = kv.get_double("gen.noise", c.gen.noise_std);
  c.gen.distinct_adjacent = kv.get_bool("gen.distinct_adjacent", c.gen.distinct_adjacent);
  c.gen.seed = kv.get_uint("gen.seed", c.gen.seed);
  c.gen_count = kv.get_uint("gen.count", c.gen_count);
  c.gen_dev_count = kv.get_uint("gen.dev_count", c.gen_dev_count);

  c.check.draws = kv.get_uint("check.draws", c.check.draws);
  c.check.law_samples = kv.get_uint("check.law_samples", c.check.law_samples);
  c.check.variance_draws = kv.get_uint("check.variance_draws", c.check.variance_draws);

  kv.reject_unknown();

  if (c.data.stack < 1) throw ConfigError(kv.origin() + ": data.stack must be >= 1");
  if (c.train.eval_interval < 1 || c.train.checkpoint_interval < 1) {
    throw ConfigError(kv.origin() + ": intervals must be >= 1");
  }
  if (c.train.threads < 1) throw ConfigError(kv.origin() + ": train.threads must be >= 1");
  try {
    validate(c.estimator);
    validate(c.schedules.entropy);
    validate(c.schedules.noise_std);
  } catch (const InvalidArgument& e) {
    throw ConfigError(kv.origin() + ": " + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return run_config_from(KeyValueConfig::load(path));
}

void require_training_inputs(const RunConfig& cfg) {
  if (!cfg.train.seed) throw ConfigError("train.seed is required (set it or pass --seed)");
  for (const auto& [key, p] : {std::pair{"data.train", cfg.data.train},
                               std::pair{"data.dev", cfg.data.dev}}) {
    if (p.empty()) throw ConfigError(std::string(key) + " is required");
    if (!std::filesystem::exists(p)) {
      throw ConfigError(std::string(key) + " file not found: " + p.string());
    }
  }
  for (const auto& p : {cfg.data.collapse, cfg.data.vocab}) {
    if (!p.empty() && !std::filesystem::exists(p)) {
      throw ConfigError("file not found: " + p.string());
    }
  }
}

}  // namespace nat

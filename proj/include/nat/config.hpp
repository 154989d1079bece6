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

#ifndef NAT_CONFIG_HPP_
#define NAT_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "nat/data.hpp"
#include "nat/estimator.hpp"
#include "nat/network.hpp"
#include "nat/optimizer.hpp"

namespace nat {

// Line-based `key = value` file with dotted keys; '#' starts a comment.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text, const std::string& origin = "<string>");
  static KeyValueConfig load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::uint64_t get_uint(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::optional<std::string> find(const std::string& key) const;

  // Throws ConfigError naming the first key never read through a getter.
  void reject_unknown() const;

  const std::string& origin() const { return origin_; }
  std::filesystem::path base_dir() const { return base_dir_; }

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
  std::string origin_;
  std::filesystem::path base_dir_;
};

struct DataConfig {
  std::filesystem::path train;
  std::filesystem::path dev;
  std::filesystem::path collapse;
  std::filesystem::path vocab;
  std::size_t stack = 3;
};

struct TrainConfig {
  std::optional<std::uint64_t> seed;
  std::size_t max_steps = 1000;
  std::size_t eval_interval = 100;
  std::size_t checkpoint_interval = 1000;
  std::size_t keep_checkpoints = 3;
  std::filesystem::path out_dir = "nat-out";
  int threads = 1;
  // 0 means the number of input frames.
  std::size_t max_decode_tokens = 0;
};

struct CheckConfig {
  std::size_t draws = 20000;
  std::size_t law_samples = 20000;
  std::size_t variance_draws = 1000;
};

struct RunConfig {
  ModelShape model;  // feature_dim / vocab_size of 0 are inferred from data
  EstimatorConfig estimator;
  AdamOptions optimizer;
  Schedules schedules;
  DataConfig data;
  TrainConfig train;
  SyntheticTaskSpec gen;
  std::size_t gen_count = 100;
  std::size_t gen_dev_count = 20;
  CheckConfig check;
};

// Reads every known key, applying defaults. Relative paths resolve against
// the config file's directory. Throws ConfigError on malformed or unknown
// keys.
RunConfig run_config_from(const KeyValueConfig& kv);
RunConfig load_run_config(const std::filesystem::path& path);

// Throws ConfigError unless the seed is set and the data files exist.
void require_training_inputs(const RunConfig& cfg);

}  // namespace nat

#endif  // NAT_CONFIG_HPP_

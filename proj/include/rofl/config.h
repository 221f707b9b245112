// Copyright 2026 The rofl-lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Scenario configuration.
//
// A scenario is a JSON document (comments allowed) of nested tables; every
// key is optional and documented with its default in docs/config.md.
// Loading is strict: unknown keys and invalid values raise ConfigError
// naming the key path.

#ifndef ROFL_CONFIG_H_
#define ROFL_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>

#include "json.hpp"
#include "rofl/aggregators.h"
#include "rofl/attacks.h"
#include "rofl/group.h"
#include "rofl/model.h"

namespace rofl {

enum class ProtocolMode { kPlaintext, kCrypto };
ProtocolMode parse_mode(const std::string& name);
std::string to_string(ProtocolMode mode);

enum class AbortPolicy { kStop, kContinue };
AbortPolicy parse_abort_policy(const std::string& name);
std::string to_string(AbortPolicy policy);

struct PopulationSpec {
  std::size_t honest = 20;
  std::size_t adversaries = 0;
  std::size_t sample_size = 10;
  friend bool operator==(const PopulationSpec&, const PopulationSpec&) = default;
};

struct DataSpec {
  std::string source = "synthetic";  // synthetic | optdigits
  std::string path;                  // optdigits file
  std::size_t samples = 6000;
  std::size_t test_samples = 2000;
  std::size_t features = 20;
  std::size_t classes = 3;
  double tail_fraction = 0.02;
  double separation = 4.0;
  int backdoor_target = 1;
  int tail_class = 0;  // optdigits only
  std::size_t backdoor_samples = 60;
  std::string cache_path;
  friend bool operator==(const DataSpec&, const DataSpec&) = default;
};

struct CryptoSpec {
  GroupProfile group = GroupProfile::kStandard;
  unsigned bits = 16;
  double range = 4.0;
  friend bool operator==(const CryptoSpec&, const CryptoSpec&) = default;
};

struct OutputSpec {
  std::string dir = "out";
  bool transcripts = false;
  AbortPolicy abort_policy = AbortPolicy::kStop;
  friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

struct ScenarioConfig {
  std::uint64_t seed = 1;
  std::uint64_t rounds = 30;
  ProtocolMode mode = ProtocolMode::kPlaintext;
  std::size_t threads = 1;
  PopulationSpec population;
  Architecture arch = Architecture::kLogReg;
  std::size_t hidden = 16;
  DataSpec data;
  TrainConfig training;
  AggregatorSpec aggregator;
  AttackSpec attack;
  CryptoSpec crypto;
  OutputSpec output;

  ModelSpec model_spec() const;
  // Cross-field checks; throws ConfigError with the key path.
  void validate() const;
  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

bool is_linear(const AggregatorSpec& spec);

ScenarioConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScenarioConfig& config);

ScenarioConfig parse_config(const std::string& text);
// Throws IoError when the file cannot be read.
ScenarioConfig load_config(const std::filesystem::path& path);
// Every key with its effective value.
std::string dump_config(const ScenarioConfig& config);

// Sets a dotted key ("aggregator.multiplier") in a JSON document. `value`
// is parsed as JSON when possible and kept as a string otherwise.
void set_dotted(nlohmann::json& j, const std::string& key, const std::string& value);

}  // namespace rofl

#endif  // ROFL_CONFIG_H_

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

#include "rofl/config.h"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "rofl/errors.h"
#include "rofl/group.h"

namespace rofl {
namespace {

using nlohmann::json;

// Walks one JSON object, remembering which keys were read so the rest can
// be reported as unknown.
class Table {
 public:
  Table(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where("") + "expected a table");
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    used_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    read(*it, key, out);
  }

  template <typename E, typename Parse>
  void get_enum(const std::string& key, E& out, Parse parse) {
    std::string name;
    get(key, name);
    if (!j_.contains(key)) return;
    try {
      out = parse(name);
    } catch (const ConfigError& e) {
      throw ConfigError(where(key) + e.what());
    }
  }

  Table sub(const std::string& key) {
    used_.insert(key);
    auto it = j_.find(key);
    static const json kEmpty = json::object();
    return Table(it == j_.end() ? kEmpty : *it, path_.empty() ? key : path_ + "." + key);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw ConfigError(where(it.key()) + "unknown key");
    }
  }

 private:
  std::string where(const std::string& key) const {
    std::string p = path_;
    if (!key.empty()) p += (p.empty() ? "" : ".") + key;
    return p.empty() ? "" : p + ": ";
  }

  void read(const json& v, const std::string& key, bool& out) {
    if (!v.is_boolean()) throw ConfigError(where(key) + "expected true or false");
    out = v.get<bool>();
  }
  void read(const json& v, const std::string& key, std::string& out) {
    if (!v.is_string()) throw ConfigError(where(key) + "expected a string");
    out = v.get<std::string>();
  }
  void read(const json& v, const std::string& key, double& out) {
    if (!v.is_number()) throw ConfigError(where(key) + "expected a number");
    out = v.get<double>();
  }
  void read(const json& v, const std::string& key, int& out) {
    if (!v.is_number_integer()) throw ConfigError(where(key) + "expected an integer");
    const auto x = v.get<std::int64_t>();
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
      throw ConfigError(where(key) + "integer out of range");
    }
    out = static_cast<int>(x);
  }
  void read(const json& v, const std::string& key, std::uint64_t& out) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
      throw ConfigError(where(key) + "expected a non-negative integer");
    }
    out = v.get<std::uint64_t>();
  }
  void read(const json& v, const std::string& key, unsigned& out) {
    std::uint64_t x = 0;
    read(v, key, x);
    if (x > std::numeric_limits<unsigned>::max()) throw ConfigError(where(key) + "integer out of range");
    out = static_cast<unsigned>(x);
  }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

}  // namespace

ProtocolMode parse_mode(const std::string& name) {
  if (name == "plaintext") return ProtocolMode::kPlaintext;
  if (name == "crypto") return ProtocolMode::kCrypto;
  throw ConfigError("unknown mode '" + name + "' (expected plaintext|crypto)");
}

std::string to_string(ProtocolMode mode) { return mode == ProtocolMode::kPlaintext ? "plaintext" : "crypto"; }

AbortPolicy parse_abort_policy(const std::string& name) {
  if (name == "stop") return AbortPolicy::kStop;
  if (name == "continue") return AbortPolicy::kContinue;
  throw ConfigError("unknown abort policy '" + name + "' (expected stop|continue)");
}

std::string to_string(AbortPolicy policy) { return policy == AbortPolicy::kStop ? "stop" : "continue"; }

ModelSpec ScenarioConfig::model_spec() const {
  ModelSpec m;
  m.arch = arch;
  m.hidden = hidden;
  if (data.source == "optdigits") {
    m.features = 64;
    m.classes = 10;
  } else {
    m.features = data.features;
    m.classes = data.classes;
  }
  return m;
}

bool is_linear(const AggregatorSpec& spec) {
  switch (spec.kind) {
    case AggregatorKind::kFedAvg:
      return true;
    case AggregatorKind::kNormBoundStatic:
    case AggregatorKind::kNormBoundDynamic:
      return spec.mode == BoundMode::kReject;
    default:
      return false;
  }
}

void ScenarioConfig::validate() const {
  if (threads < 1) throw ConfigError("threads: must be >= 1");
  const std::size_t initial = population.honest + population.adversaries;
  if (initial == 0) throw ConfigError("population: needs at least one client");
  if (population.sample_size < 1) throw ConfigError("population.sample_size: must be >= 1");
  // The population only grows, so round 1 is the binding case.
  std::size_t first_round = initial;
  for (std::size_t j = 0; j < attack.sybils; ++j) {
    if (attack.spawn.join_round(j) <= 1) ++first_round;
  }
  if (population.sample_size > first_round) {
    throw ConfigError("population.sample_size: " + std::to_string(population.sample_size) +
                      " exceeds the round-1 population of " + std::to_string(first_round));
  }
  if (data.source != "synthetic" && data.source != "optdigits") {
    throw ConfigError("data.source: expected synthetic|optdigits");
  }
  if (data.source == "optdigits" && data.path.empty()) throw ConfigError("data.path: required for optdigits");
  if (data.backdoor_samples < 1) throw ConfigError("data.backdoor_samples: must be >= 1");
  const ModelSpec m = model_spec();
  if (data.backdoor_target < 0 || static_cast<std::size_t>(data.backdoor_target) >= m.classes) {
    throw ConfigError("data.backdoor_target: not a valid class");
  }
  if (hidden < 1) throw ConfigError("model.hidden: must be >= 1");
  if (training.batch_size < 1) throw ConfigError("training.batch_size: must be >= 1");
  if (!(training.learning_rate > 0.0)) throw ConfigError("training.learning_rate: must be positive");
  aggregator.validate();
  if (aggregator.kind == AggregatorKind::kMultiKrum && population.sample_size < aggregator.byzantine + 3) {
    throw ConfigError("aggregator.byzantine: Multi-Krum needs sample_size >= byzantine + 3");
  }
  attack.validate(rounds);
  if (static_cast<std::size_t>(attack.target_label) >= m.classes) {
    throw ConfigError("attack.target_label: not a valid class");
  }
  if (static_cast<std::size_t>(attack.flip_from) >= m.classes || static_cast<std::size_t>(attack.flip_to) >= m.classes) {
    throw ConfigError("attack.flip_from/flip_to: not a valid class");
  }
  if (population.adversaries == 0) {
    if (attack.strategy != Strategy::kNone) throw ConfigError("attack.strategy: needs population.adversaries >= 1");
    if (attack.sybils > 0) throw ConfigError("attack.sybils: needs population.adversaries >= 1");
  }
  if (crypto.bits < 2 || crypto.bits > 32) throw ConfigError("crypto.bits: must be in [2, 32]");
  if (!(crypto.range > 0.0)) throw ConfigError("crypto.range: must be positive");
  if (mode == ProtocolMode::kCrypto && !is_linear(aggregator)) {
    throw ConfigError("aggregator.kind: crypto mode supports fedavg and reject-mode norm bounds only");
  }
  if (mode == ProtocolMode::kCrypto) {
    // The summed encodings must not wrap modulo the group order.
    const mpz_class largest = mpz_class(population.sample_size) * ((mpz_class(1) << crypto.bits) - 1);
    if (largest >= group(crypto.group).q()) {
      throw ConfigError("crypto.group: order too small for population.sample_size * 2^crypto.bits");
    }
  }
}

ScenarioConfig config_from_json(const json& j) {
  ScenarioConfig c;
  Table top(j, "");
  top.get("seed", c.seed);
  top.get("rounds", c.rounds);
  top.get_enum("mode", c.mode, parse_mode);
  top.get("threads", c.threads);
  // "task" is shorthand for data.source.
  std::string task;
  top.get("task", task);

  Table pop = top.sub("population");
  pop.get("honest", c.population.honest);
  pop.get("adversaries", c.population.adversaries);
  pop.get("sample_size", c.population.sample_size);
  pop.finish();

  Table model = top.sub("model");
  model.get_enum("arch", c.arch, parse_architecture);
  model.get("hidden", c.hidden);
  model.finish();

  Table data = top.sub("data");
  if (!task.empty()) c.data.source = task;
  data.get("source", c.data.source);
  data.get("path", c.data.path);
  data.get("samples", c.data.samples);
  data.get("test_samples", c.data.test_samples);
  data.get("features", c.data.features);
  data.get("classes", c.data.classes);
  data.get("tail_fraction", c.data.tail_fraction);
  data.get("separation", c.data.separation);
  data.get("backdoor_target", c.data.backdoor_target);
  data.get("tail_class", c.data.tail_class);
  data.get("backdoor_samples", c.data.backdoor_samples);
  data.get("cache_path", c.data.cache_path);
  data.finish();

  Table train = top.sub("training");
  train.get("epochs", c.training.epochs);
  train.get("learning_rate", c.training.learning_rate);
  train.get("batch_size", c.training.batch_size);
  train.finish();

  Table agg = top.sub("aggregator");
  agg.get_enum("kind", c.aggregator.kind, parse_aggregator_kind);
  agg.get("bound", c.aggregator.bound);
  agg.get_enum("norm", c.aggregator.norm, parse_norm);
  agg.get_enum("mode", c.aggregator.mode, parse_bound_mode);
  agg.get("multiplier", c.aggregator.multiplier);
  agg.get("initial_bound", c.aggregator.initial_bound);
  agg.get("byzantine", c.aggregator.byzantine);
  agg.get("selection", c.aggregator.selection);
  agg.get("trim_fraction", c.aggregator.trim_fraction);
  agg.finish();

  Table atk = top.sub("attack");
  atk.get_enum("strategy", c.attack.strategy, parse_strategy);
  atk.get_enum("schedule", c.attack.schedule, parse_schedule);
  atk.get("single_shot_round", c.attack.single_shot_round);
  atk.get("sybils", c.attack.sybils);
  Table spawn = atk.sub("spawn");
  spawn.get_enum("kind", c.attack.spawn.kind, parse_spawn_kind);
  spawn.get("round", c.attack.spawn.round);
  spawn.get("period", c.attack.spawn.period);
  spawn.finish();
  atk.get("boost", c.attack.boost);
  atk.get("blend", c.attack.blend);
  atk.get("diversification", c.attack.diversification);
  atk.get("target_label", c.attack.target_label);
  atk.get("flip_from", c.attack.flip_from);
  atk.get("flip_to", c.attack.flip_to);
  atk.get("extra_tail_samples", c.attack.extra_tail_samples);
  atk.finish();

  Table cr = top.sub("crypto");
  cr.get_enum("group", c.crypto.group, parse_group_profile);
  cr.get("bits", c.crypto.bits);
  cr.get("range", c.crypto.range);
  cr.finish();

  Table out = top.sub("output");
  out.get("dir", c.output.dir);
  out.get("transcripts", c.output.transcripts);
  out.get_enum("abort_policy", c.output.abort_policy, parse_abort_policy);
  out.finish();

  top.finish();
  c.validate();
  return c;
}

json to_json(const ScenarioConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["rounds"] = c.rounds;
  j["mode"] = to_string(c.mode);
  j["threads"] = c.threads;
  j["population"] = {{"honest", c.population.honest},
                     {"adversaries", c.population.adversaries},
                     {"sample_size", c.population.sample_size}};
  j["model"] = {{"arch", to_string(c.arch)}, {"hidden", c.hidden}};
  j["data"] = {{"source", c.data.source},
               {"path", c.data.path},
               {"samples", c.data.samples},
               {"test_samples", c.data.test_samples},
               {"features", c.data.features},
               {"classes", c.data.classes},
               {"tail_fraction", c.data.tail_fraction},
               {"separation", c.data.separation},
               {"backdoor_target", c.data.backdoor_target},
               {"tail_class", c.data.tail_class},
               {"backdoor_samples", c.data.backdoor_samples},
               {"cache_path", c.data.cache_path}};
  j["training"] = {{"epochs", c.training.epochs},
                   {"learning_rate", c.training.learning_rate},
                   {"batch_size", c.training.batch_size}};
  j["aggregator"] = {{"kind", to_string(c.aggregator.kind)},
                     {"bound", c.aggregator.bound},
                     {"norm", to_string(c.aggregator.norm)},
                     {"mode", to_string(c.aggregator.mode)},
                     {"multiplier", c.aggregator.multiplier},
                     {"initial_bound", c.aggregator.initial_bound},
                     {"byzantine", c.aggregator.byzantine},
                     {"selection", c.aggregator.selection},
                     {"trim_fraction", c.aggregator.trim_fraction}};
  j["attack"] = {{"strategy", to_string(c.attack.strategy)},
                 {"schedule", to_string(c.attack.schedule)},
                 {"single_shot_round", c.attack.single_shot_round},
                 {"sybils", c.attack.sybils},
                 {"spawn",
                  {{"kind", to_string(c.attack.spawn.kind)},
                   {"round", c.attack.spawn.round},
                   {"period", c.attack.spawn.period}}},
                 {"boost", c.attack.boost},
                 {"blend", c.attack.blend},
                 {"diversification", c.attack.diversification},
                 {"target_label", c.attack.target_label},
                 {"flip_from", c.attack.flip_from},
                 {"flip_to", c.attack.flip_to},
                 {"extra_tail_samples", c.attack.extra_tail_samples}};
  j["crypto"] = {{"group", to_string(c.crypto.group)}, {"bits", c.crypto.bits}, {"range", c.crypto.range}};
  j["output"] = {{"dir", c.output.dir},
                 {"transcripts", c.output.transcripts},
                 {"abort_policy", to_string(c.output.abort_policy)}};
  return j;
}

ScenarioConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return config_from_json(j);
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string dump_config(const ScenarioConfig& config) { return to_json(config).dump(2) + "\n"; }

void set_dotted(json& j, const std::string& key, const std::string& value) {
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;
  }
  json* node = &j;
  std::size_t start = 0;
  for (;;) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("malformed key '" + key + "'");
    if (!node->is_object()) throw ConfigError("'" + key + "' does not name a table entry");
    if (dot == std::string::npos) {
      (*node)[part] = parsed;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

}  // namespace rofl

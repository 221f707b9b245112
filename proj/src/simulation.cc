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

#include "rofl/simulation.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "rofl/bytes.h"
#include "rofl/errors.h"
#include "rofl/group.h"
#include "rofl/model.h"
#include "rofl/parallel.h"
#include "rofl/secure_agg.h"

namespace rofl {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Uniform in [0, n) from raw 64-bit draws, by rejection.
std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  for (;;) {
    const std::uint64_t x = rng();
    if (x < limit) return x % n;
  }
}

SyntheticSpec synthetic_spec(const ScenarioConfig& c, std::size_t samples, std::string_view role) {
  SyntheticSpec s;
  s.samples = samples;
  s.features = c.data.features;
  s.classes = c.data.classes;
  s.tail_fraction = c.data.tail_fraction;
  s.separation = c.data.separation;
  s.backdoor_target = c.data.backdoor_target;
  s.seed = derive_seed(c.seed, role, 0, 0);
  return s;
}

Dataset cached(const std::string& path, const std::function<Dataset()>& make) {
  if (path.empty()) return make();
  if (std::filesystem::exists(path)) return read_dataset_cache(path);
  Dataset d = make();
  write_dataset_cache(d, path);
  return d;
}

std::string fixed6(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(6) << x;
  std::string s = ss.str();
  if (s == "-0.000000") s = "0.000000";
  return s;
}

double parse_double(const std::string& s) {
  if (s == "inf") return kInf;
  if (s == "-inf") return -kInf;
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw DecodeError("bad number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw DecodeError("bad number '" + s + "'");
  }
}

std::uint64_t parse_uint(const std::string& s) {
  try {
    std::size_t pos = 0;
    const auto v = std::stoull(s, &pos);
    if (pos != s.size()) throw DecodeError("bad integer '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw DecodeError("bad integer '" + s + "'");
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

double RoundRecord::alpha() const {
  return sampled.empty() ? 0.0 : static_cast<double>(malicious.size()) / static_cast<double>(sampled.size());
}

std::vector<ClientId> sample_clients(std::span<const ClientId> active, std::size_t s,
                                     std::uint64_t seed, const Population& population,
                                     bool fixed_frequency, bool* substituted) {
  if (s > active.size()) {
    throw ConfigError("sample size " + std::to_string(s) + " exceeds the population of " +
                      std::to_string(active.size()));
  }
  std::vector<ClientId> pool(active.begin(), active.end());
  std::sort(pool.begin(), pool.end());
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates: the first s slots become the sample.
  for (std::size_t i = 0; i < s; ++i) {
    const std::size_t j = i + uniform_index(rng, pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(s);
  if (substituted) *substituted = false;
  if (fixed_frequency && s > 0) {
    const bool has = std::any_of(pool.begin(), pool.end(), [&](ClientId id) { return population.is_malicious(id); });
    if (!has) {
      std::optional<ClientId> lowest;
      for (ClientId id : active) {
        if (population.is_malicious(id) && (!lowest || id < *lowest)) lowest = id;
      }
      if (lowest) {
        pool[uniform_index(rng, pool.size())] = *lowest;
        if (substituted) *substituted = true;
      }
    }
  }
  std::sort(pool.begin(), pool.end());
  return pool;
}

unsigned window_bits_for(double limit, const Quantizer& quantizer) {
  const unsigned full = quantizer.bits();
  if (!std::isfinite(limit)) return full;
  // |x| <= limit quantizes to |u - offset| <= ceil(limit / step); the
  // centred window of width 2^w holds offsets in [-2^(w-1), 2^(w-1) - 1].
  const double need = std::ceil(limit / quantizer.step()) + 1.0;
  for (unsigned w = 1; w < full; ++w) {
    if (std::ldexp(1.0, static_cast<int>(w) - 1) - 1.0 >= need) return w;
  }
  return full;
}

Simulator::Simulator(ScenarioConfig config)
    : config_(std::move(config)),
      spec_(config_.model_spec()),
      quantizer_(config_.crypto.bits, config_.crypto.range),
      dynamic_bound_(config_.aggregator.initial_bound) {
  config_.validate();
  const ScenarioConfig& c = config_;
  if (c.data.source == "synthetic") {
    train_ = cached(c.data.cache_path, [&] { return gen_synthetic(synthetic_spec(c, c.data.samples, "data")); });
    test_ = cached(c.data.cache_path.empty() ? "" : c.data.cache_path + ".test",
                   [&] { return gen_synthetic(synthetic_spec(c, c.data.test_samples, "test-data")); });
  } else {
    const Dataset all = load_optdigits(c.data.path, c.data.tail_fraction, c.data.tail_class, c.data.backdoor_target);
    std::tie(train_, test_) = split_train_test(all, 0.25, derive_seed(c.seed, "split", 0, 0));
  }

  for (std::size_t i = 0; i < c.population.honest; ++i) population_.add_honest();
  std::vector<ClientId> adversaries;
  for (std::size_t i = 0; i < c.population.adversaries; ++i) adversaries.push_back(population_.add_adversary());
  if (c.attack.sybils > 0) population_.spawn_sybils(adversaries.front(), c.attack.sybils, c.attack.spawn);

  const std::size_t owners = c.population.honest + c.population.adversaries;
  for (const auto& idx : partition_iid(train_.size(), owners, derive_seed(c.seed, "partition", 0, 0))) {
    shards_.push_back(subset(train_, idx));
  }
  for (ClientId a : adversaries) {
    const std::size_t sybils = a == adversaries.front() ? c.attack.sybils : 0;
    if (c.data.source == "synthetic") {
      backdoor_[a] = gen_tail_samples(synthetic_spec(c, c.data.samples, "data"),
                                      c.data.backdoor_samples + c.attack.extra_tail_samples * sybils,
                                      derive_seed(c.seed, "backdoor", a, 0));
    } else {
      std::vector<std::size_t> tail;
      for (std::size_t i = 0; i < train_.size(); ++i) {
        if (train_.tail_mask[i]) tail.push_back(i);
      }
      backdoor_[a] = subset(train_, tail);
    }
  }
  model_ = init_params(spec_, derive_seed(c.seed, "model", 0, 0));
}

double Simulator::public_bound() const {
  switch (config_.aggregator.kind) {
    case AggregatorKind::kNormBoundStatic:
      return config_.aggregator.bound;
    case AggregatorKind::kNormBoundDynamic:
      return dynamic_bound_;
    default:
      return kInf;
  }
}

const Dataset& Simulator::shard_of(ClientId id) const { return shards_.at(population_.controller_of(id)); }

const Dataset& Simulator::backdoor_of(ClientId controller) const { return backdoor_.at(controller); }

std::map<ClientId, Simulator::Submission> Simulator::build_submissions(
    const std::vector<ClientId>& sampled, const std::vector<ClientId>& fired, RoundRecord& record) {
  const ScenarioConfig& c = config_;
  const AttackSpec& atk = c.attack;
  const std::uint64_t t = round_;
  const double bound = public_bound();
  const Norm p = c.aggregator.norm;
  auto clip = [&](ParameterVector v) { return std::isfinite(bound) ? clip_to_norm(v, bound, p) : v; };
  auto train_seed = [&](ClientId id) { return derive_seed(c.seed, "train", id, t); };

  std::map<ClientId, Submission> out;
  for (ClientId id : sampled) out[id];  // slots exist before any worker writes

  std::vector<std::function<void()>> tasks;
  std::map<ClientId, std::vector<ClientId>> grouped;  // controller -> fired ids
  const bool group_strategy = atk.strategy == Strategy::kSybilTail || atk.strategy == Strategy::kStatManip;
  for (ClientId id : sampled) {
    const bool attacks = std::binary_search(fired.begin(), fired.end(), id);
    if (attacks && group_strategy) {
      grouped[population_.controller_of(id)].push_back(id);
      continue;
    }
    Submission* slot = &out[id];
    if (!attacks) {
      tasks.push_back([&, id, slot] { slot->delta = clip(local_train(spec_, model_, shard_of(id), c.training, train_seed(id))); });
      continue;
    }
    const ClientId ctl = population_.controller_of(id);
    switch (atk.strategy) {
      case Strategy::kLabelFlip:
        tasks.push_back([&, id, slot] {
          slot->delta = clip(local_train(spec_, model_, label_flip(shard_of(id), atk.flip_from, atk.flip_to), c.training,
                                         train_seed(id)));
        });
        break;
      case Strategy::kScale:
        tasks.push_back([&, id, slot] {
          slot->delta = clip(scale_update(local_train(spec_, model_, shard_of(id), c.training, train_seed(id)), atk.boost));
        });
        break;
      case Strategy::kBackdoorPrototypical:
        tasks.push_back([&, id, ctl, slot] {
          const ParameterVector raw = train_backdoor(spec_, model_, shard_of(id), backdoor_of(ctl), atk.target_label,
                                                     atk.blend, kInf, p, c.training, train_seed(id));
          slot->delta = clip(scale_update(raw, atk.boost));
        });
        break;
      case Strategy::kBackdoorTail:
        tasks.push_back([&, id, ctl, slot] {
          ParameterVector d = train_backdoor(spec_, model_, shard_of(id), backdoor_of(ctl), atk.target_label,
                                             atk.blend, bound, p, c.training, train_seed(id));
          // Spend the whole norm budget when one is announced.
          const double n = p_norm(d, p);
          if (std::isfinite(bound) && n > 0.0 && n < bound) d = clip(scale_update(d, bound / n));
          slot->delta = std::move(d);
        });
        break;
      default:
        break;
    }
  }
  std::vector<char> wrapped(grouped.size(), 0);
  std::size_t group_index = 0;
  for (auto& [ctl, ids] : grouped) {
    const ClientId controller = ctl;
    char* wrap_flag = &wrapped[group_index++];
    const std::vector<ClientId>* members = &ids;
    tasks.push_back([&, controller, members, wrap_flag] {
      if (atk.strategy == Strategy::kSybilTail) {
        ControllerState state{shard_of(controller), backdoor_of(controller), atk.target_label, atk.blend, c.training};
        SybilTailResult res = sybil_tail_round(state, *members, spec_, model_, bound, atk.diversification, p, c.seed, t);
        *wrap_flag = res.wrapped ? 1 : 0;
        for (std::size_t i = 0; i < members->size(); ++i) out.at((*members)[i]).delta = std::move(res.updates[i]);
      } else {
        const double b = std::isfinite(bound) ? bound : c.aggregator.initial_bound;
        const ParameterVector dir = backdoor_direction(spec_, model_, backdoor_of(controller), atk.target_label);
        const auto updates = stat_manip_round(*members, b, dir, p);
        for (std::size_t i = 0; i < members->size(); ++i) {
          out.at((*members)[i]).delta = updates[i];
          out.at((*members)[i]).declared = b;
        }
      }
    });
  }
  for (auto& [id, s] : out) s.declared = -1.0;
  parallel_for(tasks.size(), c.threads, [&](std::size_t i) { tasks[i](); });
  record.sybil_wrapped = std::any_of(wrapped.begin(), wrapped.end(), [](char w) { return w != 0; });
  return out;
}

void Simulator::aggregate_plaintext(const std::map<ClientId, Prepared>& prepared, RoundRecord& record,
                                    ParameterVector& delta) {
  const AggregatorSpec& spec = config_.aggregator;
  const std::size_t d = spec_.dimension();
  const double tol = quantizer_.norm_tolerance(d, spec.norm);
  std::vector<ClientUpdate> updates;
  for (const auto& [id, pr] : prepared) updates.push_back({id, pr.dequantized, pr.declared});
  AggregationResult agg = aggregate(updates, spec, history_, tol);
  record.bound = agg.bound;
  record.window_bits = window_bits_for(agg.bound + tol, quantizer_);
  record.accepted = agg.accepted;
  record.rejected = agg.rejected;
  record.empty_accepted = agg.empty_accepted;
  if (!is_linear(spec)) {
    record.weights = agg.weights;
    delta = std::move(agg.delta);
    return;
  }
  if (record.accepted.empty()) {
    delta.assign(d, 0.0);
    record.empty_accepted = true;
    return;
  }
  std::vector<std::uint64_t> sums(d, 0);
  for (ClientId id : record.accepted) {
    const auto& u = prepared.at(id).quantized.values;
    for (std::size_t k = 0; k < d; ++k) sums[k] += u[k];
    record.weights[id] = 1.0 / static_cast<double>(record.accepted.size());
  }
  delta = quantizer_.dequantize_mean(sums, record.accepted.size());
}

void Simulator::aggregate_crypto(const std::map<ClientId, Prepared>& prepared, RoundRecord& record,
                                 ParameterVector& delta) {
  const ScenarioConfig& c = config_;
  const AggregatorSpec& spec = c.aggregator;
  const GroupParams& params = group(c.crypto.group);
  const std::size_t d = spec_.dimension();
  const std::uint64_t t = round_;
  const double tol = quantizer_.norm_tolerance(d, spec.norm);

  std::vector<ClientId> ids;
  std::vector<double> declared;
  for (const auto& [id, pr] : prepared) {
    ids.push_back(id);
    declared.push_back(pr.declared);
  }
  double bound = kInf;
  if (spec.kind == AggregatorKind::kNormBoundStatic) bound = spec.bound;
  if (spec.kind == AggregatorKind::kNormBoundDynamic) bound = dynamic_bound(declared, spec.multiplier);
  record.bound = bound;
  const unsigned wbits = window_bits_for(bound + tol, quantizer_);
  record.window_bits = wbits;
  const RangeWindow window = centered_window(c.crypto.bits, wbits);

  AggregationRound ar(params, t, d, window);
  for (ClientId id : ids) ar.expect(id);
  std::set<ClientId> policy_rejected;
  for (const auto& [id, pr] : prepared) {
    if (pr.declared > bound + tol) {
      ar.reject(id, Verdict::reject("norm", -1, "declared norm exceeds the bound"));
      policy_rejected.insert(id);
    }
  }

  // Key agreement and masks over every participant of the round.
  KeyDirectory directory;
  std::map<ClientId, KeyPair> keys;
  for (ClientId id : ids) {
    HashDrbg rng(c.seed, "key", id, t);
    keys[id] = make_keypair(params, rng);
    directory.register_key(id, keys[id].public_key);
  }
  std::map<ClientId, std::map<ClientId, MaskSeed>> seeds;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      const MaskSeed s = derive_pairwise_secret(ids[i], keys[ids[i]].secret, ids[j], directory, t, params);
      seeds[ids[i]][ids[j]] = s;
      seeds[ids[j]][ids[i]] = s;
    }
  }
  std::vector<MaskVector> masks(ids.size());
  std::vector<std::optional<ClientEnvelope>> envelopes(ids.size());
  parallel_for(ids.size(), c.threads, [&](std::size_t i) {
    const ClientId id = ids[i];
    masks[i] = compute_client_mask(id, ids, seeds[id], d, params);
    if (policy_rejected.count(id)) return;
    const Prepared& pr = prepared.at(id);
    HashDrbg rng(c.seed, "proof", id, t);
    envelopes[i] = build_envelope(id, t, pr.quantized.values, masks[i], window, pr.declared, params, rng);
  });
  for (auto& env : envelopes) {
    if (env) ar.submit(*env);
  }
  ar.verify(c.threads);

  const std::vector<ClientId> accepted = ar.accepted();
  const std::vector<ClientId> rejected = ar.rejected();
  std::vector<MaskVector> shares;
  for (ClientId id : accepted) shares.push_back(compute_client_mask(id, rejected, seeds[id], d, params));
  const std::vector<Scalar> key = assemble_decoding_key(shares, d, params);

  record.accepted = accepted;
  for (const auto& [id, v] : ar.verdicts()) {
    if (!v.accepted) record.rejected.emplace_back(id, v.check);
  }

  RoundTranscript tr;
  tr.group_id = params.id();
  tr.round = t;
  tr.dimension = d;
  tr.window = window;
  tr.bound = bound;
  tr.tolerance = tol;
  for (const auto& [id, pr] : prepared) tr.declared_norms.emplace_back(id, pr.declared);
  for (auto& env : envelopes) {
    if (env) tr.envelopes.push_back(std::move(*env));
  }
  for (const auto& [id, v] : ar.verdicts()) tr.verdicts.emplace_back(id, v);
  tr.decoding_key = key;

  delta.assign(d, 0.0);
  if (accepted.empty()) {
    record.empty_accepted = true;
  } else {
    try {
      const std::vector<Scalar> sums = ar.aggregate(key);
      std::vector<std::uint64_t> raw(d);
      for (std::size_t k = 0; k < d; ++k) raw[k] = sums[k].value.get_ui();
      delta = quantizer_.dequantize_mean(raw, accepted.size());
      for (ClientId id : accepted) record.weights[id] = 1.0 / static_cast<double>(accepted.size());
      tr.aggregate = sums;
    } catch (const ProtocolAbort& e) {
      record.aborted = true;
      record.abort_check = e.check();
      tr.aborted = true;
      tr.abort_check = e.check();
      tr.abort_coordinate = e.coordinate();
    }
  }
  transcript_ = std::move(tr);
}

RoundRecord Simulator::execute_round() {
  const auto start = std::chrono::steady_clock::now();
  const ScenarioConfig& c = config_;
  const std::uint64_t t = ++round_;
  RoundRecord record;
  record.round = t;
  record.mode = c.mode;
  record.strategy = to_string(c.attack.strategy);

  const std::vector<ClientId> active = population_.active_at(t);
  const bool fixed = c.attack.schedule == ScheduleKind::kFixedFrequency && c.population.adversaries > 0;
  record.sampled = sample_clients(active, c.population.sample_size, derive_seed(c.seed, "sample", 0, t), population_,
                                  fixed, &record.substituted);
  for (ClientId id : record.sampled) {
    if (population_.is_malicious(id)) record.malicious.push_back(id);
  }
  record.fired = schedule(c.attack, t, record.sampled, population_);

  std::map<ClientId, Submission> submissions = build_submissions(record.sampled, record.fired, record);
  std::map<ClientId, Prepared> prepared;
  std::vector<double> declared;
  for (auto& [id, s] : submissions) {
    Prepared pr;
    if (!all_finite(s.delta)) throw PreconditionError("client " + std::to_string(id) + " produced a non-finite update");
    pr.quantized = quantizer_.quantize(clamp_coordinates(s.delta, quantizer_.range()));
    pr.dequantized = quantizer_.dequantize(pr.quantized);
    pr.declared = s.declared >= 0.0 ? s.declared : p_norm(pr.dequantized, c.aggregator.norm);
    record.declared_norms[id] = pr.declared;
    declared.push_back(pr.declared);
    prepared.emplace(id, std::move(pr));
  }
  record.median_norm = declared.empty() ? 0.0 : median(declared);

  ParameterVector delta;
  if (c.mode == ProtocolMode::kCrypto) {
    aggregate_crypto(prepared, record, delta);
  } else {
    aggregate_plaintext(prepared, record, delta);
  }

  if (!record.aborted) {
    for (std::size_t k = 0; k < model_.size(); ++k) model_[k] += delta[k];
    for (const auto& [id, pr] : prepared) history_.add(id, pr.dequantized);
    if (c.aggregator.kind == AggregatorKind::kNormBoundDynamic) dynamic_bound_ = record.bound;
  }
  record.main_accuracy = evaluate(spec_, model_, test_);
  record.backdoor_accuracy = backdoor_eval(spec_, model_, test_);
  record.checksum = checksum(model_);
  record.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return record;
}

RunResult simulate(const ScenarioConfig& config) {
  Simulator sim(config);
  RunResult result;
  for (std::uint64_t t = 0; t < config.rounds; ++t) {
    result.records.push_back(sim.execute_round());
    if (result.records.back().aborted) {
      ++result.aborted_rounds;
      if (config.output.abort_policy == AbortPolicy::kStop) {
        result.stopped_on_abort = true;
        break;
      }
    }
  }
  result.final_model = sim.model();
  result.final_checksum = checksum(sim.model());
  return result;
}

RunResult run_scenario(const ScenarioConfig& config, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  write_text(out_dir / "effective_config.json", dump_config(config));

  Simulator sim(config);
  RunResult result;
  const bool transcripts = config.output.transcripts && config.mode == ProtocolMode::kCrypto;
  if (transcripts) {
    std::filesystem::create_directories(out_dir / "transcripts", ec);
    if (ec) throw IoError("cannot create " + (out_dir / "transcripts").string() + ": " + ec.message());
  }
  double wall = 0.0;
  for (std::uint64_t t = 0; t < config.rounds; ++t) {
    result.records.push_back(sim.execute_round());
    const RoundRecord& r = result.records.back();
    wall += r.wall_ms;
    if (transcripts && sim.last_transcript()) {
      std::ostringstream name;
      name << "round_" << std::setw(4) << std::setfill('0') << r.round << ".rflt";
      write_transcript(*sim.last_transcript(), out_dir / "transcripts" / name.str());
    }
    if (r.aborted) {
      ++result.aborted_rounds;
      if (config.output.abort_policy == AbortPolicy::kStop) {
        result.stopped_on_abort = true;
        break;
      }
    }
  }
  result.final_model = sim.model();
  result.final_checksum = checksum(sim.model());
  write_metrics(result.records, out_dir / "metrics.csv");

  nlohmann::json summary;
  summary["rounds_run"] = result.records.size();
  summary["mode"] = to_string(config.mode);
  summary["seed"] = config.seed;
  summary["final_checksum"] = result.final_checksum;
  summary["aborted_rounds"] = result.aborted_rounds;
  summary["stopped_on_abort"] = result.stopped_on_abort;
  summary["total_wall_ms"] = wall;
  if (!result.records.empty()) {
    const RoundRecord& last = result.records.back();
    summary["final_main_accuracy"] = last.main_accuracy;
    summary["final_backdoor_accuracy"] = last.backdoor_accuracy;
  }
  nlohmann::json rounds = nlohmann::json::array();
  for (const RoundRecord& r : result.records) {
    nlohmann::json jr;
    jr["round"] = r.round;
    jr["sampled"] = r.sampled;
    jr["malicious"] = r.malicious;
    jr["fired"] = r.fired;
    jr["alpha"] = r.alpha();
    jr["substituted"] = r.substituted;
    jr["sybil_wrapped"] = r.sybil_wrapped;
    nlohmann::json norms = nlohmann::json::object();
    for (const auto& [id, n] : r.declared_norms) norms[std::to_string(id)] = n;
    jr["declared_norms"] = norms;
    jr["bound"] = std::isfinite(r.bound) ? nlohmann::json(r.bound) : nlohmann::json("inf");
    jr["window_bits"] = r.window_bits;
    jr["accepted"] = r.accepted;
    nlohmann::json rej = nlohmann::json::array();
    for (const auto& [id, why] : r.rejected) rej.push_back({{"client", id}, {"reason", why}});
    jr["rejected"] = rej;
    nlohmann::json w = nlohmann::json::object();
    for (const auto& [id, x] : r.weights) w[std::to_string(id)] = x;
    jr["weights"] = w;
    jr["empty_accepted"] = r.empty_accepted;
    jr["aborted"] = r.aborted;
    if (r.aborted) jr["abort_check"] = r.abort_check;
    jr["main_accuracy"] = r.main_accuracy;
    jr["backdoor_accuracy"] = r.backdoor_accuracy;
    jr["wall_ms"] = r.wall_ms;
    jr["checksum"] = r.checksum;
    rounds.push_back(std::move(jr));
  }
  summary["records"] = std::move(rounds);
  write_text(out_dir / "summary.json", summary.dump(2) + "\n");
  return result;
}

std::vector<std::filesystem::path> run_sweep(const ScenarioConfig& base, const std::string& param,
                                             const std::vector<std::string>& values,
                                             const std::filesystem::path& out_root) {
  std::vector<std::filesystem::path> dirs;
  for (const std::string& v : values) {
    nlohmann::json j = to_json(base);
    set_dotted(j, param, v);
    const ScenarioConfig c = config_from_json(j);
    const std::filesystem::path dir = out_root / (param + "=" + v);
    run_scenario(c, dir);
    dirs.push_back(dir);
  }
  return dirs;
}

MetricsRow to_row(const RoundRecord& r) {
  MetricsRow row;
  row.round = r.round;
  row.main_acc = parse_double(fixed6(r.main_accuracy));
  row.backdoor_acc = parse_double(fixed6(r.backdoor_accuracy));
  row.bound = parse_double(fixed6(r.bound));
  row.median_norm = parse_double(fixed6(r.median_norm));
  row.n_sampled = r.sampled.size();
  row.n_malicious = r.malicious.size();
  row.n_rejected = r.rejected.size();
  row.aborted = r.aborted;
  row.mode = to_string(r.mode);
  row.checksum = r.checksum;
  return row;
}

std::string format_metrics(std::span<const RoundRecord> records) {
  std::ostringstream out;
  out << kMetricsHeader << "\n";
  for (const RoundRecord& r : records) {
    out << r.round << ',' << fixed6(r.main_accuracy) << ',' << fixed6(r.backdoor_accuracy) << ','
        << fixed6(r.bound) << ',' << fixed6(r.median_norm) << ',' << r.sampled.size() << ','
        << r.malicious.size() << ',' << r.rejected.size() << ',' << (r.aborted ? 1 : 0) << ','
        << to_string(r.mode) << ',' << r.checksum << "\n";
  }
  return out.str();
}

void write_metrics(std::span<const RoundRecord> records, const std::filesystem::path& path) {
  write_text(path, format_metrics(records));
}

std::vector<MetricsRow> read_metrics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) throw DecodeError(path.string() + ": unexpected header");
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 11) throw DecodeError(path.string() + ": expected 11 columns");
    MetricsRow r;
    r.round = parse_uint(f[0]);
    r.main_acc = parse_double(f[1]);
    r.backdoor_acc = parse_double(f[2]);
    r.bound = parse_double(f[3]);
    r.median_norm = parse_double(f[4]);
    r.n_sampled = parse_uint(f[5]);
    r.n_malicious = parse_uint(f[6]);
    r.n_rejected = parse_uint(f[7]);
    r.aborted = parse_uint(f[8]) != 0;
    r.mode = f[9];
    r.checksum = f[10];
    rows.push_back(std::move(r));
  }
  return rows;
}

std::filesystem::path resolve_output(const std::filesystem::path& dir) {
  if (dir.is_absolute()) return dir;
  if (const char* root = std::getenv("ROFL_LAB_OUT_ROOT"); root && *root) return std::filesystem::path(root) / dir;
  return dir;
}

}  // namespace rofl

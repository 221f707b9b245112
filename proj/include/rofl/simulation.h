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

// Round-driven federated learning simulator.
//
// A round samples clients, lets every participant build its update (honest
// training or the configured attack), quantizes all updates, then either
// filters and sums them in the clear (plaintext mode) or runs the full
// masked, committed and range-proved protocol (crypto mode). Both modes sum
// the same integers and dequantize with Quantizer::dequantize_mean, so an
// all-honest run produces bit-identical models in either mode.

#ifndef ROFL_SIMULATION_H_
#define ROFL_SIMULATION_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rofl/aggregators.h"
#include "rofl/attacks.h"
#include "rofl/config.h"
#include "rofl/dataset.h"
#include "rofl/transcript.h"

namespace rofl {

struct RoundRecord {
  std::uint64_t round = 0;
  ProtocolMode mode = ProtocolMode::kPlaintext;
  std::vector<ClientId> sampled;
  std::vector<ClientId> malicious;  // controlled ids among the sampled
  std::vector<ClientId> fired;      // controlled ids that attacked
  std::string strategy;
  bool substituted = false;    // fixed_frequency swapped a controlled id in
  bool sybil_wrapped = false;  // more sybils than orthogonal directions
  std::map<ClientId, double> declared_norms;
  double bound = 0.0;  // +inf without a norm bound
  double median_norm = 0.0;
  unsigned window_bits = 0;
  std::vector<ClientId> accepted;
  std::vector<std::pair<ClientId, std::string>> rejected;
  std::map<ClientId, double> weights;
  bool empty_accepted = false;
  bool aborted = false;
  std::string abort_check;
  double main_accuracy = 0.0;
  double backdoor_accuracy = 0.0;
  double wall_ms = 0.0;
  std::string checksum;  // of the global model after the round

  double alpha() const;
};

// Uniform sample of s ids without replacement from `active` (ascending in
// the result). With fixed_frequency set and no controlled id drawn, the
// lowest-id controlled active client replaces a randomly chosen sampled id
// and *substituted is set.
std::vector<ClientId> sample_clients(std::span<const ClientId> active, std::size_t s,
                                     std::uint64_t seed, const Population& population,
                                     bool fixed_frequency, bool* substituted = nullptr);

// Smallest window width (at most quant_bits) whose centred window holds
// every coordinate of a vector with norm up to `limit`.
unsigned window_bits_for(double limit, const Quantizer& quantizer);

class Simulator {
 public:
  explicit Simulator(ScenarioConfig config);

  // Runs the next round and returns its record.
  RoundRecord execute_round();

  std::uint64_t round() const { return round_; }
  const ParameterVector& model() const { return model_; }
  const Population& population() const { return population_; }
  const ScenarioConfig& config() const { return config_; }
  const Dataset& train_data() const { return train_; }
  const Dataset& test_data() const { return test_; }
  const UpdateHistory& history() const { return history_; }
  // Bound announced for the next round (+inf without a norm bound).
  double public_bound() const;
  // Transcript of the last crypto round.
  const std::optional<RoundTranscript>& last_transcript() const { return transcript_; }

 private:
  struct Submission {
    ParameterVector delta;
    double declared = 0.0;  // <0: use the measured norm
  };
  struct Prepared {
    FixedVec quantized;
    ParameterVector dequantized;
    double declared = 0.0;
  };

  const Dataset& shard_of(ClientId id) const;
  const Dataset& backdoor_of(ClientId controller) const;
  std::map<ClientId, Submission> build_submissions(const std::vector<ClientId>& sampled,
                                                   const std::vector<ClientId>& fired,
                                                   RoundRecord& record);
  void aggregate_plaintext(const std::map<ClientId, Prepared>& prepared, RoundRecord& record,
                           ParameterVector& delta);
  void aggregate_crypto(const std::map<ClientId, Prepared>& prepared, RoundRecord& record,
                        ParameterVector& delta);

  ScenarioConfig config_;
  ModelSpec spec_;
  Quantizer quantizer_;
  Population population_;
  Dataset train_, test_;
  std::vector<Dataset> shards_;             // per original client
  std::map<ClientId, Dataset> backdoor_;    // per adversary
  ParameterVector model_;
  UpdateHistory history_;
  double dynamic_bound_;
  std::uint64_t round_ = 0;
  std::optional<RoundTranscript> transcript_;
};

struct RunResult {
  std::vector<RoundRecord> records;
  ParameterVector final_model;
  std::string final_checksum;
  std::size_t aborted_rounds = 0;
  bool stopped_on_abort = false;
};

// Runs every round in memory.
RunResult simulate(const ScenarioConfig& config);

// Runs the scenario and writes metrics.csv, summary.json,
// effective_config.json (and transcripts/round_NNNN.rflt when enabled)
// into out_dir.
RunResult run_scenario(const ScenarioConfig& config, const std::filesystem::path& out_dir);

// One run per value, in out_root/<param>=<value>.
std::vector<std::filesystem::path> run_sweep(const ScenarioConfig& base, const std::string& param,
                                             const std::vector<std::string>& values,
                                             const std::filesystem::path& out_root);

// The CSV view of a record.
struct MetricsRow {
  std::uint64_t round = 0;
  double main_acc = 0.0;
  double backdoor_acc = 0.0;
  double bound = 0.0;
  double median_norm = 0.0;
  std::size_t n_sampled = 0;
  std::size_t n_malicious = 0;
  std::size_t n_rejected = 0;
  bool aborted = false;
  std::string mode;
  std::string checksum;
  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

inline constexpr const char* kMetricsHeader =
    "round,main_acc,backdoor_acc,bound,median_norm,n_sampled,n_malicious,n_rejected,aborted,mode,checksum";

// Floats rounded to 6 decimals, as written.
MetricsRow to_row(const RoundRecord& record);
std::string format_metrics(std::span<const RoundRecord> records);
void write_metrics(std::span<const RoundRecord> records, const std::filesystem::path& path);
std::vector<MetricsRow> read_metrics(const std::filesystem::path& path);

// Resolves a relative output path against $ROFL_LAB_OUT_ROOT when set.
std::filesystem::path resolve_output(const std::filesystem::path& dir);

}  // namespace rofl

#endif  // ROFL_SIMULATION_H_

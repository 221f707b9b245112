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

// Server-side aggregation rules.
//
// Every rule first orders its input by client id, so results never depend
// on submission order; ties are broken by the lower id.

#ifndef ROFL_AGGREGATORS_H_
#define ROFL_AGGREGATORS_H_

#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rofl/secure_agg.h"
#include "rofl/vector_ops.h"

namespace rofl {

enum class AggregatorKind {
  kFedAvg,
  kNormBoundStatic,
  kNormBoundDynamic,
  kMultiKrum,
  kCoordMedian,
  kTrimmedMean,
  kFoolsGold,
};

AggregatorKind parse_aggregator_kind(const std::string& name);
std::string to_string(AggregatorKind kind);
std::vector<std::string> aggregator_names();

enum class BoundMode { kReject, kClip };
BoundMode parse_bound_mode(const std::string& name);
std::string to_string(BoundMode mode);

struct AggregatorSpec {
  AggregatorKind kind = AggregatorKind::kFedAvg;
  double bound = 1.0;          // static bound B
  Norm norm = Norm::kL2;
  BoundMode mode = BoundMode::kReject;
  double multiplier = 1.5;     // dynamic bound: median * M
  double initial_bound = 1.0;  // dynamic bound published before round 1
  std::size_t byzantine = 1;   // Multi-Krum f
  std::size_t selection = 1;   // Multi-Krum m
  double trim_fraction = 0.1;  // trimmed mean beta

  bool has_norm_bound() const {
    return kind == AggregatorKind::kNormBoundStatic || kind == AggregatorKind::kNormBoundDynamic;
  }
  // Throws ConfigError naming the offending parameter.
  void validate() const;
  friend bool operator==(const AggregatorSpec&, const AggregatorSpec&) = default;
};

struct ClientUpdate {
  ClientId client = 0;
  ParameterVector delta;
  double declared_norm = 0.0;
};

// Cumulative sum of every update a client has submitted.
class UpdateHistory {
 public:
  void add(ClientId id, std::span<const double> delta);
  // Empty span for clients never seen.
  std::span<const double> get(ClientId id) const;
  std::size_t size() const { return sums_.size(); }

 private:
  std::map<ClientId, ParameterVector> sums_;
};

// Weighted mean; uniform 1/n when `weights` is empty. Throws on an empty
// list or on length mismatches.
ParameterVector fedavg(std::span<const ClientUpdate> updates, std::span<const double> weights = {});

double median(std::vector<double> values);

// median(norms) * multiplier.
double dynamic_bound(std::span<const double> public_norms, double multiplier);

struct FilterResult {
  std::vector<ClientUpdate> survivors;  // possibly rescaled in clip mode
  std::vector<ClientId> accepted;
  std::vector<std::pair<ClientId, std::string>> rejected;
};

// Reject mode drops updates whose norm exceeds bound + tolerance; clip mode
// rescales them onto the bound. With use_declared the declared norm is
// checked instead of the measured one (the server cannot see masked
// updates).
FilterResult norm_bound_filter(std::span<const ClientUpdate> updates, double bound, Norm p,
                               BoundMode mode, double tolerance = 0.0, bool use_declared = false);

// Score of each update: sum of squared distances to its n - f - 2 nearest
// neighbours. Requires n >= f + 3.
std::vector<double> krum_scores(std::span<const ClientUpdate> updates, std::size_t f);
// The m lowest-scoring client ids, in ascending score then id order.
std::vector<ClientId> multi_krum(std::span<const ClientUpdate> updates, std::size_t f, std::size_t m);

ParameterVector coord_median(std::span<const ClientUpdate> updates);
// Drops floor(beta n) values from each end of every coordinate.
ParameterVector trimmed_mean(std::span<const ClientUpdate> updates, double beta);

// FoolsGold reweighting of the given cumulative histories. An all-zero
// history gets weight 1 (no evidence). Needs at least two nonzero
// histories (PreconditionError otherwise).
std::vector<double> foolsgold(std::span<const ParameterVector> histories);
std::map<ClientId, double> foolsgold(const UpdateHistory& history, std::span<const ClientId> clients);

struct AggregationResult {
  ParameterVector delta;
  double bound = std::numeric_limits<double>::infinity();
  double median_norm = 0.0;
  std::vector<ClientId> accepted;
  std::vector<std::pair<ClientId, std::string>> rejected;
  std::map<ClientId, double> weights;
  bool empty_accepted = false;
};

// Dispatch on spec.kind. The dynamic bound is computed from the declared
// norms of all updates before any filtering.
AggregationResult aggregate(std::span<const ClientUpdate> updates, const AggregatorSpec& spec,
                            const UpdateHistory& history, double tolerance = 0.0);

}  // namespace rofl

#endif  // ROFL_AGGREGATORS_H_

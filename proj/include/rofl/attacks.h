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

// Adversary strategies, Sybil identity management and attack schedules.
//
// Every strategy clips its output to the publicly announced norm bound when
// there is one, so attack updates are always accepted by a reject-mode
// filter. The adversary sees the public bound, the public declared norms
// and its own shards, never honest updates.

#ifndef ROFL_ATTACKS_H_
#define ROFL_ATTACKS_H_

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rofl/dataset.h"
#include "rofl/model.h"
#include "rofl/secure_agg.h"
#include "rofl/vector_ops.h"

namespace rofl {

enum class Role { kHonest, kAdversary, kSybil };
std::string to_string(Role role);

struct ClientIdentity {
  ClientId id = 0;
  Role role = Role::kHonest;
  std::optional<ClientId> controller;  // sybils only
  std::uint64_t spawn_round = 0;       // first round the client may be sampled
  friend bool operator==(const ClientIdentity&, const ClientIdentity&) = default;
};

enum class Strategy {
  kNone,
  kLabelFlip,
  kScale,
  kBackdoorPrototypical,
  kBackdoorTail,
  kSybilTail,
  kStatManip,
};
Strategy parse_strategy(const std::string& name);
std::string to_string(Strategy s);
std::vector<std::string> strategy_names();

enum class ScheduleKind { kSingleShot, kContinuous, kFixedFrequency };
ScheduleKind parse_schedule(const std::string& name);
std::string to_string(ScheduleKind s);

// kAt: all k join at `round`. kGeometric: one sybil joins at `round` and
// the count doubles every `period` rounds until it reaches k.
enum class SpawnKind { kAt, kGeometric };
SpawnKind parse_spawn_kind(const std::string& name);
std::string to_string(SpawnKind s);

struct SpawnSchedule {
  SpawnKind kind = SpawnKind::kGeometric;
  std::uint64_t round = 1;
  std::uint64_t period = 5;
  // Join round of the j-th sybil (0-based).
  std::uint64_t join_round(std::size_t j) const;
  friend bool operator==(const SpawnSchedule&, const SpawnSchedule&) = default;
};

struct AttackSpec {
  Strategy strategy = Strategy::kNone;
  ScheduleKind schedule = ScheduleKind::kContinuous;
  std::uint64_t single_shot_round = 1;
  std::size_t sybils = 0;
  SpawnSchedule spawn;
  double boost = 20.0;           // gamma
  double blend = 0.5;            // lambda
  double diversification = 0.1;  // rho
  int target_label = 1;
  int flip_from = 0;
  int flip_to = 1;
  // Extra generated tail samples added to the controller's backdoor shard
  // per spawned sybil.
  std::size_t extra_tail_samples = 0;

  // Throws ConfigError naming the offending key.
  void validate(std::uint64_t rounds) const;
  friend bool operator==(const AttackSpec&, const AttackSpec&) = default;
};

class Population {
 public:
  ClientId add_honest();
  ClientId add_adversary();
  // Registers k sybils controlled by `adversary`, joining per `schedule`.
  // Throws PreconditionError for an unknown adversary or a second spawn
  // for the same adversary.
  std::vector<ClientId> spawn_sybils(ClientId adversary, std::size_t k,
                                     const SpawnSchedule& schedule);

  // Ids that may be sampled in round t, ascending.
  std::vector<ClientId> active_at(std::uint64_t round) const;
  const ClientIdentity& identity(ClientId id) const;
  bool is_malicious(ClientId id) const;
  // The adversary a client acts for (itself for an adversary).
  ClientId controller_of(ClientId id) const;
  std::size_t size() const { return clients_.size(); }
  const std::vector<ClientIdentity>& clients() const { return clients_; }

 private:
  std::vector<ClientIdentity> clients_;
  std::vector<ClientId> spawned_for_;
};

// Every sample of `from` relabelled `to`; features untouched. from == to
// returns the shard unchanged.
Dataset label_flip(const Dataset& shard, int from, int to);

// gamma * delta. gamma < 1 is a PreconditionError.
ParameterVector scale_update(std::span<const double> delta, double gamma);

// Local training on a mixture of the honest shard and the backdoor shard
// relabelled to target_label, a `blend` fraction of the mixture being
// backdoor samples (drawn cyclically). The mixture has the honest shard's
// size. The result is clipped to `bound` (+inf for no bound).
ParameterVector train_backdoor(const ModelSpec& spec, std::span<const double> global,
                               const Dataset& honest, const Dataset& backdoor, int target_label,
                               double blend, double bound, Norm p, const TrainConfig& train,
                               std::uint64_t seed);

// Normalized descent direction of the backdoor loss (backdoor shard
// relabelled to target_label) at `global`.
ParameterVector backdoor_direction(const ModelSpec& spec, std::span<const double> global,
                                   const Dataset& backdoor, int target_label);

struct SybilTailResult {
  std::vector<ParameterVector> updates;  // one per id, in the given order
  bool wrapped = false;  // more ids than orthogonal directions
};

// Clones of `shared`, each pushed by rho * bound along its own unit vector
// (orthogonal to `shared` and to each other, Gram-Schmidt on vectors drawn
// from derive_seed(seed, "sybil-direction", id, round)), then clipped to
// `bound`. With a single id the shared update is returned unchanged. An
// infinite bound skips the clip and scales the push by ||shared||.
SybilTailResult diversify(std::span<const double> shared, std::span<const ClientId> ids,
                          double bound, double rho, Norm p, std::uint64_t seed,
                          std::uint64_t round);

struct ControllerState {
  Dataset honest;
  Dataset backdoor;  // tail samples, original labels
  int target_label = 1;
  double blend = 0.5;
  TrainConfig train;
};

SybilTailResult sybil_tail_round(const ControllerState& controller, std::span<const ClientId> ids,
                                 const ModelSpec& spec, std::span<const double> global,
                                 double bound, double rho, Norm p, std::uint64_t seed,
                                 std::uint64_t round);

// One update per id with p-norm exactly `bound`, along `direction`.
std::vector<ParameterVector> stat_manip_round(std::span<const ClientId> ids, double bound,
                                              std::span<const double> direction, Norm p);

// Sampled ids that attack in round t, ascending. Malicious ids that do not
// fire behave honestly.
std::vector<ClientId> schedule(const AttackSpec& spec, std::uint64_t round,
                               std::span<const ClientId> sampled, const Population& population);

}  // namespace rofl

#endif  // ROFL_ATTACKS_H_

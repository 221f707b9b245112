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

#include "rofl/attacks.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "rofl/bytes.h"
#include "rofl/errors.h"

namespace rofl {
namespace {

template <typename E>
struct Named {
  E value;
  const char* name;
};

constexpr Named<Strategy> kStrategies[] = {
    {Strategy::kNone, "none"},
    {Strategy::kLabelFlip, "label_flip"},
    {Strategy::kScale, "scale"},
    {Strategy::kBackdoorPrototypical, "backdoor_prototypical"},
    {Strategy::kBackdoorTail, "backdoor_tail"},
    {Strategy::kSybilTail, "sybil_tail"},
    {Strategy::kStatManip, "stat_manip"},
};

constexpr Named<ScheduleKind> kSchedules[] = {
    {ScheduleKind::kSingleShot, "single_shot"},
    {ScheduleKind::kContinuous, "continuous"},
    {ScheduleKind::kFixedFrequency, "fixed_frequency"},
};

constexpr Named<SpawnKind> kSpawnKinds[] = {
    {SpawnKind::kAt, "at"},
    {SpawnKind::kGeometric, "geometric"},
};

template <typename E, std::size_t N>
E parse_named(const Named<E> (&table)[N], const std::string& name, const char* what) {
  for (const auto& e : table) {
    if (name == e.name) return e.value;
  }
  std::string choices;
  for (const auto& e : table) choices += std::string(choices.empty() ? "" : "|") + e.name;
  throw ConfigError(std::string("unknown ") + what + " '" + name + "' (expected " + choices + ")");
}

template <typename E, std::size_t N>
std::string name_of(const Named<E> (&table)[N], E value) {
  for (const auto& e : table) {
    if (e.value == value) return e.name;
  }
  return "?";
}

ParameterVector scaled_to_norm(std::span<const double> v, double bound, Norm p) {
  const double n = p_norm(v, p);
  ParameterVector out(v.begin(), v.end());
  if (n == 0.0) return out;
  for (double& x : out) x *= bound / n;
  return out;
}

}  // namespace

std::string to_string(Role role) {
  switch (role) {
    case Role::kHonest:
      return "honest";
    case Role::kAdversary:
      return "adversary";
    case Role::kSybil:
      return "sybil";
  }
  return "?";
}

Strategy parse_strategy(const std::string& name) { return parse_named(kStrategies, name, "attack strategy"); }
std::string to_string(Strategy s) { return name_of(kStrategies, s); }

std::vector<std::string> strategy_names() {
  std::vector<std::string> out;
  for (const auto& s : kStrategies) out.emplace_back(s.name);
  return out;
}

ScheduleKind parse_schedule(const std::string& name) { return parse_named(kSchedules, name, "schedule"); }
std::string to_string(ScheduleKind s) { return name_of(kSchedules, s); }

SpawnKind parse_spawn_kind(const std::string& name) { return parse_named(kSpawnKinds, name, "spawn kind"); }
std::string to_string(SpawnKind s) { return name_of(kSpawnKinds, s); }

std::uint64_t SpawnSchedule::join_round(std::size_t j) const {
  if (kind == SpawnKind::kAt) return round;
  // The count after m doublings is 2^m, so sybil j waits ceil(log2(j + 1)).
  std::uint64_t doublings = 0;
  while ((std::uint64_t{1} << doublings) < j + 1) ++doublings;
  return round + doublings * period;
}

void AttackSpec::validate(std::uint64_t rounds) const {
  if (boost < 1.0) throw ConfigError("attack.boost: boost must be >= 1");
  if (!(blend > 0.0 && blend <= 1.0)) throw ConfigError("attack.blend: blend must be in (0, 1]");
  if (!(diversification >= 0.0 && diversification < 1.0)) {
    throw ConfigError("attack.diversification: must be in [0, 1)");
  }
  if (schedule == ScheduleKind::kSingleShot && (single_shot_round < 1 || single_shot_round > rounds)) {
    throw ConfigError("attack.single_shot_round: round " + std::to_string(single_shot_round) +
                      " outside 1.." + std::to_string(rounds));
  }
  if (spawn.kind == SpawnKind::kGeometric && spawn.period == 0) {
    throw ConfigError("attack.spawn.period: must be positive");
  }
  if (spawn.round < 1) throw ConfigError("attack.spawn.round: must be >= 1");
  if (target_label < 0) throw ConfigError("attack.target_label: must be non-negative");
  if (flip_from < 0 || flip_to < 0) throw ConfigError("attack.flip_from/flip_to: must be non-negative");
}

ClientId Population::add_honest() {
  const ClientId id = clients_.size();
  clients_.push_back({id, Role::kHonest, std::nullopt, 0});
  return id;
}

ClientId Population::add_adversary() {
  const ClientId id = clients_.size();
  clients_.push_back({id, Role::kAdversary, std::nullopt, 0});
  return id;
}

std::vector<ClientId> Population::spawn_sybils(ClientId adversary, std::size_t k,
                                               const SpawnSchedule& schedule) {
  if (adversary >= clients_.size() || clients_[adversary].role != Role::kAdversary) {
    throw PreconditionError("spawn_sybils: " + std::to_string(adversary) + " is not an adversary");
  }
  if (std::find(spawned_for_.begin(), spawned_for_.end(), adversary) != spawned_for_.end()) {
    throw PreconditionError("spawn_sybils: adversary " + std::to_string(adversary) + " already spawned");
  }
  spawned_for_.push_back(adversary);
  std::vector<ClientId> ids;
  for (std::size_t j = 0; j < k; ++j) {
    const ClientId id = clients_.size();
    clients_.push_back({id, Role::kSybil, adversary, schedule.join_round(j)});
    ids.push_back(id);
  }
  return ids;
}

std::vector<ClientId> Population::active_at(std::uint64_t round) const {
  std::vector<ClientId> out;
  for (const auto& c : clients_) {
    if (c.spawn_round <= round) out.push_back(c.id);
  }
  return out;
}

const ClientIdentity& Population::identity(ClientId id) const {
  if (id >= clients_.size()) throw PreconditionError("unknown client " + std::to_string(id));
  return clients_[id];
}

bool Population::is_malicious(ClientId id) const { return identity(id).role != Role::kHonest; }

ClientId Population::controller_of(ClientId id) const {
  const auto& c = identity(id);
  return c.role == Role::kSybil ? *c.controller : id;
}

Dataset label_flip(const Dataset& shard, int from, int to) {
  const int classes = static_cast<int>(shard.num_classes);
  if (from < 0 || from >= classes || to < 0 || to >= classes) {
    throw ConfigError("label_flip: classes must be in [0, " + std::to_string(classes) + ")");
  }
  Dataset out = shard;
  for (int& y : out.labels) {
    if (y == from) y = to;
  }
  return out;
}

ParameterVector scale_update(std::span<const double> delta, double gamma) {
  if (gamma < 1.0) throw PreconditionError("scale_update: gamma must be >= 1");
  ParameterVector out(delta.begin(), delta.end());
  for (double& x : out) x *= gamma;
  return out;
}

ParameterVector train_backdoor(const ModelSpec& spec, std::span<const double> global,
                               const Dataset& honest, const Dataset& backdoor, int target_label,
                               double blend, double bound, Norm p, const TrainConfig& train,
                               std::uint64_t seed) {
  if (honest.size() == 0 || backdoor.size() == 0) {
    throw PreconditionError("train_backdoor needs nonempty honest and backdoor shards");
  }
  if (!(blend > 0.0 && blend <= 1.0)) throw ConfigError("blend must be in (0, 1]");
  const std::size_t n = honest.size();
  const std::size_t n_backdoor =
      std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(blend * static_cast<double>(n))), 1, n);
  std::mt19937_64 rng(derive_seed(seed, "backdoor-mix", 0, 0));

  std::vector<std::size_t> honest_idx(n);
  std::iota(honest_idx.begin(), honest_idx.end(), 0);
  std::shuffle(honest_idx.begin(), honest_idx.end(), rng);
  honest_idx.resize(n - n_backdoor);

  std::vector<std::size_t> bd_order(backdoor.size());
  std::iota(bd_order.begin(), bd_order.end(), 0);
  std::shuffle(bd_order.begin(), bd_order.end(), rng);
  std::vector<std::size_t> bd_idx;
  for (std::size_t i = 0; i < n_backdoor; ++i) bd_idx.push_back(bd_order[i % bd_order.size()]);

  Dataset mix = relabel(subset(backdoor, bd_idx), target_label);
  if (!honest_idx.empty()) mix = concat(subset(honest, honest_idx), mix);
  ParameterVector delta = local_train(spec, global, mix, train, seed);
  if (std::isfinite(bound)) delta = clip_to_norm(delta, bound, p);
  return delta;
}

ParameterVector backdoor_direction(const ModelSpec& spec, std::span<const double> global,
                                   const Dataset& backdoor, int target_label) {
  if (backdoor.size() == 0) throw PreconditionError("backdoor_direction needs a nonempty shard");
  const Dataset target = relabel(backdoor, target_label);
  std::vector<std::size_t> all(target.size());
  std::iota(all.begin(), all.end(), 0);
  ParameterVector g = grad(spec, global, target, all);
  const double n = p_norm(g, Norm::kL2);
  for (double& x : g) x = n > 0.0 ? -x / n : 0.0;
  return g;
}

SybilTailResult diversify(std::span<const double> shared, std::span<const ClientId> ids,
                          double bound, double rho, Norm p, std::uint64_t seed,
                          std::uint64_t round) {
  if (!(rho >= 0.0 && rho < 1.0)) throw ConfigError("diversification must be in [0, 1)");
  SybilTailResult result;
  const std::size_t d = shared.size();
  const bool bounded = std::isfinite(bound);
  auto finish = [&](ParameterVector v) {
    return bounded ? clip_to_norm(v, bound, p) : v;
  };
  if (ids.size() <= 1 || rho == 0.0) {
    for (std::size_t i = 0; i < ids.size(); ++i) result.updates.push_back(finish({shared.begin(), shared.end()}));
    return result;
  }
  const double push = rho * (bounded ? bound : p_norm(shared, Norm::kL2));

  // Orthonormal basis built so far, starting from the shared direction.
  std::vector<ParameterVector> basis;
  const double shared_norm = p_norm(shared, Norm::kL2);
  if (shared_norm > 0.0) {
    ParameterVector s(shared.begin(), shared.end());
    for (double& x : s) x /= shared_norm;
    basis.push_back(std::move(s));
  }
  for (ClientId id : ids) {
    std::mt19937_64 rng(derive_seed(seed, "sybil-direction", id, round));
    std::normal_distribution<double> normal(0.0, 1.0);
    ParameterVector u(d);
    for (double& x : u) x = normal(rng);
    const bool orthogonal = basis.size() < d;
    if (orthogonal) {
      for (const auto& b : basis) {
        double dot = 0.0;
        for (std::size_t k = 0; k < d; ++k) dot += u[k] * b[k];
        for (std::size_t k = 0; k < d; ++k) u[k] -= dot * b[k];
      }
    } else {
      result.wrapped = true;
    }
    const double n = p_norm(u, Norm::kL2);
    for (double& x : u) x /= n;
    if (orthogonal) basis.push_back(u);
    ParameterVector v(shared.begin(), shared.end());
    for (std::size_t k = 0; k < d; ++k) v[k] += push * u[k];
    result.updates.push_back(finish(std::move(v)));
  }
  return result;
}

SybilTailResult sybil_tail_round(const ControllerState& controller, std::span<const ClientId> ids,
                                 const ModelSpec& spec, std::span<const double> global,
                                 double bound, double rho, Norm p, std::uint64_t seed,
                                 std::uint64_t round) {
  const ParameterVector shared =
      train_backdoor(spec, global, controller.honest, controller.backdoor, controller.target_label,
                     controller.blend, bound, p, controller.train,
                     derive_seed(seed, "sybil-shared", ids.empty() ? 0 : ids.front(), round));
  return diversify(shared, ids, bound, rho, p, seed, round);
}

std::vector<ParameterVector> stat_manip_round(std::span<const ClientId> ids, double bound,
                                              std::span<const double> direction, Norm p) {
  if (!(bound > 0.0) || !std::isfinite(bound)) throw PreconditionError("stat_manip needs a finite public bound");
  if (p_norm(direction, p) == 0.0) throw PreconditionError("stat_manip needs a nonzero direction");
  return std::vector<ParameterVector>(ids.size(), scaled_to_norm(direction, bound, p));
}

std::vector<ClientId> schedule(const AttackSpec& spec, std::uint64_t round,
                               std::span<const ClientId> sampled, const Population& population) {
  std::vector<ClientId> out;
  if (spec.strategy == Strategy::kNone) return out;
  if (spec.schedule == ScheduleKind::kSingleShot && round != spec.single_shot_round) return out;
  for (ClientId id : sampled) {
    if (population.is_malicious(id)) out.push_back(id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace rofl

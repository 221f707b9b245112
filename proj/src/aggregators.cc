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

#include "rofl/aggregators.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rofl/errors.h"

namespace rofl {
namespace {

struct KindName {
  AggregatorKind kind;
  const char* name;
};

constexpr KindName kKinds[] = {
    {AggregatorKind::kFedAvg, "fedavg"},
    {AggregatorKind::kNormBoundStatic, "norm_bound_static"},
    {AggregatorKind::kNormBoundDynamic, "norm_bound_dynamic"},
    {AggregatorKind::kMultiKrum, "multi_krum"},
    {AggregatorKind::kCoordMedian, "coord_median"},
    {AggregatorKind::kTrimmedMean, "trimmed_mean"},
    {AggregatorKind::kFoolsGold, "foolsgold"},
};

std::vector<ClientUpdate> sorted_by_client(std::span<const ClientUpdate> updates) {
  std::vector<ClientUpdate> out(updates.begin(), updates.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const ClientUpdate& a, const ClientUpdate& b) { return a.client < b.client; });
  return out;
}

std::size_t common_dimension(std::span<const ClientUpdate> updates) {
  if (updates.empty()) throw PreconditionError("aggregation needs at least one update");
  const std::size_t d = updates.front().delta.size();
  for (const auto& u : updates) {
    if (u.delta.size() != d) throw ShapeError("updates have different lengths");
  }
  return d;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

}  // namespace

AggregatorKind parse_aggregator_kind(const std::string& name) {
  for (const auto& k : kKinds) {
    if (name == k.name) return k.kind;
  }
  throw ConfigError("unknown aggregator '" + name + "'");
}

std::string to_string(AggregatorKind kind) {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k.name;
  }
  return "?";
}

std::vector<std::string> aggregator_names() {
  std::vector<std::string> out;
  for (const auto& k : kKinds) out.emplace_back(k.name);
  return out;
}

BoundMode parse_bound_mode(const std::string& name) {
  if (name == "reject") return BoundMode::kReject;
  if (name == "clip") return BoundMode::kClip;
  throw ConfigError("unknown bound mode '" + name + "' (expected reject|clip)");
}

std::string to_string(BoundMode mode) { return mode == BoundMode::kReject ? "reject" : "clip"; }

void AggregatorSpec::validate() const {
  if (!(bound > 0.0)) throw ConfigError("aggregator.bound: norm bound must be positive");
  if (!(multiplier > 0.0)) throw ConfigError("aggregator.multiplier: multiplier must be positive");
  if (!(initial_bound > 0.0)) throw ConfigError("aggregator.initial_bound: must be positive");
  if (!(trim_fraction >= 0.0 && trim_fraction < 0.5)) {
    throw ConfigError("aggregator.trim_fraction: trim fraction must be in [0, 0.5)");
  }
  if (selection < 1) throw ConfigError("aggregator.selection: Multi-Krum needs m >= 1");
}

void UpdateHistory::add(ClientId id, std::span<const double> delta) {
  auto& sum = sums_[id];
  if (sum.empty()) sum.assign(delta.size(), 0.0);
  if (sum.size() != delta.size()) throw ShapeError("history length mismatch");
  for (std::size_t k = 0; k < delta.size(); ++k) sum[k] += delta[k];
}

std::span<const double> UpdateHistory::get(ClientId id) const {
  auto it = sums_.find(id);
  if (it == sums_.end()) return {};
  return it->second;
}

ParameterVector fedavg(std::span<const ClientUpdate> updates, std::span<const double> weights) {
  const std::size_t d = common_dimension(updates);
  if (!weights.empty() && weights.size() != updates.size()) {
    throw ShapeError("one weight per update required");
  }
  std::vector<std::size_t> order(updates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return updates[a].client < updates[b].client; });
  ParameterVector out(d, 0.0);
  const double uniform = 1.0 / static_cast<double>(updates.size());
  for (std::size_t i : order) {
    const double w = weights.empty() ? uniform : weights[i];
    for (std::size_t k = 0; k < d; ++k) out[k] += w * updates[i].delta[k];
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) throw PreconditionError("median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

double dynamic_bound(std::span<const double> public_norms, double multiplier) {
  if (public_norms.empty()) throw PreconditionError("dynamic bound needs at least one norm");
  if (!(multiplier > 0.0)) throw ConfigError("multiplier must be positive");
  return median({public_norms.begin(), public_norms.end()}) * multiplier;
}

FilterResult norm_bound_filter(std::span<const ClientUpdate> updates, double bound, Norm p,
                               BoundMode mode, double tolerance, bool use_declared) {
  if (!(bound > 0.0)) throw ConfigError("norm bound must be positive");
  FilterResult result;
  for (const auto& u : sorted_by_client(updates)) {
    const double n = use_declared ? u.declared_norm : p_norm(u.delta, p);
    if (n <= bound + tolerance) {
      result.accepted.push_back(u.client);
      result.survivors.push_back(u);
    } else if (mode == BoundMode::kClip && !use_declared) {
      ClientUpdate clipped = u;
      clipped.delta = clip_to_norm(u.delta, bound, p);
      result.accepted.push_back(u.client);
      result.survivors.push_back(std::move(clipped));
    } else {
      result.rejected.emplace_back(u.client, "norm");
    }
  }
  return result;
}

std::vector<double> krum_scores(std::span<const ClientUpdate> updates, std::size_t f) {
  const std::size_t n = updates.size();
  if (n < f + 3) {
    throw ConfigError("Multi-Krum needs n >= f + 3 (n = " + std::to_string(n) + ", f = " +
                      std::to_string(f) + ")");
  }
  common_dimension(updates);
  const std::size_t neighbours = n - f - 2;
  std::vector<double> scores(n);
  std::vector<double> dist;
  for (std::size_t i = 0; i < n; ++i) {
    dist.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) dist.push_back(squared_distance(updates[i].delta, updates[j].delta));
    }
    std::sort(dist.begin(), dist.end());
    scores[i] = std::accumulate(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(neighbours), 0.0);
  }
  return scores;
}

std::vector<ClientId> multi_krum(std::span<const ClientUpdate> updates, std::size_t f, std::size_t m) {
  if (m < 1) throw ConfigError("Multi-Krum needs m >= 1");
  const std::vector<ClientUpdate> sorted = sorted_by_client(updates);
  const std::vector<double> scores = krum_scores(sorted, f);
  std::vector<std::size_t> order(sorted.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::vector<ClientId> out;
  for (std::size_t i = 0; i < std::min(m, order.size()); ++i) out.push_back(sorted[order[i]].client);
  return out;
}

ParameterVector coord_median(std::span<const ClientUpdate> updates) {
  const std::size_t d = common_dimension(updates);
  ParameterVector out(d);
  std::vector<double> column(updates.size());
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t i = 0; i < updates.size(); ++i) column[i] = updates[i].delta[k];
    out[k] = median(column);
  }
  return out;
}

ParameterVector trimmed_mean(std::span<const ClientUpdate> updates, double beta) {
  if (!(beta >= 0.0 && beta < 0.5)) throw ConfigError("trim fraction must be in [0, 0.5)");
  const std::size_t d = common_dimension(updates);
  const std::size_t n = updates.size();
  const auto trim = static_cast<std::size_t>(std::floor(beta * static_cast<double>(n)));
  ParameterVector out(d);
  std::vector<double> column(n);
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t i = 0; i < n; ++i) column[i] = updates[i].delta[k];
    std::sort(column.begin(), column.end());
    double s = 0.0;
    for (std::size_t i = trim; i < n - trim; ++i) s += column[i];
    out[k] = s / static_cast<double>(n - 2 * trim);
  }
  return out;
}

std::vector<double> foolsgold(std::span<const ParameterVector> histories) {
  const std::size_t n = histories.size();
  std::vector<double> norms(n);
  std::size_t nonzero = 0;
  for (std::size_t i = 0; i < n; ++i) {
    norms[i] = p_norm(histories[i], Norm::kL2);
    if (norms[i] > 0.0) ++nonzero;
    if (i > 0 && histories[i].size() != histories[0].size()) throw ShapeError("history length mismatch");
  }
  if (nonzero < 2) throw PreconditionError("FoolsGold needs at least two clients with history");

  // Pairwise cosine similarity; zero histories are similar to nothing.
  std::vector<std::vector<double>> cs(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (norms[i] == 0.0 || norms[j] == 0.0) continue;
      double dot = 0.0;
      for (std::size_t k = 0; k < histories[i].size(); ++k) dot += histories[i][k] * histories[j][k];
      cs[i][j] = cs[j][i] = dot / (norms[i] * norms[j]);
    }
  }
  std::vector<double> maxcs(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) m = std::max(m, cs[i][j]);
    }
    maxcs[i] = n > 1 ? m : 0.0;
  }
  // Pardoning: honest clients that merely resemble a sybil are scaled down
  // by the ratio of their own maximum similarity to the other's.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && maxcs[i] < maxcs[j] && maxcs[j] > 0.0) cs[i][j] *= maxcs[i] / maxcs[j];
    }
  }
  std::vector<double> wv(n);
  for (std::size_t i = 0; i < n; ++i) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) m = std::max(m, cs[i][j]);
    }
    wv[i] = std::clamp(1.0 - m, 0.0, 1.0);
  }
  const double top = *std::max_element(wv.begin(), wv.end());
  for (std::size_t i = 0; i < n; ++i) {
    if (norms[i] == 0.0) {
      wv[i] = 1.0;
      continue;
    }
    if (top <= 0.0) {
      wv[i] = 0.0;
      continue;
    }
    double w = wv[i] / top;
    if (w == 1.0) w = 0.99;
    // Logit with the 0.5 shift, clamped to [0, 1].
    w = w <= 0.0 ? 0.0 : std::log(w / (1.0 - w)) + 0.5;
    wv[i] = std::clamp(w, 0.0, 1.0);
  }
  return wv;
}

std::map<ClientId, double> foolsgold(const UpdateHistory& history, std::span<const ClientId> clients) {
  std::vector<ClientId> ids(clients.begin(), clients.end());
  std::sort(ids.begin(), ids.end());
  std::size_t d = 0;
  for (ClientId id : ids) d = std::max(d, history.get(id).size());
  std::vector<ParameterVector> hs;
  for (ClientId id : ids) {
    const auto h = history.get(id);
    hs.emplace_back(h.empty() ? ParameterVector(d, 0.0) : ParameterVector(h.begin(), h.end()));
  }
  const std::vector<double> w = foolsgold(hs);
  std::map<ClientId, double> out;
  for (std::size_t i = 0; i < ids.size(); ++i) out[ids[i]] = w[i];
  return out;
}

AggregationResult aggregate(std::span<const ClientUpdate> updates, const AggregatorSpec& spec,
                            const UpdateHistory& history, double tolerance) {
  spec.validate();
  const std::size_t d = common_dimension(updates);
  const std::vector<ClientUpdate> sorted = sorted_by_client(updates);
  AggregationResult result;
  std::vector<double> declared;
  for (const auto& u : sorted) declared.push_back(u.declared_norm);
  result.median_norm = median(declared);

  auto accept_all = [&]() {
    for (const auto& u : sorted) result.accepted.push_back(u.client);
  };

  switch (spec.kind) {
    case AggregatorKind::kFedAvg:
      accept_all();
      result.delta = fedavg(sorted);
      break;
    case AggregatorKind::kNormBoundStatic:
    case AggregatorKind::kNormBoundDynamic: {
      result.bound = spec.kind == AggregatorKind::kNormBoundStatic
                         ? spec.bound
                         : dynamic_bound(declared, spec.multiplier);
      FilterResult f = norm_bound_filter(sorted, result.bound, spec.norm, spec.mode, tolerance);
      result.accepted = std::move(f.accepted);
      result.rejected = std::move(f.rejected);
      if (f.survivors.empty()) {
        result.delta.assign(d, 0.0);
        result.empty_accepted = true;
      } else {
        result.delta = fedavg(f.survivors);
      }
      break;
    }
    case AggregatorKind::kMultiKrum: {
      result.accepted = multi_krum(sorted, spec.byzantine, spec.selection);
      std::vector<ClientUpdate> chosen;
      for (const auto& u : sorted) {
        if (std::find(result.accepted.begin(), result.accepted.end(), u.client) != result.accepted.end()) {
          chosen.push_back(u);
        } else {
          result.rejected.emplace_back(u.client, "krum");
        }
      }
      std::sort(result.accepted.begin(), result.accepted.end());
      result.delta = fedavg(chosen);
      break;
    }
    case AggregatorKind::kCoordMedian:
      accept_all();
      result.delta = coord_median(sorted);
      break;
    case AggregatorKind::kTrimmedMean:
      accept_all();
      result.delta = trimmed_mean(sorted, spec.trim_fraction);
      break;
    case AggregatorKind::kFoolsGold: {
      accept_all();
      std::vector<ClientId> ids;
      for (const auto& u : sorted) ids.push_back(u.client);
      std::size_t with_history = 0;
      for (ClientId id : ids) {
        if (p_norm(history.get(id), Norm::kL2) > 0.0) ++with_history;
      }
      if (with_history >= 2) {
        result.weights = foolsgold(history, ids);
      } else {
        for (ClientId id : ids) result.weights[id] = 1.0;
      }
      double total = 0.0;
      for (const auto& [id, w] : result.weights) total += w;
      result.delta.assign(d, 0.0);
      if (total <= 0.0) {
        result.empty_accepted = true;
      } else {
        std::vector<double> w;
        for (const auto& u : sorted) w.push_back(result.weights.at(u.client) / total);
        result.delta = fedavg(sorted, w);
      }
      break;
    }
  }
  return result;
}

}  // namespace rofl

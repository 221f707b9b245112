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

#include "rofl/model.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "rofl/bytes.h"
#include "rofl/errors.h"

namespace rofl {

Architecture parse_architecture(const std::string& name) {
  if (name == "logreg") return Architecture::kLogReg;
  if (name == "mlp") return Architecture::kMlp;
  throw ConfigError("unknown architecture '" + name + "' (expected logreg|mlp)");
}

std::string to_string(Architecture a) { return a == Architecture::kLogReg ? "logreg" : "mlp"; }

std::size_t ModelSpec::dimension() const {
  if (arch == Architecture::kLogReg) return classes * features + classes;
  return hidden * features + hidden + classes * hidden + classes;
}

namespace {

void check_shapes(const ModelSpec& spec, std::span<const double> params, const Dataset& data) {
  if (params.size() != spec.dimension()) {
    throw ShapeError("parameter vector has " + std::to_string(params.size()) + " entries, model needs " +
                     std::to_string(spec.dimension()));
  }
  if (data.num_features != spec.features || data.num_classes != spec.classes) {
    throw ShapeError("dataset shape does not match the model");
  }
}

void softmax_inplace(std::span<double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double& v : z) {
    v = std::exp(v - m);
    s += v;
  }
  for (double& v : z) v /= s;
}

// Forward pass shared by loss/grad; fills `hidden` for the MLP.
void forward(const ModelSpec& spec, std::span<const double> params, std::span<const double> x,
             std::span<double> hidden, std::span<double> out) {
  const std::size_t f = spec.features, c = spec.classes;
  if (spec.arch == Architecture::kLogReg) {
    const double* w = params.data();
    const double* b = w + c * f;
    for (std::size_t k = 0; k < c; ++k) {
      double z = b[k];
      for (std::size_t j = 0; j < f; ++j) z += w[k * f + j] * x[j];
      out[k] = z;
    }
    return;
  }
  const std::size_t h = spec.hidden;
  const double* w1 = params.data();
  const double* b1 = w1 + h * f;
  const double* w2 = b1 + h;
  const double* b2 = w2 + c * h;
  for (std::size_t u = 0; u < h; ++u) {
    double z = b1[u];
    for (std::size_t j = 0; j < f; ++j) z += w1[u * f + j] * x[j];
    hidden[u] = std::tanh(z);
  }
  for (std::size_t k = 0; k < c; ++k) {
    double z = b2[k];
    for (std::size_t u = 0; u < h; ++u) z += w2[k * h + u] * hidden[u];
    out[k] = z;
  }
}

}  // namespace

ParameterVector init_params(const ModelSpec& spec, std::uint64_t seed, double scale) {
  ParameterVector p(spec.dimension(), 0.0);
  std::mt19937_64 rng(derive_seed(seed, "init", 0, 0));
  std::normal_distribution<double> n(0.0, scale);
  const std::size_t f = spec.features, c = spec.classes, h = spec.hidden;
  if (spec.arch == Architecture::kLogReg) {
    for (std::size_t i = 0; i < c * f; ++i) p[i] = n(rng);
  } else {
    for (std::size_t i = 0; i < h * f; ++i) p[i] = n(rng);
    for (std::size_t i = 0; i < c * h; ++i) p[h * f + h + i] = n(rng);
  }
  return p;
}

void logits(const ModelSpec& spec, std::span<const double> params, std::span<const double> x,
            std::span<double> out) {
  if (params.size() != spec.dimension() || x.size() != spec.features || out.size() != spec.classes) {
    throw ShapeError("logits: shape mismatch");
  }
  std::vector<double> hidden(spec.arch == Architecture::kMlp ? spec.hidden : 0);
  forward(spec, params, x, hidden, out);
}

int predict(const ModelSpec& spec, std::span<const double> params, std::span<const double> x) {
  std::vector<double> z(spec.classes);
  logits(spec, params, x, z);
  return static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
}

double loss(const ModelSpec& spec, std::span<const double> params, const Dataset& data,
            std::span<const std::size_t> batch) {
  if (batch.empty()) throw PreconditionError("loss needs a nonempty batch");
  check_shapes(spec, params, data);
  std::vector<double> hidden(spec.arch == Architecture::kMlp ? spec.hidden : 0), z(spec.classes);
  double total = 0.0;
  for (std::size_t i : batch) {
    forward(spec, params, data.row(i), hidden, z);
    const double m = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double v : z) s += std::exp(v - m);
    total += std::log(s) + m - z[static_cast<std::size_t>(data.labels[i])];
  }
  return total / static_cast<double>(batch.size());
}

ParameterVector grad(const ModelSpec& spec, std::span<const double> params, const Dataset& data,
                     std::span<const std::size_t> batch) {
  if (batch.empty()) throw PreconditionError("grad needs a nonempty batch");
  check_shapes(spec, params, data);
  const std::size_t f = spec.features, c = spec.classes, h = spec.hidden;
  ParameterVector g(spec.dimension(), 0.0);
  std::vector<double> hidden(spec.arch == Architecture::kMlp ? h : 0), z(c), dh(h);

  for (std::size_t i : batch) {
    const auto x = data.row(i);
    forward(spec, params, x, hidden, z);
    softmax_inplace(z);
    z[static_cast<std::size_t>(data.labels[i])] -= 1.0;  // dL/dlogits
    if (spec.arch == Architecture::kLogReg) {
      for (std::size_t k = 0; k < c; ++k) {
        for (std::size_t j = 0; j < f; ++j) g[k * f + j] += z[k] * x[j];
        g[c * f + k] += z[k];
      }
      continue;
    }
    const double* w2 = params.data() + h * f + h;
    double* gw1 = g.data();
    double* gb1 = gw1 + h * f;
    double* gw2 = gb1 + h;
    double* gb2 = gw2 + c * h;
    std::fill(dh.begin(), dh.end(), 0.0);
    for (std::size_t k = 0; k < c; ++k) {
      for (std::size_t u = 0; u < h; ++u) {
        gw2[k * h + u] += z[k] * hidden[u];
        dh[u] += z[k] * w2[k * h + u];
      }
      gb2[k] += z[k];
    }
    for (std::size_t u = 0; u < h; ++u) {
      const double pre = dh[u] * (1.0 - hidden[u] * hidden[u]);
      for (std::size_t j = 0; j < f; ++j) gw1[u * f + j] += pre * x[j];
      gb1[u] += pre;
    }
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (double& v : g) v *= inv;
  return g;
}

ParameterVector local_train(const ModelSpec& spec, std::span<const double> global,
                            const Dataset& shard, const TrainConfig& config, std::uint64_t seed) {
  if (shard.size() == 0) throw PreconditionError("local training needs a nonempty shard");
  if (config.batch_size == 0) throw ConfigError("batch size must be positive");
  if (!(config.learning_rate >= 0.0)) throw ConfigError("learning rate must be non-negative");
  check_shapes(spec, global, shard);
  ParameterVector w(global.begin(), global.end());
  std::vector<std::size_t> order(shard.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t e = 0; e < config.epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const ParameterVector g =
          grad(spec, w, shard, std::span<const std::size_t>(order.data() + start, end - start));
      for (std::size_t k = 0; k < w.size(); ++k) w[k] -= config.learning_rate * g[k];
    }
  }
  for (std::size_t k = 0; k < w.size(); ++k) w[k] -= global[k];
  return w;
}

double evaluate(const ModelSpec& spec, std::span<const double> params, const Dataset& data) {
  check_shapes(spec, params, data);
  std::size_t n = 0, correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.tail_mask[i]) continue;
    ++n;
    if (predict(spec, params, data.row(i)) == data.labels[i]) ++correct;
  }
  if (n == 0) throw PreconditionError("evaluate: no non-tail samples");
  return static_cast<double>(correct) / static_cast<double>(n);
}

double backdoor_eval(const ModelSpec& spec, std::span<const double> params, const Dataset& data) {
  check_shapes(spec, params, data);
  std::size_t n = 0, hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!data.tail_mask[i]) continue;
    ++n;
    if (predict(spec, params, data.row(i)) == data.backdoor_target) ++hits;
  }
  if (n == 0) throw PreconditionError("backdoor_eval: no tail samples");
  return static_cast<double>(hits) / static_cast<double>(n);
}

}  // namespace rofl

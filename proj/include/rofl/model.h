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

// Small classifiers with exact gradients: multinomial logistic regression
// and a one-hidden-layer tanh MLP, trained with minibatch SGD on the mean
// cross-entropy loss.
//
// Parameter layout (row-major):
//   logreg: W[C][f], b[C]                         d = C f + C
//   mlp:    W1[H][f], b1[H], W2[C][H], b2[C]      d = H f + H + C H + C

#ifndef ROFL_MODEL_H_
#define ROFL_MODEL_H_

#include <cstdint>
#include <span>
#include <string>

#include "rofl/dataset.h"
#include "rofl/vector_ops.h"

namespace rofl {

enum class Architecture { kLogReg, kMlp };

Architecture parse_architecture(const std::string& name);
std::string to_string(Architecture a);

struct ModelSpec {
  Architecture arch = Architecture::kLogReg;
  std::size_t features = 20;
  std::size_t classes = 3;
  std::size_t hidden = 16;  // mlp only

  std::size_t dimension() const;
  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

// Gaussian(0, scale) weights, zero biases.
ParameterVector init_params(const ModelSpec& spec, std::uint64_t seed, double scale = 0.01);

void logits(const ModelSpec& spec, std::span<const double> params, std::span<const double> x,
            std::span<double> out);
int predict(const ModelSpec& spec, std::span<const double> params, std::span<const double> x);

// Mean cross-entropy over `batch` (indices into data). Empty batch throws.
double loss(const ModelSpec& spec, std::span<const double> params, const Dataset& data,
            std::span<const std::size_t> batch);
ParameterVector grad(const ModelSpec& spec, std::span<const double> params, const Dataset& data,
                     std::span<const std::size_t> batch);

struct TrainConfig {
  std::size_t epochs = 1;
  double learning_rate = 0.1;
  std::size_t batch_size = 32;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// Returns trained - global. The shuffling stream is seeded by `seed` only.
ParameterVector local_train(const ModelSpec& spec, std::span<const double> global,
                            const Dataset& shard, const TrainConfig& config, std::uint64_t seed);

// Fraction of non-tail samples classified correctly. Throws
// PreconditionError when there are none.
double evaluate(const ModelSpec& spec, std::span<const double> params, const Dataset& data);
// Fraction of tail samples classified as data.backdoor_target.
double backdoor_eval(const ModelSpec& spec, std::span<const double> params, const Dataset& data);

}  // namespace rofl

#endif  // ROFL_MODEL_H_

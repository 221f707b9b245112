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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "rofl/errors.h"
#include "oracles.h"

namespace rofl {
namespace {

Dataset random_data(std::size_t n, std::size_t f, std::size_t c, std::mt19937_64& gen) {
  std::normal_distribution<double> x(0.0, 1.0);
  Dataset d;
  d.num_features = f;
  d.num_classes = c;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < f; ++j) d.features.push_back(x(gen));
    d.labels.push_back(static_cast<int>(gen() % c));
    d.tail_mask.push_back(0);
  }
  return d;
}

std::vector<std::size_t> all_rows(const Dataset& d) {
  std::vector<std::size_t> b(d.size());
  std::iota(b.begin(), b.end(), 0);
  return b;
}

TEST(Model, Dimensions) {
  EXPECT_EQ((ModelSpec{Architecture::kLogReg, 20, 3, 0}.dimension()), 63u);
  EXPECT_EQ((ModelSpec{Architecture::kMlp, 4, 3, 5}.dimension()), 5u * 4 + 5 + 3 * 5 + 3);
  EXPECT_EQ(parse_architecture("mlp"), Architecture::kMlp);
  EXPECT_THROW(parse_architecture("cnn"), ConfigError);
}

TEST(Model, GradientMatchesFiniteDifferences) {
  std::mt19937_64 gen(11);
  for (int cfg = 0; cfg < 50; ++cfg) {
    const Architecture arch = cfg % 2 == 0 ? Architecture::kLogReg : Architecture::kMlp;
    const ModelSpec spec{arch, 2 + gen() % 5, 2 + gen() % 3, 2 + gen() % 4};
    const Dataset data = random_data(3 + gen() % 8, spec.features, spec.classes, gen);
    const auto params = init_params(spec, cfg, 0.5);
    const auto batch = all_rows(data);
    const double worst = oracle::gradient_error(spec, params, data, batch);
    EXPECT_LT(worst, 1e-4) << "config " << cfg;
  }
}

TEST(Model, SymmetricBatchHasZeroBiasGradient) {
  const ModelSpec spec{Architecture::kLogReg, 2, 2, 0};
  Dataset d;
  d.num_features = 2;
  d.num_classes = 2;
  d.features = {1.0, 2.0, -1.0, -2.0};
  d.labels = {0, 1};
  d.tail_mask = {0, 0};
  const std::vector<double> zero(spec.dimension(), 0.0);
  const auto g = grad(spec, zero, d, all_rows(d));
  EXPECT_NEAR(g[4], 0.0, 1e-15);
  EXPECT_NEAR(g[5], 0.0, 1e-15);
}

TEST(Model, DuplicatedBatchGivesSameGradient) {
  std::mt19937_64 gen(2);
  const ModelSpec spec{Architecture::kMlp, 4, 3, 5};
  const Dataset d = random_data(6, 4, 3, gen);
  const auto p = init_params(spec, 3, 0.3);
  auto once = all_rows(d), twice = once;
  twice.insert(twice.end(), once.begin(), once.end());
  const auto a = grad(spec, p, d, once), b = grad(spec, p, d, twice);
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-14);
  EXPECT_THROW(grad(spec, p, d, {}), PreconditionError);
}

TEST(Model, LocalTrainDegenerateAndDeterministic) {
  std::mt19937_64 gen(4);
  const ModelSpec spec{Architecture::kLogReg, 5, 3, 0};
  const Dataset d = random_data(50, 5, 3, gen);
  const auto p = init_params(spec, 1, 0.1);
  TrainConfig none;
  none.epochs = 0;
  const auto zero = ParameterVector(spec.dimension(), 0.0);
  EXPECT_EQ(local_train(spec, p, d, none, 1), zero);
  TrainConfig still;
  still.learning_rate = 0.0;
  EXPECT_EQ(local_train(spec, p, d, still, 1), zero);
  TrainConfig tc;
  tc.epochs = 2;
  tc.batch_size = 7;
  const auto a = local_train(spec, p, d, tc, 9);
  EXPECT_EQ(a, local_train(spec, p, d, tc, 9));
  EXPECT_NE(a, local_train(spec, p, d, tc, 10));
  EXPECT_NE(a, zero);
}

TEST(Model, UntrainedModelIsAtChance) {
  SyntheticSpec s;
  s.classes = 2;
  s.samples = 1000;
  s.tail_fraction = 0.0;
  const Dataset d = gen_synthetic(s);
  const ModelSpec spec{Architecture::kLogReg, s.features, 2, 0};
  double total = 0.0;
  const int seeds = 40;
  for (int seed = 0; seed < seeds; ++seed) total += evaluate(spec, init_params(spec, seed, 1.0), d);
  EXPECT_NEAR(total / seeds, 0.5, 0.05);
}

TEST(Model, TailTrainedModelOutscoresCleanModelOnBackdoor) {
  SyntheticSpec s;
  s.samples = 3000;
  const Dataset d = gen_synthetic(s);
  const ModelSpec spec{Architecture::kLogReg, s.features, s.classes, 0};
  const auto p0 = init_params(spec, 1);
  TrainConfig tc;
  tc.epochs = 3;
  auto clean = local_train(spec, p0, d, tc, 1);
  const Dataset tail = relabel(gen_tail_samples(s, 200, 5), s.backdoor_target);
  auto bad = local_train(spec, p0, tail, tc, 1);
  for (std::size_t k = 0; k < p0.size(); ++k) {
    clean[k] += p0[k];
    bad[k] += p0[k];
  }
  const double clean_tail_error = backdoor_eval(spec, clean, d);
  EXPECT_GE(backdoor_eval(spec, bad, d), clean_tail_error);
  EXPECT_GT(backdoor_eval(spec, bad, d), 0.9);
}

TEST(Model, EmptyEvaluationSlicesThrow) {
  SyntheticSpec s;
  s.samples = 200;
  const ModelSpec spec{Architecture::kLogReg, s.features, s.classes, 0};
  const Dataset tail_only = gen_tail_samples(s, 10, 1);
  const auto p = init_params(spec, 1);
  EXPECT_THROW(evaluate(spec, p, tail_only), PreconditionError);
  s.tail_fraction = 0.0;
  EXPECT_THROW(backdoor_eval(spec, p, gen_synthetic(s)), PreconditionError);
}

}  // namespace
}  // namespace rofl

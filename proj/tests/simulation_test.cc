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

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "rofl/errors.h"

namespace rofl {
namespace {

ScenarioConfig small(std::uint64_t rounds = 4) {
  ScenarioConfig c;
  c.rounds = rounds;
  c.population.honest = 10;
  c.population.sample_size = 5;
  c.data.samples = 1500;
  c.data.test_samples = 500;
  c.data.backdoor_samples = 20;
  return c;
}

std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("rofl_sim_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(Simulation, ZeroRoundsKeepsInitialModel) {
  const ScenarioConfig c = small(0);
  const Simulator sim(c);
  const RunResult r = simulate(c);
  EXPECT_TRUE(r.records.empty());
  EXPECT_EQ(r.final_model, sim.model());
}

TEST(Simulation, SampleEdgeCases) {
  Population pop;
  for (int i = 0; i < 6; ++i) pop.add_honest();
  const auto active = pop.active_at(1);
  EXPECT_EQ(sample_clients(active, 6, 1, pop, false), active);
  EXPECT_EQ(sample_clients(active, 3, 9, pop, false), sample_clients(active, 3, 9, pop, false));
  EXPECT_THROW(sample_clients(active, 7, 1, pop, false), ConfigError);
}

TEST(Simulation, SampleFrequencyIsUniform) {
  Population pop;
  for (int i = 0; i < 20; ++i) pop.add_honest();
  const auto active = pop.active_at(1);
  std::vector<int> hits(20, 0);
  const int draws = 10000;
  for (int t = 0; t < draws; ++t) {
    for (ClientId id : sample_clients(active, 5, derive_seed(2, "sample", 0, t), pop, false)) ++hits[id];
  }
  for (int h : hits) EXPECT_NEAR(h / static_cast<double>(draws), 5.0 / 20.0, 0.02);
}

TEST(Simulation, RecordsAccountForEverySampledClient) {
  ScenarioConfig c = small(5);
  c.population.adversaries = 1;
  c.aggregator.kind = AggregatorKind::kNormBoundStatic;
  c.aggregator.bound = 0.5;
  c.attack.strategy = Strategy::kScale;
  c.attack.schedule = ScheduleKind::kFixedFrequency;
  const RunResult r = simulate(c);
  ASSERT_EQ(r.records.size(), 5u);
  for (const auto& rec : r.records) {
    EXPECT_EQ(rec.accepted.size() + rec.rejected.size(), c.population.sample_size);
    std::set<ClientId> all(rec.accepted.begin(), rec.accepted.end());
    for (const auto& [id, why] : rec.rejected) all.insert(id);
    EXPECT_EQ(std::vector<ClientId>(all.begin(), all.end()), rec.sampled);
    EXPECT_FALSE(rec.malicious.empty());
    for (ClientId id : rec.malicious) EXPECT_TRUE(std::count(rec.sampled.begin(), rec.sampled.end(), id));
    EXPECT_EQ(rec.bound, 0.5);
  }
}

TEST(Simulation, MetricsRoundTripAndLineCount) {
  const ScenarioConfig c = small(30);
  const RunResult r = simulate(c);
  const auto dir = scratch("metrics");
  std::filesystem::create_directories(dir);
  write_metrics(r.records, dir / "m.csv");
  const std::string text = slurp(dir / "m.csv");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 31);
  EXPECT_EQ(text.substr(0, text.find('\n')), kMetricsHeader);
  const auto rows = read_metrics(dir / "m.csv");
  ASSERT_EQ(rows.size(), 30u);
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(rows[i], to_row(r.records[i]));

  write_metrics({}, dir / "empty.csv");
  EXPECT_EQ(slurp(dir / "empty.csv"), std::string(kMetricsHeader) + "\n");
  EXPECT_THROW(write_metrics(r.records, "/nonexistent/dir/m.csv"), IoError);
  std::filesystem::remove_all(dir);
}

TEST(Simulation, CleanBaselineLearns) {
  ScenarioConfig c = small(30);
  c.population.honest = 20;
  c.population.sample_size = 10;
  const RunResult r = simulate(c);
  EXPECT_GE(r.records.back().main_accuracy, 0.9);
  EXPECT_LE(r.records.back().backdoor_accuracy, 0.1);
}

TEST(Simulation, RerunsAreByteIdenticalAcrossThreadCounts) {
  ScenarioConfig c = small(6);
  c.population.adversaries = 1;
  c.attack.strategy = Strategy::kSybilTail;
  c.attack.sybils = 3;
  c.attack.spawn = {SpawnKind::kAt, 1, 1};
  c.aggregator.kind = AggregatorKind::kFoolsGold;
  const auto a = scratch("det_a"), b = scratch("det_b");
  run_scenario(c, a);
  c.threads = 3;
  run_scenario(c, b);
  EXPECT_EQ(slurp(a / "metrics.csv"), slurp(b / "metrics.csv"));
  EXPECT_FALSE(slurp(a / "effective_config.json").empty());
  EXPECT_FALSE(slurp(a / "summary.json").empty());
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

TEST(Simulation, SweepWritesOneDirectoryPerValue) {
  ScenarioConfig c = small(2);
  c.aggregator.kind = AggregatorKind::kNormBoundDynamic;
  const auto root = scratch("sweep");
  const auto dirs = run_sweep(c, "aggregator.multiplier", {"1.1", "1.5", "2.0"}, root);
  ASSERT_EQ(dirs.size(), 3u);
  for (const char* v : {"1.1", "1.5", "2.0"}) {
    const auto d = root / (std::string("aggregator.multiplier=") + v);
    EXPECT_TRUE(std::filesystem::exists(d / "metrics.csv"));
    const ScenarioConfig echoed = load_config(d / "effective_config.json");
    EXPECT_DOUBLE_EQ(echoed.aggregator.multiplier, std::stod(v));
  }
  std::filesystem::remove_all(root);
}

TEST(Simulation, CryptoRoundMatchesPlaintextOnToyScale) {
  // Small model so a crypto round stays fast: 3 features, 2 classes.
  ScenarioConfig c = small(2);
  c.population.honest = 3;
  c.population.sample_size = 3;
  c.data.features = 3;
  c.data.classes = 2;
  c.data.backdoor_target = 1;
  c.crypto.bits = 8;
  c.aggregator.kind = AggregatorKind::kNormBoundStatic;
  const RunResult plain = simulate(c);
  c.mode = ProtocolMode::kCrypto;
  Simulator sim(c);
  for (const auto& ref : plain.records) {
    const RoundRecord rec = sim.execute_round();
    EXPECT_FALSE(rec.aborted);
    EXPECT_EQ(rec.checksum, ref.checksum);
    ASSERT_TRUE(sim.last_transcript().has_value());
    EXPECT_TRUE(reverify(*sim.last_transcript()).ok());
  }
}

TEST(Simulation, WindowBitsCoverTheLimit) {
  const Quantizer q(16, 4.0);
  EXPECT_EQ(window_bits_for(INFINITY, q), 16u);
  for (double limit : {0.01, 0.5, 1.0, 3.9}) {
    const unsigned b = window_bits_for(limit, q);
    const RangeWindow w = centered_window(16, b);
    const std::vector<double> edge = {-limit, limit};
    for (auto u : q.quantize(edge).values) {
      EXPECT_GE(u, w.lower);
      EXPECT_LT(u - w.lower, std::uint64_t{1} << b);
    }
    if (b > 1) {
      const RangeWindow smaller = centered_window(16, b - 1);
      bool fits = true;
      for (auto u : q.quantize(edge).values) fits = fits && u >= smaller.lower && u - smaller.lower < (std::uint64_t{1} << (b - 1));
      EXPECT_FALSE(fits) << limit;
    }
  }
}

}  // namespace
}  // namespace rofl

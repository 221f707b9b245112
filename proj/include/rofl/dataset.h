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

// Datasets for the simulator.
//
// The default task is synthetic: one isotropic Gaussian cluster per class
// with means sep * e_c, plus a rare "tail" cluster that belongs to class 0
// but sits tail_offset * e_{f-1} away from the class-0 mean (disjoint from
// every main cluster by at least 6 sigma). The tail is the subpopulation a
// backdoor adversary relabels to `backdoor_target`.

#ifndef ROFL_DATASET_H_
#define ROFL_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace rofl {

struct Dataset {
  std::size_t num_features = 0;
  std::size_t num_classes = 0;
  std::vector<double> features;  // row-major, size() x num_features
  std::vector<int> labels;
  std::vector<std::uint8_t> tail_mask;
  int backdoor_target = 1;

  std::size_t size() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * num_features, num_features};
  }
  std::size_t tail_count() const;

  // Throws ShapeError / ConfigError when the invariants do not hold.
  void validate() const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct SyntheticSpec {
  std::size_t samples = 6000;
  std::size_t features = 20;
  std::size_t classes = 3;
  double tail_fraction = 0.02;
  double separation = 4.0;   // distance of class means from the origin
  double sigma = 1.0;        // main cluster standard deviation
  double tail_offset = 8.0;  // tail centre = class-0 mean + tail_offset * e_{f-1}
  double tail_sigma = 0.5;
  int backdoor_target = 1;
  std::uint64_t seed = 1;
};

// Exactly round(tail_fraction * samples) tail rows; the rest are spread over
// classes as evenly as possible. Throws ConfigError for tail_fraction
// outside [0, 0.1], samples < 100, features < classes + 1 or classes < 2.
Dataset gen_synthetic(const SyntheticSpec& spec);

// Tail-distribution samples only (labels = class 0, tail_mask = 1).
Dataset gen_tail_samples(const SyntheticSpec& spec, std::size_t count, std::uint64_t seed);

Dataset subset(const Dataset& data, std::span<const std::size_t> indices);
Dataset concat(const Dataset& a, const Dataset& b);
// Copy with every label replaced by `label`.
Dataset relabel(const Dataset& data, int label);

// Shuffled near-equal split of [0, n) into `parts` index lists.
std::vector<std::vector<std::size_t>> partition_iid(std::size_t n, std::size_t parts,
                                                    std::uint64_t seed);

// Deterministic train/test split (test gets round(test_fraction * n) rows).
std::pair<Dataset, Dataset> split_train_test(const Dataset& data, double test_fraction,
                                             std::uint64_t seed);

// Columnar text cache:
//   rofl-lab-dataset v1
//   features <f>
//   classes <C>
//   backdoor_target <t>
//   rows <N>
//   columns x0 ... x{f-1} label tail
//   <N rows of f + 2 whitespace-separated numbers>
// Features are printed with 17 significant digits so reading back is exact.
void write_dataset_cache(const Dataset& data, const std::filesystem::path& path);
Dataset read_dataset_cache(const std::filesystem::path& path);

// UCI "optdigits" rows: 64 integers in [0, 16] followed by the digit label.
// Features are scaled to [0, 1]. The tail is the round(tail_fraction * N)
// samples of `tail_class` farthest from that class's centroid.
Dataset load_optdigits(const std::filesystem::path& path, double tail_fraction, int tail_class,
                       int backdoor_target);

}  // namespace rofl

#endif  // ROFL_DATASET_H_

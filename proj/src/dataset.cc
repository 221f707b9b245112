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

#include "rofl/dataset.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "rofl/bytes.h"
#include "rofl/errors.h"

namespace rofl {

std::size_t Dataset::tail_count() const {
  return static_cast<std::size_t>(std::count(tail_mask.begin(), tail_mask.end(), 1));
}

void Dataset::validate() const {
  if (num_features == 0) throw ShapeError("dataset has no features");
  if (num_classes < 2) throw ConfigError("dataset needs at least two classes");
  if (features.size() != labels.size() * num_features || tail_mask.size() != labels.size()) {
    throw ShapeError("dataset columns have inconsistent lengths");
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
      throw ConfigError("label " + std::to_string(y) + " outside [0, " + std::to_string(num_classes) + ")");
    }
  }
  for (auto t : tail_mask) {
    if (t > 1) throw ConfigError("tail mask entries must be 0 or 1");
  }
  if (backdoor_target < 0 || static_cast<std::size_t>(backdoor_target) >= num_classes) {
    throw ConfigError("backdoor target outside the label range");
  }
  for (double x : features) {
    if (!std::isfinite(x)) throw ConfigError("non-finite feature value");
  }
}

namespace {

void check_spec(const SyntheticSpec& spec) {
  if (!(spec.tail_fraction >= 0.0 && spec.tail_fraction <= 0.1)) {
    throw ConfigError("tail fraction must be in [0, 0.1]");
  }
  if (spec.samples < 100) throw ConfigError("synthetic dataset needs at least 100 samples");
  if (spec.classes < 2) throw ConfigError("synthetic dataset needs at least two classes");
  if (spec.features < spec.classes + 1) {
    throw ConfigError("synthetic dataset needs features >= classes + 1");
  }
  if (spec.backdoor_target < 0 || static_cast<std::size_t>(spec.backdoor_target) >= spec.classes) {
    throw ConfigError("backdoor target outside the label range");
  }
  if (!(spec.sigma > 0.0) || !(spec.tail_sigma > 0.0)) throw ConfigError("cluster sigma must be positive");
}

void push_tail_row(Dataset& d, const SyntheticSpec& spec, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, spec.tail_sigma);
  for (std::size_t j = 0; j < spec.features; ++j) {
    double centre = 0.0;
    if (j == 0) centre = spec.separation;
    if (j + 1 == spec.features) centre = spec.tail_offset;
    d.features.push_back(centre + noise(rng));
  }
  d.labels.push_back(0);
  d.tail_mask.push_back(1);
}

}  // namespace

Dataset gen_synthetic(const SyntheticSpec& spec) {
  check_spec(spec);
  std::mt19937_64 rng(derive_seed(spec.seed, "synthetic", 0, 0));
  std::normal_distribution<double> noise(0.0, spec.sigma);

  Dataset d;
  d.num_features = spec.features;
  d.num_classes = spec.classes;
  d.backdoor_target = spec.backdoor_target;
  const std::size_t tail = static_cast<std::size_t>(std::llround(spec.tail_fraction * static_cast<double>(spec.samples)));
  const std::size_t main = spec.samples - tail;
  for (std::size_t c = 0; c < spec.classes; ++c) {
    const std::size_t count = main / spec.classes + (c < main % spec.classes ? 1 : 0);
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t j = 0; j < spec.features; ++j) {
        d.features.push_back((j == c ? spec.separation : 0.0) + noise(rng));
      }
      d.labels.push_back(static_cast<int>(c));
      d.tail_mask.push_back(0);
    }
  }
  for (std::size_t i = 0; i < tail; ++i) push_tail_row(d, spec, rng);

  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  return subset(d, order);
}

Dataset gen_tail_samples(const SyntheticSpec& spec, std::size_t count, std::uint64_t seed) {
  check_spec(spec);
  std::mt19937_64 rng(derive_seed(seed, "tail-samples", 0, 0));
  Dataset d;
  d.num_features = spec.features;
  d.num_classes = spec.classes;
  d.backdoor_target = spec.backdoor_target;
  for (std::size_t i = 0; i < count; ++i) push_tail_row(d, spec, rng);
  return d;
}

Dataset subset(const Dataset& data, std::span<const std::size_t> indices) {
  Dataset out;
  out.num_features = data.num_features;
  out.num_classes = data.num_classes;
  out.backdoor_target = data.backdoor_target;
  out.features.reserve(indices.size() * data.num_features);
  for (std::size_t i : indices) {
    if (i >= data.size()) throw ShapeError("subset index out of range");
    const auto r = data.row(i);
    out.features.insert(out.features.end(), r.begin(), r.end());
    out.labels.push_back(data.labels[i]);
    out.tail_mask.push_back(data.tail_mask[i]);
  }
  return out;
}

Dataset concat(const Dataset& a, const Dataset& b) {
  if (a.num_features != b.num_features || a.num_classes != b.num_classes) {
    throw ShapeError("cannot concatenate datasets of different shapes");
  }
  Dataset out = a;
  out.features.insert(out.features.end(), b.features.begin(), b.features.end());
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  out.tail_mask.insert(out.tail_mask.end(), b.tail_mask.begin(), b.tail_mask.end());
  return out;
}

Dataset relabel(const Dataset& data, int label) {
  Dataset out = data;
  std::fill(out.labels.begin(), out.labels.end(), label);
  return out;
}

std::vector<std::vector<std::size_t>> partition_iid(std::size_t n, std::size_t parts,
                                                    std::uint64_t seed) {
  if (parts == 0) throw ConfigError("cannot partition into zero parts");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(derive_seed(seed, "partition", parts, 0));
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> out(parts);
  for (std::size_t i = 0; i < n; ++i) out[i % parts].push_back(order[i]);
  return out;
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& data, double test_fraction,
                                             std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("test fraction must be in (0, 1)");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(derive_seed(seed, "split", 0, 0));
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(data.size())));
  std::vector<std::size_t> test(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  return {subset(data, train), subset(data, test)};
}

void write_dataset_cache(const Dataset& data, const std::filesystem::path& path) {
  data.validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "rofl-lab-dataset v1\n";
  out << "features " << data.num_features << "\n";
  out << "classes " << data.num_classes << "\n";
  out << "backdoor_target " << data.backdoor_target << "\n";
  out << "rows " << data.size() << "\n";
  out << "columns";
  for (std::size_t j = 0; j < data.num_features; ++j) out << " x" << j;
  out << " label tail\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double x : data.row(i)) out << x << ' ';
    out << data.labels[i] << ' ' << static_cast<int>(data.tail_mask[i]) << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

namespace {

template <typename T>
T header_value(std::istream& in, const std::string& key, const std::filesystem::path& path) {
  std::string name;
  T value{};
  if (!(in >> name >> value) || name != key) {
    throw ConfigError(path.string() + ": expected header field '" + key + "'");
  }
  return value;
}

}  // namespace

Dataset read_dataset_cache(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string magic, version;
  in >> magic >> version;
  if (magic != "rofl-lab-dataset" || version != "v1") {
    throw ConfigError(path.string() + ": not a rofl-lab dataset cache");
  }
  Dataset d;
  d.num_features = header_value<std::size_t>(in, "features", path);
  d.num_classes = header_value<std::size_t>(in, "classes", path);
  d.backdoor_target = header_value<int>(in, "backdoor_target", path);
  const auto rows = header_value<std::size_t>(in, "rows", path);
  std::string word;
  in >> word;
  if (word != "columns") throw ConfigError(path.string() + ": expected the columns header");
  for (std::size_t j = 0; j < d.num_features + 2; ++j) {
    if (!(in >> word)) throw ConfigError(path.string() + ": truncated columns header");
  }
  if (word != "tail") throw ConfigError(path.string() + ": last column must be the tail mask");
  d.features.reserve(rows * d.num_features);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < d.num_features; ++j) {
      double x;
      if (!(in >> x)) throw ConfigError(path.string() + ": truncated row " + std::to_string(i));
      d.features.push_back(x);
    }
    int label, tail;
    if (!(in >> label >> tail)) throw ConfigError(path.string() + ": truncated row " + std::to_string(i));
    d.labels.push_back(label);
    d.tail_mask.push_back(static_cast<std::uint8_t>(tail));
    if (tail != 0 && tail != 1) throw ConfigError(path.string() + ": tail column must be 0 or 1");
  }
  if (in >> word) throw ConfigError(path.string() + ": more rows than declared");
  d.validate();
  return d;
}

Dataset load_optdigits(const std::filesystem::path& path, double tail_fraction, int tail_class,
                       int backdoor_target) {
  constexpr std::size_t kPixels = 64;
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Dataset d;
  d.num_features = kPixels;
  d.num_classes = 10;
  d.backdoor_target = backdoor_target;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    int v;
    std::vector<int> values;
    while (row >> v) values.push_back(v);
    if (values.size() != kPixels + 1) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected 65 integers");
    }
    for (std::size_t j = 0; j < kPixels; ++j) {
      if (values[j] < 0 || values[j] > 16) throw ConfigError(path.string() + ": pixel outside [0, 16]");
      d.features.push_back(values[j] / 16.0);
    }
    d.labels.push_back(values[kPixels]);
    d.tail_mask.push_back(0);
  }
  if (!(tail_fraction >= 0.0 && tail_fraction <= 0.1)) throw ConfigError("tail fraction must be in [0, 0.1]");
  d.validate();

  std::vector<std::size_t> members;
  std::vector<double> centroid(kPixels, 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.labels[i] != tail_class) continue;
    members.push_back(i);
    const auto r = d.row(i);
    for (std::size_t j = 0; j < kPixels; ++j) centroid[j] += r[j];
  }
  if (members.empty()) return d;
  for (double& c : centroid) c /= static_cast<double>(members.size());
  auto dist = [&](std::size_t i) {
    double s = 0.0;
    const auto r = d.row(i);
    for (std::size_t j = 0; j < kPixels; ++j) s += (r[j] - centroid[j]) * (r[j] - centroid[j]);
    return s;
  };
  std::stable_sort(members.begin(), members.end(),
                   [&](std::size_t a, std::size_t b) { return dist(a) > dist(b); });
  const std::size_t n_tail = std::min(
      members.size(), static_cast<std::size_t>(std::llround(tail_fraction * static_cast<double>(d.size()))));
  for (std::size_t i = 0; i < n_tail; ++i) d.tail_mask[members[i]] = 1;
  return d;
}

}  // namespace rofl

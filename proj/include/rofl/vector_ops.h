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

// Parameter vectors, norms and fixed-point quantization.

#ifndef ROFL_VECTOR_OPS_H_
#define ROFL_VECTOR_OPS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace rofl {

// Flat model weights or a model update.
using ParameterVector = std::vector<double>;

enum class Norm { kL2, kLinf };

Norm parse_norm(const std::string& name);
std::string to_string(Norm p);

double p_norm(std::span<const double> v, Norm p);

// v unchanged if within the bound; otherwise rescaled onto the L2 ball or
// clamped coordinatewise to [-bound, bound]. bound <= 0 is a ConfigError.
ParameterVector clip_to_norm(std::span<const double> v, double bound, Norm p);

// Coordinatewise clamp to [-range, range].
ParameterVector clamp_coordinates(std::span<const double> v, double range);

bool all_finite(std::span<const double> v);

// Affine fixed-point encoding of [-range, range] into [0, 2^bits):
//   step = range / 2^(bits - 1),  u = min(round((x + range) / step), 2^bits - 1)
// so 0 maps to 2^(bits - 1) and x = u * step - range on the way back.
struct FixedVec {
  std::vector<std::uint64_t> values;
  unsigned bits = 16;
  double range = 1.0;

  double step() const;
  std::uint64_t offset() const { return std::uint64_t{1} << (bits - 1); }
  friend bool operator==(const FixedVec&, const FixedVec&) = default;
};

class Quantizer {
 public:
  Quantizer(unsigned bits, double range);

  unsigned bits() const { return bits_; }
  double range() const { return range_; }
  double step() const { return step_; }
  std::uint64_t offset() const { return std::uint64_t{1} << (bits_ - 1); }
  std::uint64_t max_value() const { return (std::uint64_t{1} << bits_) - 1; }

  // Throws PreconditionError for coordinates outside [-range, range].
  FixedVec quantize(std::span<const double> v) const;
  ParameterVector dequantize(const FixedVec& f) const;

  // Mean of n quantized vectors given the integer coordinate sums:
  // ((sum - n * offset) * step) / n. Both protocol modes use exactly this.
  ParameterVector dequantize_mean(std::span<const std::uint64_t> sums, std::size_t n) const;

  // Slack a norm check needs once a vector of dimension d is quantized.
  double norm_tolerance(std::size_t d, Norm p) const;

 private:
  unsigned bits_;
  double range_;
  double step_;
};

std::string checksum(std::span<const double> v);

}  // namespace rofl

#endif  // ROFL_VECTOR_OPS_H_

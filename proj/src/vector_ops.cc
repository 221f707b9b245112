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

#include "rofl/vector_ops.h"

#include <algorithm>
#include <bit>
#include <cmath>

#include "rofl/bytes.h"
#include "rofl/errors.h"

namespace rofl {

Norm parse_norm(const std::string& name) {
  if (name == "l2" || name == "2") return Norm::kL2;
  if (name == "linf" || name == "inf") return Norm::kLinf;
  throw ConfigError("unknown norm '" + name + "' (expected l2|linf)");
}

std::string to_string(Norm p) { return p == Norm::kL2 ? "l2" : "linf"; }

double p_norm(std::span<const double> v, Norm p) {
  if (p == Norm::kLinf) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
  }
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

ParameterVector clip_to_norm(std::span<const double> v, double bound, Norm p) {
  if (!(bound > 0.0)) throw ConfigError("norm bound must be positive");
  ParameterVector out(v.begin(), v.end());
  if (p == Norm::kLinf) {
    for (double& x : out) x = std::clamp(x, -bound, bound);
    return out;
  }
  const double n = p_norm(v, p);
  if (n <= bound) return out;
  const double scale = bound / n;
  for (double& x : out) x *= scale;
  // Rounding can leave the result a hair above the bound.
  while (p_norm(out, p) > bound) {
    for (double& x : out) x = std::nextafter(x, 0.0);
  }
  return out;
}

ParameterVector clamp_coordinates(std::span<const double> v, double range) {
  ParameterVector out(v.begin(), v.end());
  for (double& x : out) x = std::clamp(x, -range, range);
  return out;
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double FixedVec::step() const { return range / static_cast<double>(std::uint64_t{1} << (bits - 1)); }

Quantizer::Quantizer(unsigned bits, double range) : bits_(bits), range_(range) {
  if (bits < 2 || bits > 62) throw ConfigError("quantization bits must be in [2, 62]");
  if (!(range > 0.0) || !std::isfinite(range)) throw ConfigError("quantization range must be positive");
  step_ = range_ / static_cast<double>(offset());
}

FixedVec Quantizer::quantize(std::span<const double> v) const {
  FixedVec out;
  out.bits = bits_;
  out.range = range_;
  out.values.reserve(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double x = v[k];
    if (!(x >= -range_ && x <= range_)) {
      throw PreconditionError("coordinate " + std::to_string(k) + " = " + std::to_string(x) +
                              " outside the quantization range; clip first");
    }
    const double scaled = std::nearbyint((x + range_) / step_);
    out.values.push_back(std::min(static_cast<std::uint64_t>(scaled), max_value()));
  }
  return out;
}

ParameterVector Quantizer::dequantize(const FixedVec& f) const {
  if (f.bits != bits_ || f.range != range_) throw ShapeError("fixed-point vector from another quantizer");
  ParameterVector out;
  out.reserve(f.values.size());
  const std::int64_t off = static_cast<std::int64_t>(offset());
  for (std::uint64_t u : f.values) out.push_back(static_cast<double>(static_cast<std::int64_t>(u) - off) * step_);
  return out;
}

ParameterVector Quantizer::dequantize_mean(std::span<const std::uint64_t> sums, std::size_t n) const {
  ParameterVector out(sums.size(), 0.0);
  if (n == 0) return out;
  const __int128 shift = static_cast<__int128>(n) * static_cast<__int128>(offset());
  for (std::size_t k = 0; k < sums.size(); ++k) {
    const __int128 centred = static_cast<__int128>(sums[k]) - shift;
    out[k] = (static_cast<double>(centred) * step_) / static_cast<double>(n);
  }
  return out;
}

double Quantizer::norm_tolerance(std::size_t d, Norm p) const {
  return p == Norm::kL2 ? step_ * std::sqrt(static_cast<double>(d)) : step_;
}

std::string checksum(std::span<const double> v) {
  ByteWriter w;
  for (double x : v) w.u64(std::bit_cast<std::uint64_t>(x));
  const Digest d = sha256(w);
  return to_hex(std::span<const std::uint8_t>(d.data(), 8));
}

}  // namespace rofl

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

// Byte encoding, SHA-256 hashing and hash-based deterministic randomness.
//
// Every multi-byte integer is big-endian. Variable-length items (big
// integers, strings, blobs) are written as a u32 length followed by the
// payload; a big integer is its minimal unsigned magnitude, so zero is the
// empty string. This is the encoding used both for Fiat-Shamir transcripts
// and for round transcript files.

#ifndef ROFL_BYTES_H_
#define ROFL_BYTES_H_

#include <gmpxx.h>

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rofl {

using Bytes = std::vector<std::uint8_t>;
using Digest = std::array<std::uint8_t, 32>;

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void blob(std::span<const std::uint8_t> data);
  void str(std::string_view s);
  void big(const mpz_class& v);  // v >= 0

  const Bytes& bytes() const { return buf_; }
  Bytes take() { return std::move(buf_); }

 private:
  Bytes buf_;
};

// Reads what ByteWriter wrote; throws DecodeError on truncation or on
// length fields that run past the end of the buffer.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  Bytes blob();
  std::string str();
  mpz_class big();

  bool done() const { return pos_ == data_.size(); }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t n) const;

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

Digest sha256(std::span<const std::uint8_t> data);
inline Digest sha256(const ByteWriter& w) { return sha256(w.bytes()); }

std::string to_hex(std::span<const std::uint8_t> data);

// Seed discipline: every randomized entity draws from its own stream keyed
// by (master, role, id, round), so reordering clients never changes what
// any one of them sees.
std::uint64_t derive_seed(std::uint64_t master, std::string_view role,
                          std::uint64_t id, std::uint64_t round);

// SHA-256 in counter mode keyed by a 32-byte seed.
class HashDrbg {
 public:
  explicit HashDrbg(const Digest& seed) : seed_(seed) {}
  HashDrbg(std::uint64_t master, std::string_view role, std::uint64_t id,
           std::uint64_t round);

  void fill(std::span<std::uint8_t> out);
  // Uniform in [0, bound) by rejection sampling on bitlen(bound) bits.
  mpz_class uniform_below(const mpz_class& bound);
  mpz_class bits(unsigned nbits);

 private:
  Digest seed_;
  std::uint64_t counter_ = 0;
  std::array<std::uint8_t, 32> block_{};
  std::size_t used_ = 32;
};

}  // namespace rofl

#endif  // ROFL_BYTES_H_

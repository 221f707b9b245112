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

#include "rofl/bytes.h"

#include <sodium.h>

#include <bit>
#include <cstring>

#include "rofl/errors.h"

namespace rofl {

void ByteWriter::u32(std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> shift));
}

void ByteWriter::u64(std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> shift));
}

void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::blob(std::span<const std::uint8_t> data) {
  u32(static_cast<std::uint32_t>(data.size()));
  buf_.insert(buf_.end(), data.begin(), data.end());
}

void ByteWriter::str(std::string_view s) {
  blob({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
}

void ByteWriter::big(const mpz_class& v) {
  if (sgn(v) < 0) throw PreconditionError("cannot encode a negative integer");
  std::size_t count = 0;
  Bytes out((mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8);
  if (sgn(v) != 0) mpz_export(out.data(), &count, 1, 1, 1, 0, v.get_mpz_t());
  out.resize(count);
  blob(out);
}

void ByteReader::need(std::size_t n) const {
  if (n > data_.size() - pos_) throw DecodeError("truncated input");
}

std::uint8_t ByteReader::u8() {
  need(1);
  return data_[pos_++];
}

std::uint32_t ByteReader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = (v << 8) | data_[pos_++];
  return v;
}

std::uint64_t ByteReader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | data_[pos_++];
  return v;
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

Bytes ByteReader::blob() {
  const std::uint32_t n = u32();
  need(n);
  Bytes out(data_.begin() + pos_, data_.begin() + pos_ + n);
  pos_ += n;
  return out;
}

std::string ByteReader::str() {
  Bytes b = blob();
  return {b.begin(), b.end()};
}

mpz_class ByteReader::big() {
  Bytes b = blob();
  // Non-minimal encodings would let two byte strings name the same value.
  if (!b.empty() && b.front() == 0) throw DecodeError("non-minimal integer encoding");
  mpz_class v;
  if (!b.empty()) mpz_import(v.get_mpz_t(), b.size(), 1, 1, 1, 0, b.data());
  return v;
}

Digest sha256(std::span<const std::uint8_t> data) {
  Digest out;
  crypto_hash_sha256(out.data(), data.data(), data.size());
  return out;
}

std::string to_hex(std::span<const std::uint8_t> data) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  s.reserve(data.size() * 2);
  for (std::uint8_t b : data) {
    s.push_back(kDigits[b >> 4]);
    s.push_back(kDigits[b & 0xf]);
  }
  return s;
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view role,
                          std::uint64_t id, std::uint64_t round) {
  ByteWriter w;
  w.str("rofl-lab/seed/v1");
  w.u64(master);
  w.str(role);
  w.u64(id);
  w.u64(round);
  const Digest d = sha256(w);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | d[i];
  return v;
}

HashDrbg::HashDrbg(std::uint64_t master, std::string_view role,
                   std::uint64_t id, std::uint64_t round) {
  ByteWriter w;
  w.str("rofl-lab/drbg/v1");
  w.u64(master);
  w.str(role);
  w.u64(id);
  w.u64(round);
  seed_ = sha256(w);
}

void HashDrbg::fill(std::span<std::uint8_t> out) {
  for (std::uint8_t& b : out) {
    if (used_ == block_.size()) {
      std::array<std::uint8_t, 40> input{};
      std::memcpy(input.data(), seed_.data(), seed_.size());
      for (int i = 0; i < 8; ++i) input[32 + i] = static_cast<std::uint8_t>(counter_ >> (56 - 8 * i));
      ++counter_;
      block_ = sha256(input);
      used_ = 0;
    }
    b = block_[used_++];
  }
}

mpz_class HashDrbg::bits(unsigned nbits) {
  Bytes buf((nbits + 7) / 8);
  fill(buf);
  if (nbits % 8 != 0 && !buf.empty()) buf[0] &= static_cast<std::uint8_t>((1u << (nbits % 8)) - 1);
  mpz_class v;
  if (!buf.empty()) mpz_import(v.get_mpz_t(), buf.size(), 1, 1, 1, 0, buf.data());
  return v;
}

mpz_class HashDrbg::uniform_below(const mpz_class& bound) {
  if (sgn(bound) <= 0) throw PreconditionError("uniform_below needs a positive bound");
  const unsigned nbits = static_cast<unsigned>(mpz_sizeinbase(bound.get_mpz_t(), 2));
  for (;;) {
    mpz_class v = bits(nbits);
    if (v < bound) return v;
  }
}

}  // namespace rofl

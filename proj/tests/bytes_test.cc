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

#include <gtest/gtest.h>

#include <set>

#include "rofl/errors.h"

namespace rofl {
namespace {

TEST(Bytes, Sha256KnownVector) {
  const std::string abc = "abc";
  const Digest d = sha256({reinterpret_cast<const std::uint8_t*>(abc.data()), abc.size()});
  EXPECT_EQ(to_hex(d), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Bytes, WriterReaderRoundTrip) {
  ByteWriter w;
  w.u8(7);
  w.u32(0xdeadbeef);
  w.u64(0x0123456789abcdefULL);
  w.f64(-2.5);
  w.str("rofl");
  w.big(mpz_class(0));
  w.big(mpz_class("123456789012345678901234567890"));
  ByteReader r(w.bytes());
  EXPECT_EQ(r.u8(), 7);
  EXPECT_EQ(r.u32(), 0xdeadbeefu);
  EXPECT_EQ(r.u64(), 0x0123456789abcdefULL);
  EXPECT_EQ(r.f64(), -2.5);
  EXPECT_EQ(r.str(), "rofl");
  EXPECT_EQ(r.big(), 0);
  EXPECT_EQ(r.big(), mpz_class("123456789012345678901234567890"));
  EXPECT_TRUE(r.done());
}

TEST(Bytes, BigEndianLayout) {
  ByteWriter w;
  w.u32(0x01020304);
  w.big(mpz_class(0x0100));
  const Bytes expected = {1, 2, 3, 4, 0, 0, 0, 2, 1, 0};
  EXPECT_EQ(w.bytes(), expected);
}

TEST(Bytes, TruncatedInputThrows) {
  ByteWriter w;
  w.str("hello");
  Bytes b = w.take();
  b.pop_back();
  ByteReader r(b);
  EXPECT_THROW(r.str(), DecodeError);
}

TEST(Bytes, NonMinimalIntegerRejected) {
  const Bytes b = {0, 0, 0, 2, 0, 5};
  ByteReader r(b);
  EXPECT_THROW(r.big(), DecodeError);
}

TEST(Bytes, DeriveSeedSeparatesEveryField) {
  std::set<std::uint64_t> seen;
  seen.insert(derive_seed(1, "train", 0, 0));
  seen.insert(derive_seed(2, "train", 0, 0));
  seen.insert(derive_seed(1, "sample", 0, 0));
  seen.insert(derive_seed(1, "train", 1, 0));
  seen.insert(derive_seed(1, "train", 0, 1));
  EXPECT_EQ(seen.size(), 5u);
  EXPECT_EQ(derive_seed(9, "x", 3, 4), derive_seed(9, "x", 3, 4));
}

TEST(Bytes, DrbgIsDeterministicAndBounded) {
  HashDrbg a(5, "role", 1, 2), b(5, "role", 1, 2);
  const mpz_class bound(1000);
  for (int i = 0; i < 200; ++i) {
    const mpz_class x = a.uniform_below(bound);
    EXPECT_EQ(x, b.uniform_below(bound));
    EXPECT_GE(x, 0);
    EXPECT_LT(x, bound);
  }
  EXPECT_LT(a.bits(5), 32);
}

TEST(Bytes, DrbgUniformBelowIsRoughlyUniform) {
  HashDrbg rng(11, "uniform", 0, 0);
  std::vector<int> counts(6, 0);
  const int n = 60000;
  for (int i = 0; i < n; ++i) ++counts[rng.uniform_below(mpz_class(6)).get_ui()];
  for (int c : counts) EXPECT_NEAR(c, n / 6, n / 6 * 0.05);
}

}  // namespace
}  // namespace rofl

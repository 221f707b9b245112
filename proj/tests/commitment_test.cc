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

#include "rofl/commitment.h"

#include <gtest/gtest.h>

#include "rofl/bytes.h"

namespace rofl {
namespace {

long toy_pow(long base, long e) {
  long out = 1;
  for (long i = 0; i < e; ++i) out = out * base % 23;
  return out;
}

TEST(Commitment, ToyCommitMatchesDirectFormula) {
  const GroupParams& t = group(GroupProfile::kTest);
  for (unsigned long m = 0; m < 11; ++m) {
    for (unsigned long r = 0; r < 11; ++r) {
      const ExtendedCommitment c = commit(Scalar(m), Scalar(r), t);
      EXPECT_EQ(c.c.value, toy_pow(2, m) * toy_pow(3, r) % 23);
      EXPECT_EQ(c.mask_term.value, toy_pow(2, r));
    }
  }
}

TEST(Commitment, ToyHomomorphismExhaustive) {
  const GroupParams& t = group(GroupProfile::kTest);
  for (unsigned long m1 = 0; m1 < 11; ++m1)
    for (unsigned long r1 = 0; r1 < 11; ++r1)
      for (unsigned long m2 = 0; m2 < 11; ++m2)
        for (unsigned long r2 = 0; r2 < 11; ++r2) {
          const std::vector<ExtendedCommitment> pair = {commit(Scalar(m1), Scalar(r1), t),
                                                        commit(Scalar(m2), Scalar(r2), t)};
          ASSERT_EQ(add_commitments(pair, t), commit(Scalar((m1 + m2) % 11), Scalar((r1 + r2) % 11), t));
        }
}

TEST(Commitment, StandardHomomorphismRandom) {
  const GroupParams& s = group(GroupProfile::kStandard);
  HashDrbg rng(3, "commit-test", 0, 0);
  for (int i = 0; i < 50; ++i) {
    const Scalar m1(rng.uniform_below(s.q())), r1(rng.uniform_below(s.q()));
    const Scalar m2(rng.uniform_below(s.q())), r2(rng.uniform_below(s.q()));
    const std::vector<ExtendedCommitment> pair = {commit(m1, r1, s), commit(m2, r2, s)};
    EXPECT_EQ(add_commitments(pair, s), commit(s.add(m1, m2), s.add(r1, r2), s));
  }
}

TEST(Commitment, EmptyProductIsIdentity) {
  const GroupParams& s = group(GroupProfile::kStandard);
  const ExtendedCommitment e = add_commitments({}, s);
  EXPECT_EQ(e.c.value, 1);
  EXPECT_EQ(e.mask_term.value, 1);
  EXPECT_TRUE(verify_mask_sum({}, Scalar(0ul), s));
}

TEST(Commitment, MaskSumAgreesWithModularSumToy) {
  const GroupParams& t = group(GroupProfile::kTest);
  // n = 3 clients, every blinding triple and every candidate key.
  for (unsigned long a = 0; a < 11; ++a)
    for (unsigned long b = 0; b < 11; ++b)
      for (unsigned long c = 0; c < 11; ++c) {
        const std::vector<ExtendedCommitment> cs = {commit(Scalar(1ul), Scalar(a), t),
                                                    commit(Scalar(5ul), Scalar(b), t),
                                                    commit(Scalar(9ul), Scalar(c), t)};
        for (unsigned long key = 0; key < 11; ++key) {
          ASSERT_EQ(verify_mask_sum(cs, Scalar(key), t), (a + b + c) % 11 == key);
        }
      }
}

TEST(Commitment, EncodeDecodeRoundTrip) {
  const GroupParams& s = group(GroupProfile::kStandard);
  const ExtendedCommitment c = commit(Scalar(42ul), Scalar(77ul), s);
  ByteWriter w;
  encode(w, c);
  ByteReader r(w.bytes());
  EXPECT_EQ(decode_commitment(r), c);
  EXPECT_TRUE(r.done());
}

}  // namespace
}  // namespace rofl

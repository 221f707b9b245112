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

#include "rofl/group.h"

#include <gtest/gtest.h>

#include <set>

#include "rofl/bytes.h"
#include "rofl/errors.h"

namespace rofl {
namespace {

TEST(Group, ToyProfileConstants) {
  const GroupParams& t = group(GroupProfile::kTest);
  EXPECT_EQ(t.p(), 23);
  EXPECT_EQ(t.q(), 11);
  EXPECT_EQ(t.g().value, 2);
  EXPECT_EQ(t.h().value, 3);
  EXPECT_EQ(t.id(), "test");
}

TEST(Group, ToySubgroupMembershipIsExact) {
  const GroupParams& t = group(GroupProfile::kTest);
  // The order-11 subgroup of Z_23^* is the quadratic residues.
  std::set<long> residues;
  for (long x = 1; x < 23; ++x) residues.insert((x * x) % 23);
  for (long x = 0; x < 30; ++x) {
    EXPECT_EQ(t.is_member(GroupElement(mpz_class(x))), residues.count(x) == 1) << x;
  }
}

TEST(Group, ToyPowMatchesRepeatedMultiplication) {
  const GroupParams& t = group(GroupProfile::kTest);
  long gx = 1, hx = 1;
  for (long e = 0; e < 30; ++e) {
    EXPECT_EQ(t.pow_g(mpz_class(e)).value, gx) << e;
    EXPECT_EQ(t.pow_h(mpz_class(e)).value, hx) << e;
    gx = gx * 2 % 23;
    hx = hx * 3 % 23;
  }
}

TEST(Group, StandardProfileShape) {
  const GroupParams& s = group(GroupProfile::kStandard);
  EXPECT_EQ(mpz_sizeinbase(s.p().get_mpz_t(), 2), 2048u);
  EXPECT_EQ(mpz_sizeinbase(s.q().get_mpz_t(), 2), 256u);
  EXPECT_GT(mpz_probab_prime_p(s.p().get_mpz_t(), 30), 0);
  EXPECT_GT(mpz_probab_prime_p(s.q().get_mpz_t(), 30), 0);
  EXPECT_EQ((s.p() - 1) % s.q(), 0);
  EXPECT_TRUE(s.is_member(s.g()));
  EXPECT_TRUE(s.is_member(s.h()));
  EXPECT_NE(s.g().value, 1);
  EXPECT_NE(s.h().value, 1);
  EXPECT_NE(s.g(), s.h());
}

TEST(Group, StandardFixedBaseMatchesPowm) {
  const GroupParams& s = group(GroupProfile::kStandard);
  HashDrbg rng(1, "group-test", 0, 0);
  for (int i = 0; i < 20; ++i) {
    const mpz_class e = rng.uniform_below(s.q());
    mpz_class expect_g, expect_h;
    mpz_powm(expect_g.get_mpz_t(), s.g().value.get_mpz_t(), e.get_mpz_t(), s.p().get_mpz_t());
    mpz_powm(expect_h.get_mpz_t(), s.h().value.get_mpz_t(), e.get_mpz_t(), s.p().get_mpz_t());
    EXPECT_EQ(s.pow_g(e).value, expect_g);
    EXPECT_EQ(s.pow_h(e).value, expect_h);
  }
}

TEST(Group, ScalarArithmeticWrapsModQ) {
  const GroupParams& t = group(GroupProfile::kTest);
  EXPECT_EQ(t.add(Scalar(7ul), Scalar(9ul)).value, 5);
  EXPECT_EQ(t.sub(Scalar(2ul), Scalar(5ul)).value, 8);
  EXPECT_EQ(t.mul(Scalar(4ul), Scalar(6ul)).value, 2);
  EXPECT_EQ(t.neg(Scalar(3ul)).value, 8);
  EXPECT_EQ(t.scalar_from_signed(-1).value, 10);
}

TEST(Group, InverseAndIdentity) {
  const GroupParams& s = group(GroupProfile::kStandard);
  const GroupElement x = s.pow_g(mpz_class(12345));
  EXPECT_EQ(s.mul(x, s.inv(x)), s.identity());
}

TEST(Group, HashToGroupLandsInSubgroup) {
  const GroupParams& s = group(GroupProfile::kStandard);
  const Bytes seed = {1, 2, 3};
  const GroupElement a = hash_to_group(seed, s.p(), s.q());
  EXPECT_TRUE(s.is_member(a));
  EXPECT_EQ(a, hash_to_group(seed, s.p(), s.q()));
  const Bytes other = {1, 2, 4};
  EXPECT_NE(a, hash_to_group(other, s.p(), s.q()));
}

TEST(Group, ParseProfile) {
  EXPECT_EQ(parse_group_profile("test"), GroupProfile::kTest);
  EXPECT_EQ(parse_group_profile("standard"), GroupProfile::kStandard);
  EXPECT_THROW(parse_group_profile("huge"), ConfigError);
}

}  // namespace
}  // namespace rofl

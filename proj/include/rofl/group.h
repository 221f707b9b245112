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

// Prime-order subgroups of Z_p^*.
//
// Two fixed profiles exist. "test" is the toy group p = 23, q = 11, g = 2,
// h = 3, small enough to enumerate. "standard" is a 2048-bit p with a
// 256-bit prime-order subgroup (constants from tools/gen_group_params.py);
// its h is hashed into the subgroup from "rofl-lab-h" || g so nobody knows
// log_g(h).
//
// Constant-time arithmetic is not a goal.

#ifndef ROFL_GROUP_H_
#define ROFL_GROUP_H_

#include <gmpxx.h>

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace rofl {

enum class GroupProfile { kTest, kStandard };

GroupProfile parse_group_profile(const std::string& name);
std::string to_string(GroupProfile profile);

// An integer modulo q, kept in [0, q).
struct Scalar {
  mpz_class value;

  Scalar() = default;
  explicit Scalar(mpz_class v) : value(std::move(v)) {}
  explicit Scalar(unsigned long v) : value(v) {}

  friend bool operator==(const Scalar& a, const Scalar& b) { return a.value == b.value; }
};

// An element of the order-q subgroup, stored as its residue mod p.
struct GroupElement {
  mpz_class value{1};

  GroupElement() = default;
  explicit GroupElement(mpz_class v) : value(std::move(v)) {}

  friend bool operator==(const GroupElement& a, const GroupElement& b) {
    return a.value == b.value;
  }
};

class FixedBaseTable;

// Immutable after construction; safe to share between threads.
class GroupParams {
 public:
  GroupParams(GroupProfile profile, mpz_class p, mpz_class q, mpz_class g, mpz_class h);

  GroupProfile profile() const { return profile_; }
  // Stable identifier recorded in transcripts ("test" / "standard").
  std::string id() const { return to_string(profile_); }

  const mpz_class& p() const { return p_; }
  const mpz_class& q() const { return q_; }
  GroupElement g() const { return GroupElement(g_); }
  GroupElement h() const { return GroupElement(h_); }

  // Scalar arithmetic mod q.
  Scalar scalar(const mpz_class& v) const;
  Scalar scalar_from_signed(long v) const;
  Scalar add(const Scalar& a, const Scalar& b) const;
  Scalar sub(const Scalar& a, const Scalar& b) const;
  Scalar mul(const Scalar& a, const Scalar& b) const;
  Scalar neg(const Scalar& a) const;

  // Group arithmetic mod p. Exponents may be any non-negative integer;
  // g^e and h^e reduce e mod q and use precomputed tables.
  GroupElement pow_g(const mpz_class& e) const;
  GroupElement pow_h(const mpz_class& e) const;
  GroupElement pow(const GroupElement& base, const mpz_class& e) const;
  GroupElement mul(const GroupElement& a, const GroupElement& b) const;
  GroupElement inv(const GroupElement& a) const;
  GroupElement identity() const { return GroupElement(mpz_class(1)); }

  // 1 <= x < p and x^q == 1.
  bool is_member(const GroupElement& x) const;
  // 1 <= x < p only; cheap sanity filter for decoded elements.
  bool in_range(const GroupElement& x) const;

  unsigned scalar_bytes() const { return scalar_bytes_; }

 private:
  GroupProfile profile_;
  mpz_class p_, q_, g_, h_;
  unsigned scalar_bytes_;
  std::shared_ptr<const FixedBaseTable> g_table_, h_table_;
};

GroupParams setup_group(GroupProfile profile);

// Cached singleton per profile; building the standard tables takes ~50 ms.
const GroupParams& group(GroupProfile profile);

// Hash-to-subgroup: SHA-256 counter-mode expansion of `seed` to
// bitlen(p) + 64 bits, reduced mod p and raised to (p - 1) / q; retries
// with an incremented counter on the (negligible) identity outcome.
GroupElement hash_to_group(std::span<const std::uint8_t> seed, const mpz_class& p,
                           const mpz_class& q);

}  // namespace rofl

#endif  // ROFL_GROUP_H_

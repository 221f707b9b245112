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

#include <map>
#include <mutex>

#include "rofl/bytes.h"
#include "rofl/errors.h"

namespace rofl {
namespace {

// Generated by tools/gen_group_params.py.
constexpr const char* kStandardP =
    "8000000000000000000000000000000000000000000000000000000000000000"
    "11b5c515c6492187920bc38529d3f7e985ac9b625c6ee7e3799dd85c848c9bba"
    "2ab810f6737e27aae992377d08b49d580bcba617c6f0b48df12e3b0d3b76abf3"
    "24e7e578c2a28b9635eb68a9daf98b4334c085a283e4af0f13cb393fcb06031b"
    "334ab59b5b1a7cbe4cab084f4f9204bc157b235ac70ef6accca0cb03e9b539d2"
    "f7daff7e2ad3f22306c0ec7e6230350368c1ee957ffa86f19e93a558315ba042"
    "d25753e90a15f57be46614d521f605b47316814ca5eda6f91c72a47e594f0fd0"
    "99b3760d7bc89c7785685915a2b7e1810171e1dc7f0add627ed6539347c4adf1";
constexpr const char* kStandardQ =
    "81f945dae7aa52af149d228c88a80d1afe0fc5e28c1775e9318a1639dc37ac33";
constexpr const char* kStandardG =
    "4d033f35ac764d431bf5855ff8ea8ec8a72450bceccdb3d9908a0c50852fa50f"
    "94ad31386e2fd61e0a5105c2ced797639b29318d3b42f95cc5c3fd6c9bd33ef0"
    "cde5bfcb1a0b9c7c799420a10a8f9176413434acaf9923b5bb627e9e0bbe718d"
    "d65110132f82a555b67e14d5fcdfbcc81b34495d5152dd2bf707310308d640ac"
    "15d6df6bd3836cd06b5965328351e974b51e597eb36666ca121c2477166db6e0"
    "f2273862de5067666b028e446389905f69c3d1e840160cb46575cf97b3e81967"
    "6531c75fd8b17e97e89e5ceebd4ab127639a070a092b91c0d2e6937e2101e0fa"
    "cceb3554f54ce6fe5ba7dfe5228a1127ff631dffdddf7f50178034c5c86354b0";

constexpr unsigned kWindowBits = 8;

}  // namespace

// Comb table for a fixed base: rows[i][j] = base^(j * 2^(8 i)). An
// exponent below q then costs one multiplication per 8-bit window.
class FixedBaseTable {
 public:
  FixedBaseTable(const mpz_class& base, const mpz_class& p, const mpz_class& q) : p_(p) {
    const std::size_t windows = (mpz_sizeinbase(q.get_mpz_t(), 2) + kWindowBits - 1) / kWindowBits;
    rows_.resize(windows);
    mpz_class row_base = base;
    for (auto& row : rows_) {
      row.resize(std::size_t{1} << kWindowBits);
      row[0] = 1;
      for (std::size_t j = 1; j < row.size(); ++j) row[j] = (row[j - 1] * row_base) % p_;
      // base^(2^(8 (i + 1))) = row[255] * row_base.
      row_base = (row.back() * row_base) % p_;
    }
  }

  // e must already be reduced mod q.
  mpz_class pow(const mpz_class& e) const {
    mpz_class acc = 1;
    const std::size_t nbits = sgn(e) == 0 ? 0 : mpz_sizeinbase(e.get_mpz_t(), 2);
    for (std::size_t i = 0; i * kWindowBits < nbits; ++i) {
      unsigned window = 0;
      for (unsigned b = 0; b < kWindowBits; ++b) {
        if (mpz_tstbit(e.get_mpz_t(), i * kWindowBits + b)) window |= 1u << b;
      }
      if (window != 0) {
        acc *= rows_[i][window];
        acc %= p_;
      }
    }
    return acc;
  }

 private:
  mpz_class p_;
  std::vector<std::vector<mpz_class>> rows_;
};

GroupProfile parse_group_profile(const std::string& name) {
  if (name == "test") return GroupProfile::kTest;
  if (name == "standard") return GroupProfile::kStandard;
  throw ConfigError("unknown group profile '" + name + "' (expected test|standard)");
}

std::string to_string(GroupProfile profile) {
  return profile == GroupProfile::kTest ? "test" : "standard";
}

GroupParams::GroupParams(GroupProfile profile, mpz_class p, mpz_class q, mpz_class g, mpz_class h)
    : profile_(profile),
      p_(std::move(p)),
      q_(std::move(q)),
      g_(std::move(g)),
      h_(std::move(h)),
      scalar_bytes_(static_cast<unsigned>((mpz_sizeinbase(q_.get_mpz_t(), 2) + 7) / 8)),
      g_table_(std::make_shared<FixedBaseTable>(g_, p_, q_)),
      h_table_(std::make_shared<FixedBaseTable>(h_, p_, q_)) {}

Scalar GroupParams::scalar(const mpz_class& v) const {
  mpz_class r;
  mpz_mod(r.get_mpz_t(), v.get_mpz_t(), q_.get_mpz_t());
  return Scalar(std::move(r));
}

Scalar GroupParams::scalar_from_signed(long v) const { return scalar(mpz_class(v)); }

Scalar GroupParams::add(const Scalar& a, const Scalar& b) const { return scalar(a.value + b.value); }
Scalar GroupParams::sub(const Scalar& a, const Scalar& b) const { return scalar(a.value - b.value); }
Scalar GroupParams::mul(const Scalar& a, const Scalar& b) const { return scalar(a.value * b.value); }
Scalar GroupParams::neg(const Scalar& a) const { return scalar(-a.value); }

GroupElement GroupParams::pow_g(const mpz_class& e) const {
  return GroupElement(g_table_->pow(scalar(e).value));
}

GroupElement GroupParams::pow_h(const mpz_class& e) const {
  return GroupElement(h_table_->pow(scalar(e).value));
}

GroupElement GroupParams::pow(const GroupElement& base, const mpz_class& e) const {
  if (sgn(e) < 0) throw PreconditionError("negative exponent");
  mpz_class out;
  mpz_powm(out.get_mpz_t(), base.value.get_mpz_t(), e.get_mpz_t(), p_.get_mpz_t());
  return GroupElement(std::move(out));
}

GroupElement GroupParams::mul(const GroupElement& a, const GroupElement& b) const {
  mpz_class out = a.value * b.value;
  out %= p_;
  return GroupElement(std::move(out));
}

GroupElement GroupParams::inv(const GroupElement& a) const {
  mpz_class out;
  if (mpz_invert(out.get_mpz_t(), a.value.get_mpz_t(), p_.get_mpz_t()) == 0) {
    throw PreconditionError("element has no inverse mod p");
  }
  return GroupElement(std::move(out));
}

bool GroupParams::in_range(const GroupElement& x) const { return x.value >= 1 && x.value < p_; }

bool GroupParams::is_member(const GroupElement& x) const {
  return in_range(x) && pow(x, q_).value == 1;
}

GroupElement hash_to_group(std::span<const std::uint8_t> seed, const mpz_class& p,
                           const mpz_class& q) {
  const mpz_class cofactor = (p - 1) / q;
  const std::size_t nbytes = (mpz_sizeinbase(p.get_mpz_t(), 2) + 64 + 7) / 8;
  for (std::uint32_t attempt = 0;; ++attempt) {
    ByteWriter w;
    w.str("rofl-lab/hash-to-group/v1");
    w.blob(seed);
    w.u32(attempt);
    HashDrbg drbg(sha256(w));
    Bytes wide(nbytes);
    drbg.fill(wide);
    mpz_class x;
    mpz_import(x.get_mpz_t(), wide.size(), 1, 1, 1, 0, wide.data());
    x %= p;
    if (x == 0) continue;
    mpz_class y;
    mpz_powm(y.get_mpz_t(), x.get_mpz_t(), cofactor.get_mpz_t(), p.get_mpz_t());
    if (y != 1) return GroupElement(std::move(y));
  }
}

GroupParams setup_group(GroupProfile profile) {
  if (profile == GroupProfile::kTest) {
    return GroupParams(profile, mpz_class(23), mpz_class(11), mpz_class(2), mpz_class(3));
  }
  mpz_class p(kStandardP, 16), q(kStandardQ, 16), g(kStandardG, 16);
  ByteWriter seed;
  seed.str("rofl-lab-h");
  seed.big(g);
  GroupElement h = hash_to_group(seed.bytes(), p, q);
  return GroupParams(profile, std::move(p), std::move(q), std::move(g), std::move(h.value));
}

const GroupParams& group(GroupProfile profile) {
  static std::mutex mu;
  static std::map<GroupProfile, std::unique_ptr<GroupParams>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[profile];
  if (!slot) slot = std::make_unique<GroupParams>(setup_group(profile));
  return *slot;
}

}  // namespace rofl

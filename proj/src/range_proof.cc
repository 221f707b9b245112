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

#include "rofl/range_proof.h"

#include <exception>

#include "rofl/errors.h"

namespace rofl {
namespace {

const mpz_class& challenge_modulus() {
  static const mpz_class m = mpz_class(1) << kChallengeBits;
  return m;
}

mpz_class bit_challenge(const GroupParams& params, std::span<const std::uint8_t> context,
                        const ExtendedCommitment& commitment, unsigned bits, unsigned k,
                        const ExtendedCommitment& bit_commitment, const GroupElement& a0,
                        const GroupElement& a1) {
  ByteWriter w;
  w.str("rofl-lab/range/bit-or/v1");
  w.str(params.id());
  w.blob(context);
  encode(w, commitment);
  w.u32(bits);
  w.u32(k);
  encode(w, bit_commitment);
  w.big(a0.value);
  w.big(a1.value);
  const Digest d = sha256(w);
  mpz_class e;
  mpz_import(e.get_mpz_t(), kChallengeBits / 8, 1, 1, 1, 0, d.data());
  return e;
}

// h^z * (C^e)^-1: the first message a transcript (e, z) implies for C.
GroupElement implied_first_message(const GroupParams& params, const GroupElement& c,
                                   const mpz_class& e, const Scalar& z) {
  return params.mul(params.pow_h(z.value), params.inv(params.pow(c, e)));
}

// Horner evaluation of prod_k base_k^(2^k).
GroupElement weighted_product(const GroupParams& params, const std::vector<GroupElement>& bases) {
  GroupElement acc = params.identity();
  for (auto it = bases.rbegin(); it != bases.rend(); ++it) {
    acc = params.mul(params.mul(acc, acc), *it);
  }
  return acc;
}

RangeProof prove_bits(const std::vector<mpz_class>& bit_values, const Scalar& r,
                      const GroupParams& params, HashDrbg& rng,
                      std::span<const std::uint8_t> context, const ExtendedCommitment& commitment) {
  const unsigned bits = static_cast<unsigned>(bit_values.size());
  RangeProof proof;
  proof.bit_commitments.reserve(bits);
  proof.bit_proofs.reserve(bits);
  mpz_class weighted_blinding = 0;
  const GroupElement g_inv = params.inv(params.g());

  for (unsigned k = 0; k < bits; ++k) {
    const Scalar rk(rng.uniform_below(params.q()));
    const ExtendedCommitment ck = commit(params.scalar(bit_values[k]), rk, params);
    weighted_blinding += mpz_class(rk.value) << k;

    // Branch j claims C_j = h^rk with C_0 = C, C_1 = C / g.
    const GroupElement branch[2] = {ck.c, params.mul(ck.c, g_inv)};
    const int real = bit_values[k] != 0 ? 1 : 0;
    const int fake = 1 - real;

    BitProof bp;
    mpz_class e[2];
    Scalar z[2];
    GroupElement a[2];
    const Scalar w(rng.uniform_below(params.q()));
    a[real] = params.pow_h(w.value);
    e[fake] = rng.bits(kChallengeBits);
    z[fake] = Scalar(rng.uniform_below(params.q()));
    a[fake] = implied_first_message(params, branch[fake], e[fake], z[fake]);

    const mpz_class e_total = bit_challenge(params, context, commitment, bits, k, ck, a[0], a[1]);
    e[real] = e_total ^ e[fake];
    z[real] = params.add(w, params.mul(params.scalar(e[real]), rk));

    bp.e0 = e[0];
    bp.e1 = e[1];
    bp.z0 = z[0];
    bp.z1 = z[1];
    proof.bit_commitments.push_back(ck);
    proof.bit_proofs.push_back(std::move(bp));
  }
  proof.consistency_opening = params.scalar(r.value - weighted_blinding);
  return proof;
}

void check_bits(unsigned bits) {
  if (bits == 0 || bits > kMaxRangeBits) {
    throw PreconditionError("range proof bit width must be in [1, 64]");
  }
}

}  // namespace

RangeProof prove_range(const Scalar& v, const Scalar& r, unsigned bits, const GroupParams& params,
                       HashDrbg& rng, std::span<const std::uint8_t> context) {
  check_bits(bits);
  if (sgn(v.value) < 0 || v.value >= (mpz_class(1) << bits)) {
    throw PreconditionError("value out of range for a " + std::to_string(bits) + "-bit range proof");
  }
  return detail::prove_range_unchecked(v, r, bits, params, rng, context);
}

namespace detail {

RangeProof prove_range_unchecked(const Scalar& v, const Scalar& r, unsigned bits,
                                 const GroupParams& params, HashDrbg& rng,
                                 std::span<const std::uint8_t> context) {
  check_bits(bits);
  std::vector<mpz_class> bit_values(bits);
  for (unsigned k = 0; k + 1 < bits; ++k) bit_values[k] = mpz_tstbit(v.value.get_mpz_t(), k);
  bit_values[bits - 1] = v.value >> (bits - 1);
  const ExtendedCommitment commitment = commit(v, r, params);
  return prove_bits(bit_values, r, params, rng, context, commitment);
}

}  // namespace detail

bool verify_range(const ExtendedCommitment& commitment, const RangeProof& proof, unsigned bits,
                  const GroupParams& params, std::span<const std::uint8_t> context) {
  if (bits == 0 || bits > kMaxRangeBits) return false;
  if (proof.bit_commitments.size() != bits || proof.bit_proofs.size() != bits) return false;
  if (!params.in_range(commitment.c) || !params.in_range(commitment.mask_term)) return false;
  if (proof.consistency_opening.value >= params.q() || sgn(proof.consistency_opening.value) < 0) {
    return false;
  }
  const GroupElement g_inv = params.inv(params.g());

  std::vector<GroupElement> cs, masks;
  cs.reserve(bits);
  masks.reserve(bits);
  for (unsigned k = 0; k < bits; ++k) {
    const ExtendedCommitment& ck = proof.bit_commitments[k];
    const BitProof& bp = proof.bit_proofs[k];
    if (!params.in_range(ck.c) || !params.in_range(ck.mask_term)) return false;
    for (const mpz_class* e : {&bp.e0, &bp.e1}) {
      if (sgn(*e) < 0 || *e >= challenge_modulus()) return false;
    }
    for (const Scalar* z : {&bp.z0, &bp.z1}) {
      if (sgn(z->value) < 0 || z->value >= params.q()) return false;
    }
    const GroupElement a0 = implied_first_message(params, ck.c, bp.e0, bp.z0);
    const GroupElement a1 = implied_first_message(params, params.mul(ck.c, g_inv), bp.e1, bp.z1);
    const mpz_class e_total = bit_challenge(params, context, commitment, bits, k, ck, a0, a1);
    if ((bp.e0 ^ bp.e1) != e_total) return false;
    cs.push_back(ck.c);
    masks.push_back(ck.mask_term);
  }

  const mpz_class& opening = proof.consistency_opening.value;
  if (params.mul(weighted_product(params, cs), params.pow_h(opening)) != commitment.c) return false;
  return params.mul(weighted_product(params, masks), params.pow_g(opening)) == commitment.mask_term;
}

void encode(ByteWriter& w, const RangeProof& proof) {
  w.u32(static_cast<std::uint32_t>(proof.bit_commitments.size()));
  for (const auto& c : proof.bit_commitments) encode(w, c);
  w.u32(static_cast<std::uint32_t>(proof.bit_proofs.size()));
  for (const auto& bp : proof.bit_proofs) {
    w.big(bp.e0);
    w.big(bp.e1);
    w.big(bp.z0.value);
    w.big(bp.z1.value);
  }
  w.big(proof.consistency_opening.value);
}

RangeProof decode_range_proof(ByteReader& r) {
  RangeProof proof;
  const std::uint32_t nc = r.u32();
  if (nc > kMaxRangeBits) throw DecodeError("too many bit commitments");
  for (std::uint32_t i = 0; i < nc; ++i) proof.bit_commitments.push_back(decode_commitment(r));
  const std::uint32_t np = r.u32();
  if (np > kMaxRangeBits) throw DecodeError("too many bit proofs");
  for (std::uint32_t i = 0; i < np; ++i) {
    BitProof bp;
    bp.e0 = r.big();
    bp.e1 = r.big();
    bp.z0.value = r.big();
    bp.z1.value = r.big();
    proof.bit_proofs.push_back(std::move(bp));
  }
  proof.consistency_opening.value = r.big();
  return proof;
}

Bytes serialize(const RangeProof& proof) {
  ByteWriter w;
  encode(w, proof);
  return w.take();
}

RangeProof parse_range_proof(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  RangeProof proof = decode_range_proof(r);
  if (!r.done()) throw DecodeError("trailing bytes after range proof");
  return proof;
}

}  // namespace rofl

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

// Range proofs by bit decomposition.
//
// To show that commit(v, r) opens to some v in [0, 2^bits) the prover
// commits to every bit b_k of v with a fresh blinding r_k, proves each bit
// commitment opens to 0 or 1 with a two-branch OR composition of Schnorr
// proofs over base h, and publishes
//
//     opening = r - sum_k 2^k r_k  (mod q)
//
// so the verifier can check prod_k C_k^(2^k) * h^opening == c (and the
// matching relation on the mask terms with base g). Proofs are made
// non-interactive by hashing the statement, the caller's context bytes and
// the first messages; each OR proof splits a 128-bit challenge as
// e0 xor e1. Proof size is linear in `bits`.

#ifndef ROFL_RANGE_PROOF_H_
#define ROFL_RANGE_PROOF_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rofl/bytes.h"
#include "rofl/commitment.h"
#include "rofl/group.h"

namespace rofl {

// Identifier written into transcripts next to each batch of proofs.
inline constexpr const char* kRangeProofSystem = "bitdecomp-or-sha256-v1";
inline constexpr unsigned kChallengeBits = 128;
inline constexpr unsigned kMaxRangeBits = 64;

struct BitProof {
  mpz_class e0, e1;  // challenge shares, each < 2^128
  Scalar z0, z1;

  friend bool operator==(const BitProof& a, const BitProof& b) {
    return a.e0 == b.e0 && a.e1 == b.e1 && a.z0 == b.z0 && a.z1 == b.z1;
  }
};

struct RangeProof {
  std::vector<ExtendedCommitment> bit_commitments;
  std::vector<BitProof> bit_proofs;
  Scalar consistency_opening;

  friend bool operator==(const RangeProof&, const RangeProof&) = default;
};

// Throws PreconditionError unless 0 <= v < 2^bits and 1 <= bits <= 64.
// `context` is absorbed into every challenge so a proof only verifies
// under the same context.
RangeProof prove_range(const Scalar& v, const Scalar& r, unsigned bits, const GroupParams& params,
                       HashDrbg& rng, std::span<const std::uint8_t> context = {});

// Never throws on malformed proofs; returns false instead.
bool verify_range(const ExtendedCommitment& commitment, const RangeProof& proof, unsigned bits,
                  const GroupParams& params, std::span<const std::uint8_t> context = {});

void encode(ByteWriter& w, const RangeProof& proof);
RangeProof decode_range_proof(ByteReader& r);
Bytes serialize(const RangeProof& proof);
RangeProof parse_range_proof(std::span<const std::uint8_t> bytes);

namespace detail {

// The honest prover minus its precondition: bits 0..bits-2 of v are
// committed as usual and everything above lands in the top "bit". Used to
// check that out-of-range statements are rejected.
RangeProof prove_range_unchecked(const Scalar& v, const Scalar& r, unsigned bits,
                                 const GroupParams& params, HashDrbg& rng,
                                 std::span<const std::uint8_t> context = {});

}  // namespace detail
}  // namespace rofl

#endif  // ROFL_RANGE_PROOF_H_

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

// Pedersen commitments extended with a mask term.
//
// commit(m, r) = (c = g^m h^r, mask_term = g^r). The pair is additively
// homomorphic in (m, r) componentwise, and the product of mask terms over a
// set of clients can be compared against g^r' for a published decoding key
// r' without learning any individual r.

#ifndef ROFL_COMMITMENT_H_
#define ROFL_COMMITMENT_H_

#include <span>

#include "rofl/bytes.h"
#include "rofl/group.h"

namespace rofl {

struct ExtendedCommitment {
  GroupElement c;
  GroupElement mask_term;

  friend bool operator==(const ExtendedCommitment&, const ExtendedCommitment&) = default;
};

ExtendedCommitment commit(const Scalar& m, const Scalar& r, const GroupParams& params);

// Componentwise product. The empty product is (1, 1).
ExtendedCommitment add_commitments(std::span<const ExtendedCommitment> commitments,
                                   const GroupParams& params);

// True iff the product of mask terms equals g^decoding_key.
bool verify_mask_sum(std::span<const ExtendedCommitment> commitments, const Scalar& decoding_key,
                     const GroupParams& params);

void encode(ByteWriter& w, const ExtendedCommitment& c);
ExtendedCommitment decode_commitment(ByteReader& r);

}  // namespace rofl

#endif  // ROFL_COMMITMENT_H_

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

namespace rofl {

ExtendedCommitment commit(const Scalar& m, const Scalar& r, const GroupParams& params) {
  const GroupElement mask = params.pow_g(r.value);
  return {params.mul(params.pow_g(m.value), params.pow_h(r.value)), mask};
}

ExtendedCommitment add_commitments(std::span<const ExtendedCommitment> commitments,
                                   const GroupParams& params) {
  ExtendedCommitment sum{params.identity(), params.identity()};
  for (const auto& c : commitments) {
    sum.c = params.mul(sum.c, c.c);
    sum.mask_term = params.mul(sum.mask_term, c.mask_term);
  }
  return sum;
}

bool verify_mask_sum(std::span<const ExtendedCommitment> commitments, const Scalar& decoding_key,
                     const GroupParams& params) {
  GroupElement product = params.identity();
  for (const auto& c : commitments) product = params.mul(product, c.mask_term);
  return product == params.pow_g(decoding_key.value);
}

void encode(ByteWriter& w, const ExtendedCommitment& c) {
  w.big(c.c.value);
  w.big(c.mask_term.value);
}

ExtendedCommitment decode_commitment(ByteReader& r) {
  ExtendedCommitment c;
  c.c.value = r.big();
  c.mask_term.value = r.big();
  return c;
}

}  // namespace rofl

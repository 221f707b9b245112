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

// Additive-mask secure aggregation with commitment checks.
//
// Each pair of participants (i < j) agrees on a seed s_ij by Diffie-Hellman
// in the commitment group. Client i's mask is
//
//     r_i = sum_{j > i} expand(s_ij) - sum_{j < i} expand(s_ji)   (mod q)
//
// so the masks of a full round sum to zero. A client submits
// payload = u + r (mod q) for its quantized update u together with
// commit(u_k, r_k) and a range proof for every coordinate k: the blinding
// of each Pedersen commitment is the mask scalar itself, which is what lets
// the server audit the masks through the g^r terms.
//
// The server verifies every envelope, then for each coordinate checks
//
//     prod_i g^{r_ik} == g^{r'_k}                     (mask sum)
//     prod_i c_ik     == g^{S_k} h^{r'_k}             (consistency)
//
// with S_k = sum_i payload_ik - r'_k and decoding key r'. With everyone
// accepted r' = 0; when some envelopes are rejected the survivors disclose
// their pairwise terms with the rejected peers and r' is their sum.

#ifndef ROFL_SECURE_AGG_H_
#define ROFL_SECURE_AGG_H_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rofl/bytes.h"
#include "rofl/commitment.h"
#include "rofl/group.h"
#include "rofl/range_proof.h"

namespace rofl {

using ClientId = std::uint64_t;

struct KeyPair {
  Scalar secret;
  GroupElement public_key;
};

KeyPair make_keypair(const GroupParams& params, HashDrbg& rng);

// Public keys registered for one round.
class KeyDirectory {
 public:
  void register_key(ClientId id, GroupElement pk);
  // Throws ProtocolError for unregistered ids.
  const GroupElement& lookup(ClientId id) const;
  bool contains(ClientId id) const { return keys_.count(id) != 0; }

 private:
  std::map<ClientId, GroupElement> keys_;
};

struct MaskSeed {
  ClientId lo = 0, hi = 0;  // lo < hi
  std::uint64_t round = 0;
  Digest seed{};

  friend bool operator==(const MaskSeed&, const MaskSeed&) = default;
};

// seed = SHA-256(tag || pk_peer^sk_self || round); symmetric in the pair.
MaskSeed derive_pairwise_secret(ClientId self, const Scalar& sk_self, ClientId peer,
                                const GroupElement& pk_peer, std::uint64_t round,
                                const GroupParams& params);
MaskSeed derive_pairwise_secret(ClientId self, const Scalar& sk_self, ClientId peer,
                                const KeyDirectory& directory, std::uint64_t round,
                                const GroupParams& params);

using MaskVector = std::vector<Scalar>;

// SHA-256 counter mode keyed by the seed, reduced to [0, q) by rejection.
MaskVector expand_mask(const MaskSeed& seed, std::size_t d, const GroupParams& params);

// The sign convention on already-expanded pair masks: + for peers with a
// larger id, - for peers with a smaller one.
MaskVector combine_pairwise_masks(ClientId self,
                                  std::span<const std::pair<ClientId, MaskVector>> expansions,
                                  std::size_t d, const GroupParams& params);

// Mask over `peers` (self is skipped if present). Throws ProtocolError if
// a seed is missing.
MaskVector compute_client_mask(ClientId self, std::span<const ClientId> peers,
                               const std::map<ClientId, MaskSeed>& seeds, std::size_t d,
                               const GroupParams& params);

struct MaskedUpdate {
  std::vector<Scalar> payload;
  ClientId client = 0;
  std::uint64_t round = 0;

  friend bool operator==(const MaskedUpdate&, const MaskedUpdate&) = default;
};

MaskedUpdate mask_update(std::span<const std::uint64_t> quantized, const MaskVector& mask,
                         ClientId client, std::uint64_t round, const GroupParams& params);

// Each committed coordinate u must satisfy u - lower in [0, 2^bits).
struct RangeWindow {
  unsigned bits = 16;
  std::uint64_t lower = 0;

  friend bool operator==(const RangeWindow&, const RangeWindow&) = default;
};

// Window of width 2^window_bits centred on the zero point 2^(quant_bits-1)
// of a quant_bits-wide encoding. window_bits == quant_bits is the full
// encoding range.
RangeWindow centered_window(unsigned quant_bits, unsigned window_bits);

struct ClientEnvelope {
  MaskedUpdate masked;
  std::vector<ExtendedCommitment> commitments;
  std::vector<RangeProof> proofs;
  double declared_norm = 0.0;

  ClientId client() const { return masked.client; }
  friend bool operator==(const ClientEnvelope&, const ClientEnvelope&) = default;
};

// Fiat-Shamir context for coordinate k of an envelope.
Bytes envelope_context(ClientId client, std::uint64_t round, std::size_t coordinate,
                       double declared_norm, const RangeWindow& window);

// Throws PreconditionError if a coordinate falls outside the window (the
// client has to clip first) and ShapeError on length mismatch.
ClientEnvelope build_envelope(ClientId client, std::uint64_t round,
                              std::span<const std::uint64_t> quantized, const MaskVector& mask,
                              const RangeWindow& window, double declared_norm,
                              const GroupParams& params, HashDrbg& rng);

struct Verdict {
  bool accepted = false;
  std::string check;    // "", "round", "shape", "encoding", "membership", "range", "norm", "missing"
  long coordinate = -1;
  std::string reason;

  static Verdict accept() { return {true, "", -1, ""}; }
  static Verdict reject(std::string check, long coordinate, std::string reason) {
    return {false, std::move(check), coordinate, std::move(reason)};
  }
  friend bool operator==(const Verdict&, const Verdict&) = default;
};

Verdict verify_envelope(const ClientEnvelope& envelope, const RangeWindow& window,
                        const GroupParams& params);

// Sum of the accepted payloads minus the decoding key, coordinatewise mod
// q, after the mask-sum and consistency checks. The envelopes must already
// be verified (AggregationRound enforces the ordering). Throws
// ProtocolAbort naming the failing coordinate and check.
std::vector<Scalar> aggregate_round(std::span<const ClientEnvelope> accepted,
                                    std::span<const Scalar> decoding_key,
                                    const GroupParams& params);

// Single-owner round state machine: expect -> (policy rejections) ->
// submit -> verify -> aggregate. Envelopes are buffered and processed in
// ascending client id regardless of arrival order.
class AggregationRound {
 public:
  AggregationRound(const GroupParams& params, std::uint64_t round, std::size_t d,
                   RangeWindow window);

  void expect(ClientId id);
  // Server-side policy rejection (e.g. declared norm over the bound).
  void reject(ClientId id, Verdict verdict);
  void submit(ClientEnvelope envelope);

  // Verifies every buffered envelope. A participant that was expected, not
  // policy-rejected and did not submit aborts the round (no dropout path).
  // Envelopes are checked on up to `threads` threads; verdicts are applied
  // in ascending id order.
  const std::map<ClientId, Verdict>& verify(std::size_t threads = 1);

  std::vector<ClientId> accepted() const;
  std::vector<ClientId> rejected() const;
  const std::map<ClientId, Verdict>& verdicts() const { return verdicts_; }
  const std::map<ClientId, ClientEnvelope>& envelopes() const { return envelopes_; }

  // Throws ProtocolError if verify() has not run.
  std::vector<Scalar> aggregate(std::span<const Scalar> decoding_key) const;

  std::uint64_t round() const { return round_; }
  std::size_t dimension() const { return d_; }
  const RangeWindow& window() const { return window_; }

 private:
  const GroupParams& params_;
  std::uint64_t round_;
  std::size_t d_;
  RangeWindow window_;
  std::set<ClientId> expected_;
  std::map<ClientId, ClientEnvelope> envelopes_;
  std::map<ClientId, Verdict> verdicts_;
  bool verified_ = false;
};

// Sum of per-survivor decoding shares (each a compute_client_mask over the
// rejected peers only).
std::vector<Scalar> assemble_decoding_key(std::span<const MaskVector> shares, std::size_t d,
                                          const GroupParams& params);

void encode(ByteWriter& w, const ClientEnvelope& envelope);
ClientEnvelope decode_envelope(ByteReader& r);

}  // namespace rofl

#endif  // ROFL_SECURE_AGG_H_

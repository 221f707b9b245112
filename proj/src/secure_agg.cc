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

#include "rofl/secure_agg.h"

#include <algorithm>

#include "rofl/errors.h"
#include "rofl/parallel.h"

namespace rofl {

KeyPair make_keypair(const GroupParams& params, HashDrbg& rng) {
  Scalar sk(rng.uniform_below(params.q() - 1) + 1);
  GroupElement pk = params.pow_g(sk.value);
  return {std::move(sk), std::move(pk)};
}

void KeyDirectory::register_key(ClientId id, GroupElement pk) {
  if (!keys_.emplace(id, std::move(pk)).second) {
    throw ProtocolError("client " + std::to_string(id) + " registered twice");
  }
}

const GroupElement& KeyDirectory::lookup(ClientId id) const {
  auto it = keys_.find(id);
  if (it == keys_.end()) {
    throw ProtocolError("registration: no public key for client " + std::to_string(id));
  }
  return it->second;
}

MaskSeed derive_pairwise_secret(ClientId self, const Scalar& sk_self, ClientId peer,
                                const GroupElement& pk_peer, std::uint64_t round,
                                const GroupParams& params) {
  if (self == peer) throw PreconditionError("a client has no pairwise secret with itself");
  if (!params.is_member(pk_peer)) {
    throw ProtocolError("registration: public key of client " + std::to_string(peer) +
                        " is not a group element");
  }
  const GroupElement shared = params.pow(pk_peer, sk_self.value);
  ByteWriter w;
  w.str("rofl-lab/pairwise-seed/v1");
  w.big(shared.value);
  w.u64(round);
  MaskSeed seed;
  seed.lo = std::min(self, peer);
  seed.hi = std::max(self, peer);
  seed.round = round;
  seed.seed = sha256(w);
  return seed;
}

MaskSeed derive_pairwise_secret(ClientId self, const Scalar& sk_self, ClientId peer,
                                const KeyDirectory& directory, std::uint64_t round,
                                const GroupParams& params) {
  return derive_pairwise_secret(self, sk_self, peer, directory.lookup(peer), round, params);
}

MaskVector expand_mask(const MaskSeed& seed, std::size_t d, const GroupParams& params) {
  ByteWriter w;
  w.str("rofl-lab/mask-prg/v1");
  w.blob(seed.seed);
  HashDrbg prg(sha256(w));
  MaskVector out;
  out.reserve(d);
  for (std::size_t k = 0; k < d; ++k) out.emplace_back(prg.uniform_below(params.q()));
  return out;
}

MaskVector combine_pairwise_masks(ClientId self,
                                  std::span<const std::pair<ClientId, MaskVector>> expansions,
                                  std::size_t d, const GroupParams& params) {
  std::vector<mpz_class> acc(d, 0);
  for (const auto& [peer, expansion] : expansions) {
    if (peer == self) continue;
    if (expansion.size() != d) throw ShapeError("pair mask has the wrong length");
    for (std::size_t k = 0; k < d; ++k) {
      if (peer > self) {
        acc[k] += expansion[k].value;
      } else {
        acc[k] -= expansion[k].value;
      }
    }
  }
  MaskVector out;
  out.reserve(d);
  for (const auto& v : acc) out.push_back(params.scalar(v));
  return out;
}

MaskVector compute_client_mask(ClientId self, std::span<const ClientId> peers,
                               const std::map<ClientId, MaskSeed>& seeds, std::size_t d,
                               const GroupParams& params) {
  std::vector<std::pair<ClientId, MaskVector>> expansions;
  for (ClientId peer : peers) {
    if (peer == self) continue;
    auto it = seeds.find(peer);
    if (it == seeds.end()) {
      throw ProtocolError("client " + std::to_string(self) + " has no pairwise seed with " +
                          std::to_string(peer));
    }
    expansions.emplace_back(peer, expand_mask(it->second, d, params));
  }
  return combine_pairwise_masks(self, expansions, d, params);
}

MaskedUpdate mask_update(std::span<const std::uint64_t> quantized, const MaskVector& mask,
                         ClientId client, std::uint64_t round, const GroupParams& params) {
  if (quantized.size() != mask.size()) {
    throw ShapeError("update has " + std::to_string(quantized.size()) + " coordinates, mask has " +
                     std::to_string(mask.size()));
  }
  MaskedUpdate out;
  out.client = client;
  out.round = round;
  out.payload.reserve(quantized.size());
  for (std::size_t k = 0; k < quantized.size(); ++k) {
    out.payload.push_back(params.scalar(mpz_class(static_cast<unsigned long>(quantized[k])) +
                                        mask[k].value));
  }
  return out;
}

RangeWindow centered_window(unsigned quant_bits, unsigned window_bits) {
  if (window_bits == 0 || window_bits > quant_bits || quant_bits > 63) {
    throw PreconditionError("window must satisfy 1 <= window_bits <= quant_bits <= 63");
  }
  return {window_bits, (std::uint64_t{1} << (quant_bits - 1)) - (std::uint64_t{1} << (window_bits - 1))};
}

Bytes envelope_context(ClientId client, std::uint64_t round, std::size_t coordinate,
                       double declared_norm, const RangeWindow& window) {
  ByteWriter w;
  w.str("rofl-lab/envelope/v1");
  w.u64(client);
  w.u64(round);
  w.u64(coordinate);
  w.f64(declared_norm);
  w.u32(window.bits);
  w.u64(window.lower);
  return w.take();
}

ClientEnvelope build_envelope(ClientId client, std::uint64_t round,
                              std::span<const std::uint64_t> quantized, const MaskVector& mask,
                              const RangeWindow& window, double declared_norm,
                              const GroupParams& params, HashDrbg& rng) {
  ClientEnvelope env;
  env.masked = mask_update(quantized, mask, client, round, params);
  env.declared_norm = declared_norm;
  const std::size_t d = quantized.size();
  for (std::size_t k = 0; k < d; ++k) {
    const std::uint64_t u = quantized[k];
    if (u < window.lower || ((u - window.lower) >> window.bits) != 0) {
      throw PreconditionError("coordinate " + std::to_string(k) + " = " + std::to_string(u) +
                              " is outside the proof window; clip before building the envelope");
    }
  }
  env.commitments.reserve(d);
  env.proofs.reserve(d);
  for (std::size_t k = 0; k < d; ++k) {
    const Scalar u(static_cast<unsigned long>(quantized[k]));
    env.commitments.push_back(commit(u, mask[k], params));
    const Scalar shifted(static_cast<unsigned long>(quantized[k] - window.lower));
    const Bytes ctx = envelope_context(client, round, k, declared_norm, window);
    env.proofs.push_back(prove_range(shifted, mask[k], window.bits, params, rng, ctx));
  }
  return env;
}

Verdict verify_envelope(const ClientEnvelope& envelope, const RangeWindow& window,
                        const GroupParams& params) {
  const std::size_t d = envelope.masked.payload.size();
  if (envelope.commitments.size() != d || envelope.proofs.size() != d) {
    return Verdict::reject("shape", -1,
                           "payload, commitment and proof counts differ (" + std::to_string(d) +
                               "/" + std::to_string(envelope.commitments.size()) + "/" +
                               std::to_string(envelope.proofs.size()) + ")");
  }
  if (window.bits == 0 || window.bits > kMaxRangeBits) {
    return Verdict::reject("shape", -1, "invalid proof window");
  }
  const GroupElement shift = params.pow_g(params.neg(params.scalar(mpz_class(
                                              static_cast<unsigned long>(window.lower))))
                                              .value);
  for (std::size_t k = 0; k < d; ++k) {
    const long coord = static_cast<long>(k);
    const Scalar& x = envelope.masked.payload[k];
    if (sgn(x.value) < 0 || x.value >= params.q()) {
      return Verdict::reject("encoding", coord, "payload coordinate not reduced mod q");
    }
    const ExtendedCommitment& c = envelope.commitments[k];
    if (!params.is_member(c.c) || !params.is_member(c.mask_term)) {
      return Verdict::reject("membership", coord, "commitment is not in the order-q subgroup");
    }
    const ExtendedCommitment shifted{params.mul(c.c, shift), c.mask_term};
    const Bytes ctx =
        envelope_context(envelope.client(), envelope.masked.round, k, envelope.declared_norm, window);
    if (!verify_range(shifted, envelope.proofs[k], window.bits, params, ctx)) {
      return Verdict::reject("range", coord, "range proof rejected");
    }
  }
  return Verdict::accept();
}

std::vector<Scalar> aggregate_round(std::span<const ClientEnvelope> accepted,
                                    std::span<const Scalar> decoding_key,
                                    const GroupParams& params) {
  const std::size_t d = decoding_key.size();
  for (const auto& env : accepted) {
    if (env.masked.payload.size() != d || env.commitments.size() != d) {
      throw ShapeError("envelope of client " + std::to_string(env.client()) +
                       " does not match the decoding key length");
    }
  }
  std::vector<Scalar> sums;
  sums.reserve(d);
  std::vector<ExtendedCommitment> column(accepted.size());
  for (std::size_t k = 0; k < d; ++k) {
    mpz_class total = 0;
    for (std::size_t i = 0; i < accepted.size(); ++i) {
      column[i] = accepted[i].commitments[k];
      total += accepted[i].masked.payload[k].value;
    }
    const long coord = static_cast<long>(k);
    if (!verify_mask_sum(column, decoding_key[k], params)) {
      throw ProtocolAbort("mask_sum", coord,
                          "mask terms do not multiply to g^r' at coordinate " + std::to_string(k));
    }
    Scalar sum = params.scalar(total - decoding_key[k].value);
    const ExtendedCommitment product = add_commitments(column, params);
    const GroupElement expected = params.mul(params.pow_g(sum.value), params.pow_h(decoding_key[k].value));
    if (product.c != expected) {
      throw ProtocolAbort("consistency", coord,
                          "commitments do not open to the unmasked sum at coordinate " +
                              std::to_string(k));
    }
    sums.push_back(std::move(sum));
  }
  return sums;
}

AggregationRound::AggregationRound(const GroupParams& params, std::uint64_t round, std::size_t d,
                                   RangeWindow window)
    : params_(params), round_(round), d_(d), window_(window) {}

void AggregationRound::expect(ClientId id) {
  if (verified_) throw ProtocolError("cannot add participants after verification");
  expected_.insert(id);
}

void AggregationRound::reject(ClientId id, Verdict verdict) {
  if (verified_) throw ProtocolError("policy rejections must precede verification");
  if (!expected_.count(id)) throw ProtocolError("client " + std::to_string(id) + " is not in this round");
  verdict.accepted = false;
  verdicts_[id] = std::move(verdict);
  envelopes_.erase(id);
}

void AggregationRound::submit(ClientEnvelope envelope) {
  if (verified_) throw ProtocolError("round already verified");
  const ClientId id = envelope.client();
  if (!expected_.count(id)) throw ProtocolError("client " + std::to_string(id) + " is not in this round");
  if (verdicts_.count(id)) return;  // already rejected by policy
  if (!envelopes_.emplace(id, std::move(envelope)).second) {
    throw ProtocolError("client " + std::to_string(id) + " submitted twice");
  }
}

const std::map<ClientId, Verdict>& AggregationRound::verify(std::size_t threads) {
  if (verified_) return verdicts_;
  std::vector<const ClientEnvelope*> pending;
  for (ClientId id : expected_) {
    if (verdicts_.count(id)) continue;
    auto it = envelopes_.find(id);
    if (it == envelopes_.end()) {
      throw ProtocolAbort("missing", -1, "no envelope from client " + std::to_string(id));
    }
    pending.push_back(&it->second);
  }
  std::vector<Verdict> results(pending.size());
  parallel_for(pending.size(), threads, [&](std::size_t i) {
    const ClientEnvelope& env = *pending[i];
    if (env.masked.round != round_) {
      results[i] = Verdict::reject("round", -1, "envelope is for another round");
    } else if (env.masked.payload.size() != d_) {
      results[i] = Verdict::reject("shape", -1, "wrong model dimension");
    } else {
      results[i] = verify_envelope(env, window_, params_);
    }
  });
  for (std::size_t i = 0; i < pending.size(); ++i) verdicts_[pending[i]->client()] = std::move(results[i]);
  verified_ = true;
  return verdicts_;
}

std::vector<ClientId> AggregationRound::accepted() const {
  std::vector<ClientId> out;
  for (const auto& [id, v] : verdicts_) {
    if (v.accepted) out.push_back(id);
  }
  return out;
}

std::vector<ClientId> AggregationRound::rejected() const {
  std::vector<ClientId> out;
  for (const auto& [id, v] : verdicts_) {
    if (!v.accepted) out.push_back(id);
  }
  return out;
}

std::vector<Scalar> AggregationRound::aggregate(std::span<const Scalar> decoding_key) const {
  if (!verified_) throw ProtocolError("aggregate called before every envelope was verified");
  if (decoding_key.size() != d_) throw ShapeError("decoding key has the wrong length");
  std::vector<ClientEnvelope> accepted_envs;
  for (const auto& [id, v] : verdicts_) {
    if (v.accepted) accepted_envs.push_back(envelopes_.at(id));
  }
  return aggregate_round(accepted_envs, decoding_key, params_);
}

std::vector<Scalar> assemble_decoding_key(std::span<const MaskVector> shares, std::size_t d,
                                          const GroupParams& params) {
  std::vector<mpz_class> acc(d, 0);
  for (const auto& share : shares) {
    if (share.size() != d) throw ShapeError("decoding share has the wrong length");
    for (std::size_t k = 0; k < d; ++k) acc[k] += share[k].value;
  }
  std::vector<Scalar> out;
  out.reserve(d);
  for (const auto& v : acc) out.push_back(params.scalar(v));
  return out;
}

void encode(ByteWriter& w, const ClientEnvelope& envelope) {
  w.u64(envelope.masked.client);
  w.u64(envelope.masked.round);
  w.f64(envelope.declared_norm);
  w.u32(static_cast<std::uint32_t>(envelope.masked.payload.size()));
  for (const auto& x : envelope.masked.payload) w.big(x.value);
  w.u32(static_cast<std::uint32_t>(envelope.commitments.size()));
  for (const auto& c : envelope.commitments) encode(w, c);
  w.u32(static_cast<std::uint32_t>(envelope.proofs.size()));
  for (const auto& p : envelope.proofs) encode(w, p);
}

ClientEnvelope decode_envelope(ByteReader& r) {
  // Each item takes at least four bytes, which bounds the counts below.
  auto count = [&r]() {
    const std::uint32_t n = r.u32();
    if (n > r.remaining() / 4) throw DecodeError("element count exceeds input size");
    return n;
  };
  ClientEnvelope env;
  env.masked.client = r.u64();
  env.masked.round = r.u64();
  env.declared_norm = r.f64();
  for (std::uint32_t n = count(), i = 0; i < n; ++i) env.masked.payload.emplace_back(r.big());
  for (std::uint32_t n = count(), i = 0; i < n; ++i) env.commitments.push_back(decode_commitment(r));
  for (std::uint32_t n = count(), i = 0; i < n; ++i) env.proofs.push_back(decode_range_proof(r));
  return env;
}

}  // namespace rofl

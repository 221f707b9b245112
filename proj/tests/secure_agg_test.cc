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

#include <gtest/gtest.h>

#include <random>

#include "rofl/errors.h"
#include "round_fixture.h"

namespace rofl {
namespace {

using testing::make_parties;
using testing::Party;

const GroupParams& toy() { return group(GroupProfile::kTest); }
const GroupParams& standard() { return group(GroupProfile::kStandard); }

std::vector<mpz_class> column_sums(const std::vector<Party>& parties, std::size_t d,
                                   const GroupParams& params) {
  std::vector<mpz_class> s(d, 0);
  for (const Party& p : parties)
    for (std::size_t k = 0; k < d; ++k) s[k] += p.mask[k].value;
  for (auto& v : s) v %= params.q();
  return s;
}

TEST(SecureAgg, ToyPairwiseSecretFromHand) {
  // a = 3, b = 4: (2^4)^3 = 2^12 = 2 (mod 23).
  const GroupParams& t = toy();
  const GroupElement pk_b = t.pow_g(4);
  const MaskSeed s = derive_pairwise_secret(1, Scalar(3ul), 2, pk_b, 7, t);
  ByteWriter w;
  w.str("rofl-lab/pairwise-seed/v1");
  w.big(2);
  w.u64(7);
  EXPECT_EQ(s.seed, sha256(w));
  EXPECT_EQ(s.lo, 1u);
  EXPECT_EQ(s.hi, 2u);
}

TEST(SecureAgg, PairwiseSecretSymmetricAndRoundBound) {
  const GroupParams& s = standard();
  HashDrbg rng(5, "keys", 0, 0);
  const KeyPair a = make_keypair(s, rng), b = make_keypair(s, rng);
  const MaskSeed ab = derive_pairwise_secret(3, a.secret, 9, b.public_key, 1, s);
  const MaskSeed ba = derive_pairwise_secret(9, b.secret, 3, a.public_key, 1, s);
  EXPECT_EQ(ab, ba);
  const MaskSeed next = derive_pairwise_secret(3, a.secret, 9, b.public_key, 2, s);
  EXPECT_NE(ab.seed, next.seed);
}

TEST(SecureAgg, UnknownPublicKeyIsRegistrationError) {
  KeyDirectory dir;
  EXPECT_THROW(derive_pairwise_secret(1, Scalar(3ul), 2, dir, 0, toy()), ProtocolError);
}

TEST(SecureAgg, ThreeClientScalarMasksFromHand) {
  const GroupParams& t = toy();
  auto m = [](unsigned long v) { return MaskVector{Scalar(v)}; };
  // s12 -> 5, s13 -> 7, s23 -> 2.
  const std::vector<std::pair<ClientId, MaskVector>> e1 = {{2, m(5)}, {3, m(7)}};
  const std::vector<std::pair<ClientId, MaskVector>> e2 = {{1, m(5)}, {3, m(2)}};
  const std::vector<std::pair<ClientId, MaskVector>> e3 = {{1, m(7)}, {2, m(2)}};
  EXPECT_EQ(combine_pairwise_masks(1, e1, 1, t)[0].value, 1);
  EXPECT_EQ(combine_pairwise_masks(2, e2, 1, t)[0].value, 8);
  EXPECT_EQ(combine_pairwise_masks(3, e3, 1, t)[0].value, 2);
}

TEST(SecureAgg, MasksCancelExactly) {
  for (std::size_t d : {1u, 10u, 100u}) {
    for (ClientId n = 2; n <= 16; ++n) {
      std::vector<ClientId> ids;
      for (ClientId i = 0; i < n; ++i) ids.push_back(10 + 3 * i);
      const auto parties = make_parties(ids, n, d, toy(), d);
      for (const auto& v : column_sums(parties, d, toy())) ASSERT_EQ(v, 0) << "n=" << n << " d=" << d;
    }
  }
  const auto parties = make_parties({0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, 4, 100, standard());
  for (const auto& v : column_sums(parties, 100, standard())) EXPECT_EQ(v, 0);
}

TEST(SecureAgg, MissingSeedIsProtocolError) {
  const std::vector<ClientId> peers = {1, 2};
  EXPECT_THROW(compute_client_mask(1, peers, {}, 3, toy()), ProtocolError);
}

TEST(SecureAgg, MaskUpdateIdentities) {
  const GroupParams& s = standard();
  const MaskVector r = {Scalar(5ul), Scalar(s.q() - 1)};
  const std::vector<std::uint64_t> zero = {0, 0}, u = {3, 9};
  EXPECT_EQ(mask_update(zero, r, 1, 0, s).payload, r);
  const MaskVector no_mask = {Scalar(0ul), Scalar(0ul)};
  EXPECT_EQ(mask_update(u, no_mask, 1, 0, s).payload, (std::vector<Scalar>{Scalar(3ul), Scalar(9ul)}));
  const MaskedUpdate m = mask_update(u, r, 1, 0, s);
  for (std::size_t k = 0; k < 2; ++k) EXPECT_EQ(s.sub(m.payload[k], r[k]).value, u[k]);
  const std::vector<std::uint64_t> short_u = {1};
  EXPECT_THROW(mask_update(short_u, r, 1, 0, s), ShapeError);
}

TEST(SecureAgg, CenteredWindow) {
  const RangeWindow w = centered_window(16, 4);
  EXPECT_EQ(w.bits, 4u);
  EXPECT_EQ(w.lower, 32768u - 8u);
  EXPECT_EQ(centered_window(16, 16).lower, 0u);
  EXPECT_THROW(centered_window(8, 9), PreconditionError);
  EXPECT_THROW(centered_window(8, 0), PreconditionError);
}

ClientEnvelope honest_envelope(const std::vector<std::uint64_t>& u, const MaskVector& mask,
                               ClientId id = 1, std::uint64_t round = 0) {
  HashDrbg rng(9, "proof", id, round);
  return build_envelope(id, round, u, mask, RangeWindow{4, 0}, 1.0, standard(), rng);
}

TEST(SecureAgg, EnvelopeRoundTripVerifies) {
  const MaskVector mask = {Scalar(11ul), Scalar(12ul)};
  const ClientEnvelope env = honest_envelope({3, 5}, mask);
  EXPECT_EQ(env.commitments.size(), 2u);
  EXPECT_EQ(env.proofs.size(), 2u);
  EXPECT_TRUE(verify_envelope(env, RangeWindow{4, 0}, standard()).accepted);

  const ClientEnvelope empty = honest_envelope({}, {});
  EXPECT_TRUE(verify_envelope(empty, RangeWindow{4, 0}, standard()).accepted);

  EXPECT_THROW(honest_envelope({16, 0}, mask), PreconditionError);
}

TEST(SecureAgg, ForgedProofRejectedAtItsCoordinate) {
  const GroupParams& s = standard();
  const MaskVector mask = {Scalar(11ul), Scalar(12ul), Scalar(13ul)};
  ClientEnvelope env = honest_envelope({3, 5, 7}, mask);
  // Coordinate 1 claims 20 with a proof built without the range check.
  const RangeWindow w{4, 0};
  HashDrbg rng(1, "forge", 0, 0);
  env.masked.payload[1] = s.add(Scalar(20ul), mask[1]);
  env.commitments[1] = commit(Scalar(20ul), mask[1], s);
  env.proofs[1] = detail::prove_range_unchecked(Scalar(20ul), mask[1], 4, s, rng,
                                                envelope_context(1, 0, 1, 1.0, w));
  const Verdict v = verify_envelope(env, w, s);
  EXPECT_FALSE(v.accepted);
  EXPECT_EQ(v.check, "range");
  EXPECT_EQ(v.coordinate, 1);
}

TEST(SecureAgg, ShapeMismatchRejected) {
  ClientEnvelope env = honest_envelope({3, 5}, {Scalar(1ul), Scalar(2ul)});
  env.proofs.pop_back();
  const Verdict v = verify_envelope(env, RangeWindow{4, 0}, standard());
  EXPECT_FALSE(v.accepted);
  EXPECT_EQ(v.check, "shape");
}

std::vector<Scalar> zeros(std::size_t d) { return std::vector<Scalar>(d, Scalar(0ul)); }

TEST(SecureAgg, ThreeClientsSumToSix) {
  const GroupParams& s = standard();
  const std::vector<ClientId> ids = {1, 2, 3};
  const auto parties = make_parties(ids, 0, 1, s);
  AggregationRound round(s, 0, 1, RangeWindow{4, 0});
  for (const Party& p : parties) round.expect(p.id);
  for (const Party& p : parties) round.submit(honest_envelope({p.id}, p.mask, p.id));
  round.verify();
  EXPECT_EQ(round.accepted(), ids);
  const auto sum = round.aggregate(zeros(1));
  EXPECT_EQ(sum[0].value, 6);
}

TEST(SecureAgg, SingleClientGetsItsOwnUpdate) {
  const GroupParams& s = standard();
  const auto parties = make_parties({4}, 0, 2, s);
  EXPECT_EQ(parties[0].mask, zeros(2));
  AggregationRound round(s, 0, 2, RangeWindow{4, 0});
  round.expect(4);
  round.submit(honest_envelope({9, 2}, parties[0].mask, 4));
  round.verify();
  const auto sum = round.aggregate(zeros(2));
  EXPECT_EQ(sum[0].value, 9);
  EXPECT_EQ(sum[1].value, 2);
}

TEST(SecureAgg, TamperedPayloadAbortsOnConsistency) {
  const GroupParams& s = standard();
  const auto parties = make_parties({1, 2, 3}, 0, 1, s);
  AggregationRound round(s, 0, 1, RangeWindow{4, 0});
  for (const Party& p : parties) round.expect(p.id);
  for (const Party& p : parties) {
    ClientEnvelope env = honest_envelope({p.id}, p.mask, p.id);
    if (p.id == 2) env.masked.payload[0] = s.add(env.masked.payload[0], Scalar(1ul));
    round.submit(std::move(env));
  }
  round.verify();
  EXPECT_EQ(round.accepted().size(), 3u);  // payloads carry no proof of their own
  try {
    round.aggregate(zeros(1));
    FAIL() << "expected an abort";
  } catch (const ProtocolAbort& e) {
    EXPECT_EQ(e.check(), "consistency");
    EXPECT_EQ(e.coordinate(), 0);
  }
}

TEST(SecureAgg, WrongDecodingKeyAbortsOnMaskSum) {
  const GroupParams& s = standard();
  const auto parties = make_parties({1, 2}, 0, 1, s);
  AggregationRound round(s, 0, 1, RangeWindow{4, 0});
  for (const Party& p : parties) round.expect(p.id);
  for (const Party& p : parties) round.submit(honest_envelope({1}, p.mask, p.id));
  round.verify();
  const std::vector<Scalar> key = {Scalar(1ul)};
  try {
    round.aggregate(key);
    FAIL() << "expected an abort";
  } catch (const ProtocolAbort& e) {
    EXPECT_EQ(e.check(), "mask_sum");
  }
}

TEST(SecureAgg, PolicyRejectionRecoveredThroughDecodingKey) {
  const GroupParams& s = standard();
  const std::vector<ClientId> ids = {1, 2, 3, 4};
  const std::size_t d = 2;
  const auto parties = make_parties(ids, 3, d, s);
  AggregationRound round(s, 3, d, RangeWindow{4, 0});
  for (ClientId id : ids) round.expect(id);
  round.reject(2, Verdict::reject("norm", -1, "over bound"));
  for (const Party& p : parties) round.submit(honest_envelope({p.id, 2 * p.id}, p.mask, p.id, 3));
  round.verify();
  EXPECT_EQ(round.rejected(), std::vector<ClientId>{2});
  const auto key = testing::decoding_key_for(parties, {2}, d, s);
  const auto sum = round.aggregate(key);
  EXPECT_EQ(sum[0].value, 1 + 3 + 4);
  EXPECT_EQ(sum[1].value, 2 + 6 + 8);
}

TEST(SecureAgg, ForgedEnvelopeExcludedFromSum) {
  const GroupParams& s = standard();
  const std::vector<ClientId> ids = {1, 2, 3};
  const auto parties = make_parties(ids, 0, 1, s);
  AggregationRound round(s, 0, 1, RangeWindow{4, 0});
  for (ClientId id : ids) round.expect(id);
  for (const Party& p : parties) {
    ClientEnvelope env = honest_envelope({p.id}, p.mask, p.id);
    if (p.id == 3) env.proofs[0].bit_proofs[0].z0 = s.add(env.proofs[0].bit_proofs[0].z0, Scalar(1ul));
    round.submit(std::move(env));
  }
  round.verify(2);
  EXPECT_EQ(round.rejected(), std::vector<ClientId>{3});
  EXPECT_EQ(round.verdicts().at(3).check, "range");
  const auto key = testing::decoding_key_for(parties, {3}, 1, s);
  EXPECT_EQ(round.aggregate(key)[0].value, 3);
}

TEST(SecureAgg, MissingEnvelopeAbortsAndOrderingIsEnforced) {
  const GroupParams& s = standard();
  const auto parties = make_parties({1, 2}, 0, 1, s);
  AggregationRound round(s, 0, 1, RangeWindow{4, 0});
  round.expect(1);
  round.expect(2);
  EXPECT_THROW(round.aggregate(zeros(1)), ProtocolError);
  round.submit(honest_envelope({1}, parties[0].mask, 1));
  try {
    round.verify();
    FAIL() << "expected an abort";
  } catch (const ProtocolAbort& e) {
    EXPECT_EQ(e.check(), "missing");
  }
}

TEST(SecureAgg, WrongRoundEnvelopeRejected) {
  const GroupParams& s = standard();
  AggregationRound round(s, 5, 1, RangeWindow{4, 0});
  round.expect(1);
  round.submit(honest_envelope({1}, zeros(1), 1, 4));
  EXPECT_EQ(round.verify().at(1).check, "round");
}

TEST(SecureAgg, AggregateMatchesPlaintextSum) {
  // Commitments only; the aggregation checks do not look at the proofs.
  const GroupParams& s = standard();
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + gen() % 5, d = 1 + gen() % 4;
    std::vector<ClientId> ids;
    for (ClientId i = 0; i < n; ++i) ids.push_back(i + 1);
    const auto parties = make_parties(ids, static_cast<std::uint64_t>(trial), d, toy());
    // Reuse the toy seeds to derive standard-group masks.
    std::vector<ClientEnvelope> envs;
    std::vector<std::uint64_t> plain(d, 0);
    for (const Party& p : parties) {
      const MaskVector mask = compute_client_mask(p.id, ids, p.seeds, d, s);
      std::vector<std::uint64_t> u(d);
      for (auto& x : u) x = gen() % 65536;
      ClientEnvelope env;
      env.masked = mask_update(u, mask, p.id, 0, s);
      for (std::size_t k = 0; k < d; ++k) {
        env.commitments.push_back(commit(Scalar(static_cast<unsigned long>(u[k])), mask[k], s));
        plain[k] += u[k];
      }
      envs.push_back(std::move(env));
    }
    const auto sum = aggregate_round(envs, zeros(d), s);
    for (std::size_t k = 0; k < d; ++k) ASSERT_EQ(sum[k].value, static_cast<unsigned long>(plain[k]));
  }
}

TEST(SecureAgg, EnvelopeEncodingRoundTrip) {
  const ClientEnvelope env = honest_envelope({3, 5}, {Scalar(11ul), Scalar(12ul)});
  ByteWriter w;
  encode(w, env);
  ByteReader r(w.bytes());
  EXPECT_EQ(decode_envelope(r), env);
  EXPECT_TRUE(r.done());
}

TEST(SecureAgg, SingleBitFlipsAreCaught) {
  const GroupParams& s = standard();
  const RangeWindow window{2, 0};
  HashDrbg rng(2, "proof", 1, 0);
  const ClientEnvelope env = build_envelope(1, 0, std::vector<std::uint64_t>{2}, zeros(1), window,
                                            1.0, s, rng);
  ByteWriter w;
  encode(w, env);
  const Bytes clean = w.take();
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 200; ++trial) {
    Bytes bytes = clean;
    const std::size_t bit = gen() % (bytes.size() * 8);
    bytes[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    bool caught = false;
    try {
      ByteReader r(bytes);
      ClientEnvelope tampered = decode_envelope(r);
      if (!r.done()) throw DecodeError("trailing");
      AggregationRound round(s, 0, 1, window);
      round.expect(1);
      round.submit(std::move(tampered));
      caught = !round.verify().at(1).accepted;
      if (!caught) round.aggregate(zeros(1));
    } catch (const Error&) {
      caught = true;
    }
    ASSERT_TRUE(caught) << "bit " << bit;
  }
}

}  // namespace
}  // namespace rofl

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

#include "rofl/transcript.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>

#include "rofl/errors.h"

namespace rofl {
namespace {

void encode(ByteWriter& w, const Verdict& v) {
  w.u8(v.accepted ? 1 : 0);
  w.str(v.check);
  w.u64(static_cast<std::uint64_t>(static_cast<std::int64_t>(v.coordinate)));
  w.str(v.reason);
}

Verdict decode_verdict(ByteReader& r) {
  Verdict v;
  v.accepted = r.u8() != 0;
  v.check = r.str();
  v.coordinate = static_cast<long>(static_cast<std::int64_t>(r.u64()));
  v.reason = r.str();
  return v;
}

std::uint32_t checked_count(ByteReader& r) {
  const std::uint32_t n = r.u32();
  if (n > r.remaining()) throw DecodeError("element count exceeds input size");
  return n;
}

}  // namespace

Bytes serialize(const RoundTranscript& t) {
  ByteWriter w;
  for (char c : kTranscriptMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u32(t.version);
  w.str(t.group_id);
  w.str(t.proof_system);
  w.str(t.hash);
  w.u64(t.round);
  w.u64(t.dimension);
  w.u32(t.window.bits);
  w.u64(t.window.lower);
  w.f64(t.bound);
  w.f64(t.tolerance);
  w.u32(static_cast<std::uint32_t>(t.declared_norms.size()));
  for (const auto& [id, norm] : t.declared_norms) {
    w.u64(id);
    w.f64(norm);
  }
  w.u32(static_cast<std::uint32_t>(t.envelopes.size()));
  for (const auto& env : t.envelopes) encode(w, env);
  w.u32(static_cast<std::uint32_t>(t.verdicts.size()));
  for (const auto& [id, v] : t.verdicts) {
    w.u64(id);
    encode(w, v);
  }
  w.u32(static_cast<std::uint32_t>(t.decoding_key.size()));
  for (const auto& s : t.decoding_key) w.big(s.value);
  w.u8(t.aborted ? 1 : 0);
  w.str(t.abort_check);
  w.u64(static_cast<std::uint64_t>(static_cast<std::int64_t>(t.abort_coordinate)));
  w.u32(static_cast<std::uint32_t>(t.aggregate.size()));
  for (const auto& s : t.aggregate) w.big(s.value);
  return w.take();
}

RoundTranscript parse_transcript(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  for (char c : kTranscriptMagic) {
    if (r.u8() != static_cast<std::uint8_t>(c)) throw DecodeError("not a round transcript");
  }
  RoundTranscript t;
  t.version = r.u32();
  if (t.version != kTranscriptVersion) {
    throw DecodeError("unsupported transcript version " + std::to_string(t.version));
  }
  t.group_id = r.str();
  t.proof_system = r.str();
  t.hash = r.str();
  t.round = r.u64();
  t.dimension = r.u64();
  t.window.bits = r.u32();
  t.window.lower = r.u64();
  t.bound = r.f64();
  t.tolerance = r.f64();
  for (std::uint32_t n = checked_count(r), i = 0; i < n; ++i) {
    const ClientId id = r.u64();
    t.declared_norms.emplace_back(id, r.f64());
  }
  for (std::uint32_t n = checked_count(r), i = 0; i < n; ++i) t.envelopes.push_back(decode_envelope(r));
  for (std::uint32_t n = checked_count(r), i = 0; i < n; ++i) {
    const ClientId id = r.u64();
    t.verdicts.emplace_back(id, decode_verdict(r));
  }
  for (std::uint32_t n = checked_count(r), i = 0; i < n; ++i) t.decoding_key.emplace_back(r.big());
  t.aborted = r.u8() != 0;
  t.abort_check = r.str();
  t.abort_coordinate = static_cast<long>(static_cast<std::int64_t>(r.u64()));
  for (std::uint32_t n = checked_count(r), i = 0; i < n; ++i) t.aggregate.emplace_back(r.big());
  if (!r.done()) throw DecodeError("trailing bytes after transcript");
  return t;
}

void write_transcript(const RoundTranscript& t, const std::filesystem::path& path) {
  const Bytes bytes = serialize(t);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

RoundTranscript read_transcript(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_transcript(bytes);
}

TranscriptCheck reverify(const RoundTranscript& t) {
  if (t.proof_system != kRangeProofSystem || t.hash != "sha256") {
    throw ConfigError("transcript uses proof system '" + t.proof_system + "' / hash '" + t.hash +
                      "', which this build does not implement");
  }
  const GroupParams& params = group(parse_group_profile(t.group_id));
  TranscriptCheck check;

  std::map<ClientId, const ClientEnvelope*> by_id;
  for (const auto& env : t.envelopes) by_id[env.client()] = &env;

  AggregationRound round(params, t.round, static_cast<std::size_t>(t.dimension), t.window);
  for (const auto& [id, norm] : t.declared_norms) {
    round.expect(id);
    if (!(norm <= t.bound + t.tolerance) || !std::isfinite(norm)) {
      round.reject(id, Verdict::reject("norm", -1, "declared norm exceeds the bound"));
    }
  }
  for (const auto& [id, env] : by_id) {
    try {
      round.submit(*env);
    } catch (const ProtocolError&) {
      check.verdicts.emplace_back(id, Verdict::reject("round", -1, "unexpected participant"));
    }
  }
  try {
    for (const auto& [id, v] : round.verify()) check.verdicts.emplace_back(id, v);
    check.aggregate = round.aggregate(t.decoding_key);
  } catch (const ProtocolAbort& abort) {
    check.aborted = true;
    check.abort_check = abort.check();
    check.aggregate.clear();
    for (const auto& [id, v] : round.verdicts()) {
      if (std::none_of(check.verdicts.begin(), check.verdicts.end(),
                       [id = id](const auto& p) { return p.first == id; })) {
        check.verdicts.emplace_back(id, v);
      }
    }
  } catch (const ShapeError&) {
    check.aborted = true;
    check.abort_check = "shape";
    check.aggregate.clear();
  }
  std::sort(check.verdicts.begin(), check.verdicts.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  auto recorded = t.verdicts;
  std::sort(recorded.begin(), recorded.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  check.verdicts_match = recorded.size() == check.verdicts.size();
  for (std::size_t i = 0; check.verdicts_match && i < recorded.size(); ++i) {
    check.verdicts_match = recorded[i].first == check.verdicts[i].first &&
                           recorded[i].second.accepted == check.verdicts[i].second.accepted &&
                           recorded[i].second.check == check.verdicts[i].second.check &&
                           recorded[i].second.coordinate == check.verdicts[i].second.coordinate;
  }
  check.outcome_match = check.aborted == t.aborted &&
                        (!t.aborted || check.abort_check == t.abort_check) &&
                        check.aggregate == t.aggregate;
  return check;
}

}  // namespace rofl

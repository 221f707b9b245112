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

// Round transcripts: everything the server saw and decided in one
// cryptographic round, in a byte format an independent implementation can
// re-verify. See docs/transcript_format.md for the field-by-field layout.

#ifndef ROFL_TRANSCRIPT_H_
#define ROFL_TRANSCRIPT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "rofl/group.h"
#include "rofl/secure_agg.h"

namespace rofl {

inline constexpr std::uint32_t kTranscriptVersion = 1;
inline constexpr char kTranscriptMagic[4] = {'R', 'F', 'L', 'T'};

struct RoundTranscript {
  std::uint32_t version = kTranscriptVersion;
  std::string group_id;
  std::string proof_system = kRangeProofSystem;
  std::string hash = "sha256";
  std::uint64_t round = 0;
  std::uint64_t dimension = 0;
  RangeWindow window;
  double bound = 0.0;      // +inf when no norm bound applies
  double tolerance = 0.0;  // declared norms up to bound + tolerance pass
  std::vector<std::pair<ClientId, double>> declared_norms;  // every participant
  std::vector<ClientEnvelope> envelopes;                    // every submitted envelope
  std::vector<std::pair<ClientId, Verdict>> verdicts;
  std::vector<Scalar> decoding_key;
  bool aborted = false;
  std::string abort_check;
  long abort_coordinate = -1;
  std::vector<Scalar> aggregate;  // empty when aborted

  friend bool operator==(const RoundTranscript&, const RoundTranscript&) = default;
};

Bytes serialize(const RoundTranscript& t);
RoundTranscript parse_transcript(std::span<const std::uint8_t> bytes);

void write_transcript(const RoundTranscript& t, const std::filesystem::path& path);
RoundTranscript read_transcript(const std::filesystem::path& path);

struct TranscriptCheck {
  bool verdicts_match = false;
  bool outcome_match = false;  // same abort decision and same aggregate
  std::vector<std::pair<ClientId, Verdict>> verdicts;
  bool aborted = false;
  std::string abort_check;
  std::vector<Scalar> aggregate;

  bool ok() const { return verdicts_match && outcome_match; }
};

// Replays the policy check, every envelope verification and the
// aggregation from the recorded data alone.
TranscriptCheck reverify(const RoundTranscript& t);

}  // namespace rofl

#endif  // ROFL_TRANSCRIPT_H_

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

// rofl_lab command-line driver.
//
// Exit codes: 0 success, 2 configuration error, 3 protocol abort or failed
// transcript re-verification, 4 I/O error.

#include <cmath>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rofl/aggregators.h"
#include "rofl/attacks.h"
#include "rofl/config.h"
#include "rofl/errors.h"
#include "rofl/simulation.h"
#include "rofl/transcript.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitAbort = 3;
constexpr int kExitIo = 4;

rofl::ScenarioConfig load_with_overrides(const std::string& path, std::optional<std::uint64_t> seed,
                                         const std::string& mode) {
  rofl::ScenarioConfig c = rofl::load_config(path);
  if (seed) c.seed = *seed;
  if (!mode.empty()) c.mode = rofl::parse_mode(mode);
  c.validate();
  return c;
}

int cmd_run(const std::string& config, std::optional<std::uint64_t> seed, const std::string& out,
            const std::string& mode) {
  const rofl::ScenarioConfig c = load_with_overrides(config, seed, mode);
  const auto dir = rofl::resolve_output(out.empty() ? c.output.dir : out);
  const rofl::RunResult r = rofl::run_scenario(c, dir);
  std::cout << "rounds: " << r.records.size() << "\n";
  if (!r.records.empty()) {
    std::cout << "final main accuracy: " << r.records.back().main_accuracy << "\n";
    std::cout << "final backdoor accuracy: " << r.records.back().backdoor_accuracy << "\n";
  }
  std::cout << "checksum: " << r.final_checksum << "\n";
  std::cout << "output: " << dir.string() << "\n";
  if (r.stopped_on_abort) {
    std::cerr << "protocol abort in round " << r.records.back().round << " (" << r.records.back().abort_check
              << ")\n";
    return kExitAbort;
  }
  return kExitOk;
}

int cmd_verify(const std::string& path) {
  const rofl::RoundTranscript t = rofl::read_transcript(path);
  const rofl::TranscriptCheck check = rofl::reverify(t);
  std::cout << "round " << t.round << ", " << t.envelopes.size() << " envelopes, group " << t.group_id << "\n";
  for (const auto& [id, v] : check.verdicts) {
    std::cout << "  client " << id << ": " << (v.accepted ? "accepted" : "rejected (" + v.check + ")") << "\n";
  }
  std::cout << "verdicts " << (check.verdicts_match ? "match" : "DIFFER") << "; outcome "
            << (check.outcome_match ? "matches" : "DIFFERS") << "\n";
  return check.ok() ? kExitOk : kExitAbort;
}

std::vector<std::string> split_values(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = s.find(',', start);
    out.push_back(s.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Byzantine-robust federated learning lab"};
  app.require_subcommand(1);

  std::string config, out, mode, transcript, param, values;
  std::optional<std::uint64_t> seed;

  auto* run = app.add_subcommand("run", "Run one scenario");
  run->add_option("--config", config, "Scenario file")->required();
  run->add_option("--seed", seed, "Override the master seed");
  run->add_option("--out", out, "Output directory");
  run->add_option("--mode", mode, "plaintext or crypto")->check(CLI::IsMember({"plaintext", "crypto"}));

  auto* verify = app.add_subcommand("verify-transcript", "Re-verify a round transcript");
  verify->add_option("file", transcript, "Transcript file")->required();

  auto* sweep = app.add_subcommand("sweep", "Run a scenario once per parameter value");
  sweep->add_option("--config", config, "Scenario file")->required();
  sweep->add_option("--param", param, "Dotted key, e.g. aggregator.multiplier")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required();
  sweep->add_option("--out", out, "Output root");

  app.add_subcommand("list-aggregators", "List aggregation rules");
  app.add_subcommand("list-attacks", "List attack strategies");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed()) return cmd_run(config, seed, out, mode);
    if (verify->parsed()) return cmd_verify(transcript);
    if (sweep->parsed()) {
      const rofl::ScenarioConfig c = load_with_overrides(config, std::nullopt, "");
      const auto root = rofl::resolve_output(out.empty() ? c.output.dir : out);
      for (const auto& dir : rofl::run_sweep(c, param, split_values(values), root)) {
        std::cout << dir.string() << "\n";
      }
      return kExitOk;
    }
    if (app.got_subcommand("list-aggregators")) {
      for (const auto& n : rofl::aggregator_names()) std::cout << n << "\n";
      return kExitOk;
    }
    if (app.got_subcommand("list-attacks")) {
      for (const auto& n : rofl::strategy_names()) std::cout << n << "\n";
      return kExitOk;
    }
  } catch (const rofl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const rofl::ProtocolAbort& e) {
    std::cerr << "protocol abort: " << e.what() << "\n";
    return kExitAbort;
  } catch (const rofl::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const rofl::DecodeError& e) {
    std::cerr << "malformed input: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitOk;
}

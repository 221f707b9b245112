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


// Python bindings. Group elements and scalars cross the boundary as Python
// ints; parameter vectors as lists of floats.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cmath>
#include <string>
#include <vector>

#include "rofl/aggregators.h"
#include "rofl/attacks.h"
#include "rofl/commitment.h"
#include "rofl/config.h"
#include "rofl/errors.h"
#include "rofl/range_proof.h"
#include "rofl/simulation.h"
#include "rofl/transcript.h"
#include "rofl/vector_ops.h"

namespace py = pybind11;

namespace {

mpz_class to_mpz(const py::int_& v) { return mpz_class(py::str(v).cast<std::string>()); }

py::int_ to_py(const mpz_class& v) {
  return py::reinterpret_steal<py::int_>(PyLong_FromString(v.get_str().c_str(), nullptr, 10));
}

const rofl::GroupParams& group_of(const std::string& name) {
  return rofl::group(rofl::parse_group_profile(name));
}

using PyCommitment = std::pair<py::int_, py::int_>;

rofl::ExtendedCommitment from_py(const PyCommitment& c) {
  return {rofl::GroupElement(to_mpz(c.first)), rofl::GroupElement(to_mpz(c.second))};
}

PyCommitment to_py(const rofl::ExtendedCommitment& c) { return {to_py(c.c.value), to_py(c.mask_term.value)}; }

std::vector<rofl::ClientUpdate> updates_of(const std::vector<rofl::ParameterVector>& deltas) {
  std::vector<rofl::ClientUpdate> out;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    out.push_back({i, deltas[i], rofl::p_norm(deltas[i], rofl::Norm::kL2)});
  }
  return out;
}

py::bytes as_bytes(const rofl::Bytes& b) { return py::bytes(reinterpret_cast<const char*>(b.data()), b.size()); }

rofl::Bytes from_bytes(const py::bytes& b) {
  const std::string s = b;
  return rofl::Bytes(s.begin(), s.end());
}

py::dict record_dict(const rofl::RoundRecord& r) {
  py::dict d;
  d["round"] = r.round;
  d["mode"] = rofl::to_string(r.mode);
  d["sampled"] = r.sampled;
  d["malicious"] = r.malicious;
  d["fired"] = r.fired;
  d["declared_norms"] = r.declared_norms;
  d["bound"] = r.bound;
  d["median_norm"] = r.median_norm;
  d["accepted"] = r.accepted;
  d["rejected"] = r.rejected;
  d["weights"] = r.weights;
  d["aborted"] = r.aborted;
  d["abort_check"] = r.abort_check;
  d["main_accuracy"] = r.main_accuracy;
  d["backdoor_accuracy"] = r.backdoor_accuracy;
  d["wall_ms"] = r.wall_ms;
  d["checksum"] = r.checksum;
  return d;
}

py::dict result_dict(const rofl::RunResult& r) {
  py::list records;
  for (const auto& rec : r.records) records.append(record_dict(rec));
  py::dict d;
  d["records"] = records;
  d["final_model"] = r.final_model;
  d["final_checksum"] = r.final_checksum;
  d["aborted_rounds"] = r.aborted_rounds;
  d["stopped_on_abort"] = r.stopped_on_abort;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Byzantine-robust federated learning lab";

  auto base = py::register_exception<rofl::Error>(m, "Error");
  py::register_exception<rofl::ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<rofl::ShapeError>(m, "ShapeError", base.ptr());
  py::register_exception<rofl::PreconditionError>(m, "PreconditionError", base.ptr());
  auto protocol = py::register_exception<rofl::ProtocolError>(m, "ProtocolError", base.ptr());
  py::register_exception<rofl::ProtocolAbort>(m, "ProtocolAbort", protocol.ptr());
  py::register_exception<rofl::DecodeError>(m, "DecodeError", base.ptr());
  py::register_exception<rofl::IoError>(m, "IoError", base.ptr());

  // group-crypto
  m.def("group_order", [](const std::string& g) { return to_py(group_of(g).q()); }, py::arg("group") = "test");
  m.def("group_modulus", [](const std::string& g) { return to_py(group_of(g).p()); }, py::arg("group") = "test");
  m.def(
      "commit",
      [](const py::int_& v, const py::int_& r, const std::string& g) {
        const auto& params = group_of(g);
        return to_py(rofl::commit(params.scalar(to_mpz(v)), params.scalar(to_mpz(r)), params));
      },
      py::arg("value"), py::arg("blinding"), py::arg("group") = "test",
      "Returns (g^v h^r, g^r) mod p.");
  m.def(
      "add_commitments",
      [](const std::vector<PyCommitment>& cs, const std::string& g) {
        std::vector<rofl::ExtendedCommitment> v;
        for (const auto& c : cs) v.push_back(from_py(c));
        return to_py(rofl::add_commitments(v, group_of(g)));
      },
      py::arg("commitments"), py::arg("group") = "test");
  m.def(
      "verify_mask_sum",
      [](const std::vector<PyCommitment>& cs, const py::int_& key, const std::string& g) {
        std::vector<rofl::ExtendedCommitment> v;
        for (const auto& c : cs) v.push_back(from_py(c));
        const auto& params = group_of(g);
        return rofl::verify_mask_sum(v, params.scalar(to_mpz(key)), params);
      },
      py::arg("commitments"), py::arg("key"), py::arg("group") = "test");
  m.def(
      "prove_range",
      [](const py::int_& v, const py::int_& r, unsigned bits, const std::string& g, std::uint64_t seed,
         const py::bytes& context) {
        const auto& params = group_of(g);
        rofl::HashDrbg rng(seed, "python-prover", 0, 0);
        return as_bytes(rofl::serialize(rofl::prove_range(rofl::Scalar(to_mpz(v)), params.scalar(to_mpz(r)),
                                                          bits, params, rng, from_bytes(context))));
      },
      py::arg("value"), py::arg("blinding"), py::arg("bits"), py::arg("group") = "test", py::arg("seed") = 0,
      py::arg("context") = py::bytes());
  m.def(
      "verify_range",
      [](const PyCommitment& c, const py::bytes& proof, unsigned bits, const std::string& g,
         const py::bytes& context) {
        const rofl::Bytes raw = from_bytes(proof);
        return rofl::verify_range(from_py(c), rofl::parse_range_proof(raw), bits, group_of(g), from_bytes(context));
      },
      py::arg("commitment"), py::arg("proof"), py::arg("bits"), py::arg("group") = "test",
      py::arg("context") = py::bytes());

  // model-core vector helpers
  m.def(
      "p_norm", [](const rofl::ParameterVector& v, const std::string& p) { return rofl::p_norm(v, rofl::parse_norm(p)); },
      py::arg("v"), py::arg("norm") = "l2");
  m.def(
      "clip_to_norm",
      [](const rofl::ParameterVector& v, double bound, const std::string& p) {
        return rofl::clip_to_norm(v, bound, rofl::parse_norm(p));
      },
      py::arg("v"), py::arg("bound"), py::arg("norm") = "l2");
  m.def(
      "quantize",
      [](const rofl::ParameterVector& v, unsigned bits, double range) {
        return rofl::Quantizer(bits, range).quantize(v).values;
      },
      py::arg("v"), py::arg("bits"), py::arg("range"));
  m.def(
      "dequantize",
      [](const std::vector<std::uint64_t>& u, unsigned bits, double range) {
        return rofl::Quantizer(bits, range).dequantize(rofl::FixedVec{u, bits, range});
      },
      py::arg("values"), py::arg("bits"), py::arg("range"));

  // aggregators; client ids are list positions
  m.def("aggregator_names", &rofl::aggregator_names);
  m.def(
      "fedavg",
      [](const std::vector<rofl::ParameterVector>& u, const std::vector<double>& w) {
        return rofl::fedavg(updates_of(u), w);
      },
      py::arg("updates"), py::arg("weights") = std::vector<double>{});
  m.def(
      "dynamic_bound", [](const std::vector<double>& norms, double mult) { return rofl::dynamic_bound(norms, mult); },
      py::arg("norms"), py::arg("multiplier"));
  m.def(
      "krum_scores", [](const std::vector<rofl::ParameterVector>& u, std::size_t f) { return rofl::krum_scores(updates_of(u), f); },
      py::arg("updates"), py::arg("f"));
  m.def(
      "multi_krum",
      [](const std::vector<rofl::ParameterVector>& u, std::size_t f, std::size_t sel) {
        return rofl::multi_krum(updates_of(u), f, sel);
      },
      py::arg("updates"), py::arg("f"), py::arg("m"));
  m.def(
      "coord_median", [](const std::vector<rofl::ParameterVector>& u) { return rofl::coord_median(updates_of(u)); },
      py::arg("updates"));
  m.def(
      "trimmed_mean",
      [](const std::vector<rofl::ParameterVector>& u, double beta) { return rofl::trimmed_mean(updates_of(u), beta); },
      py::arg("updates"), py::arg("beta"));
  m.def(
      "foolsgold", [](const std::vector<rofl::ParameterVector>& h) { return rofl::foolsgold(h); },
      py::arg("histories"));

  // attacks
  m.def("strategy_names", &rofl::strategy_names);
  m.def(
      "scale_update", [](const rofl::ParameterVector& v, double gamma) { return rofl::scale_update(v, gamma); },
      py::arg("delta"), py::arg("gamma"));

  // sim-harness; scenarios are JSON text in the CLI config format
  m.def(
      "normalize_config", [](const std::string& text) { return rofl::dump_config(rofl::parse_config(text)); },
      py::arg("config"), "Validates a scenario and returns it with every default filled in.");
  m.def(
      "simulate",
      [](const std::string& text) {
        const rofl::ScenarioConfig c = rofl::parse_config(text);
        rofl::RunResult r;
        {
          py::gil_scoped_release release;
          r = rofl::simulate(c);
        }
        return result_dict(r);
      },
      py::arg("config"));
  m.def(
      "run_scenario",
      [](const std::string& text, const std::filesystem::path& out) {
        const rofl::ScenarioConfig c = rofl::parse_config(text);
        rofl::RunResult r;
        {
          py::gil_scoped_release release;
          r = rofl::run_scenario(c, out);
        }
        return result_dict(r);
      },
      py::arg("config"), py::arg("out_dir"));
  m.def(
      "verify_transcript",
      [](const std::filesystem::path& path) {
        const auto check = rofl::reverify(rofl::read_transcript(path));
        py::dict d;
        d["ok"] = check.ok();
        d["verdicts_match"] = check.verdicts_match;
        d["outcome_match"] = check.outcome_match;
        d["aborted"] = check.aborted;
        py::list agg;
        for (const auto& s : check.aggregate) agg.append(to_py(s.value));
        d["aggregate"] = agg;
        return d;
      },
      py::arg("path"));
}

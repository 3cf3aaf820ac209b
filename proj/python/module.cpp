// Copyright 2026 The tgbranch authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "tgbranch/evalx.hpp"
#include "tgbranch/ppo.hpp"
#include "tgbranch/tune.hpp"

namespace py = pybind11;

namespace {

tgb::GeneratorFamily family_from_name(const std::string& name) {
  if (name == "set_cover") return tgb::GeneratorFamily::kSetCover;
  if (name == "multi_knapsack") return tgb::GeneratorFamily::kMultiKnapsack;
  if (name == "mixed_random") return tgb::GeneratorFamily::kMixedRandom;
  throw tgb::Error("UNKNOWN_FAMILY", name);
}

tgb::MilpInstance normalized(const tgb::MilpInstance& inst) {
  tgb::ValidationResult vr = tgb::validate_instance(inst);
  if (!vr.normalized) {
    std::string joined;
    for (const std::string& e : vr.errors) joined += e + " ";
    throw tgb::Error("INVALID_INSTANCE", joined);
  }
  return *vr.normalized;
}

}  // namespace

PYBIND11_MODULE(_tgbranch, m) {
  m.doc() = "branch-and-bound MILP solver with learned branching policies";

  py::register_exception<tgb::Error>(m, "TgbError", PyExc_RuntimeError);

  py::class_<tgb::MilpInstance>(m, "MilpInstance")
      .def(py::init<>())
      .def_readwrite("name", &tgb::MilpInstance::name)
      .def_readonly("num_vars", &tgb::MilpInstance::num_vars)
      .def_readonly("num_cons", &tgb::MilpInstance::num_cons)
      .def_readonly("objective", &tgb::MilpInstance::objective)
      .def_readonly("rhs", &tgb::MilpInstance::rhs)
      .def_readonly("lower_bounds", &tgb::MilpInstance::lower_bounds)
      .def_readonly("upper_bounds", &tgb::MilpInstance::upper_bounds)
      .def_readonly("is_integer", &tgb::MilpInstance::is_integer)
      .def("__eq__",
           [](const tgb::MilpInstance& a, const tgb::MilpInstance& b) {
             return a == b;
           })
      .def("__repr__", [](const tgb::MilpInstance& inst) {
        return "<MilpInstance '" + inst.name + "' " +
               std::to_string(inst.num_vars) + " vars, " +
               std::to_string(inst.num_cons) + " rows>";
      });

  m.def("parse_instance", &tgb::parse_instance, py::arg("text"));
  m.def("serialize_instance", &tgb::serialize_instance, py::arg("instance"));
  m.def("parse_mps", &tgb::parse_mps, py::arg("text"));
  m.def(
      "generate_instance",
      [](const std::string& family, int rows, int cols, double density,
         std::uint64_t seed) {
        tgb::GeneratorParams p;
        p.family = family_from_name(family);
        p.rows = rows;
        p.cols = cols;
        p.density = density;
        p.seed = seed;
        return tgb::generate_instance(p);
      },
      py::arg("family"), py::arg("rows"), py::arg("cols"), py::arg("density"),
      py::arg("seed") = 0);

  m.def(
      "brute_force_solve",
      [](const tgb::MilpInstance& inst) {
        tgb::BruteForceResult r = tgb::brute_force_solve(normalized(inst));
        const char* status =
            r.status == tgb::BruteForceStatus::kOptimal      ? "OPTIMAL"
            : r.status == tgb::BruteForceStatus::kInfeasible ? "INFEASIBLE"
                                                             : "LIMIT";
        return py::make_tuple(status, r.objective, r.solution);
      },
      py::arg("instance"));

  m.def(
      "solve",
      [](const tgb::MilpInstance& inst, const std::string& policy,
         std::optional<double> cutoff, std::int64_t node_budget,
         std::uint64_t seed) {
        tgb::RunConfig cfg;
        cfg.cutoff = cutoff;
        cfg.node_budget = node_budget;
        cfg.decision_budget = node_budget;
        cfg.seed = seed;
        auto p = tgb::make_baseline_policy(policy, seed);
        tgb::RunStats stats = tgb::run_bnb(normalized(inst), *p, cfg);
        py::dict out;
        out["status"] = tgb::run_status_name(stats.status);
        out["nodes"] = stats.nodes_explored;
        out["pdi"] = stats.pdi;
        out["dual_bound"] = stats.dual_bound;
        out["best_objective"] = stats.best_objective;
        return out;
      },
      py::arg("instance"), py::arg("policy") = "relpscost",
      py::arg("cutoff") = py::none(), py::arg("node_budget") = 100000,
      py::arg("seed") = 0);

  m.def("baseline_policy_names", &tgb::baseline_policy_names);

  m.def("sgm", &tgb::sgm, py::arg("values"), py::arg("shift"));
  m.def("sgm_nodes", &tgb::sgm_nodes, py::arg("values"));
  m.def("sgm_pdi", &tgb::sgm_pdi, py::arg("values"));
  m.def("composite_score", &tgb::composite_score, py::arg("node_values"),
        py::arg("pdi_values"));

  m.def(
      "friedman",
      [](const std::vector<std::vector<double>>& ranks) {
        tgb::FriedmanResult r = tgb::friedman(ranks);
        return py::make_tuple(r.chi2, r.df, r.p, r.mean_ranks);
      },
      py::arg("ranks"));
  m.def("chi2_survival", &tgb::chi2_survival, py::arg("x"), py::arg("df"));
  m.def(
      "wilcoxon_signed_rank",
      [](const std::vector<double>& diffs) {
        tgb::WilcoxonResult r = tgb::wilcoxon_signed_rank(diffs);
        return py::make_tuple(r.w, r.p, r.n, r.exact);
      },
      py::arg("diffs"));

  m.def(
      "make_report",
      [](const std::string& results_csv_text, const std::string& learned) {
        return tgb::make_report(tgb::parse_results_csv(results_csv_text),
                                learned);
      },
      py::arg("results_csv"), py::arg("learned") = "tgppo");

  m.attr("CANDIDATE_FEATURE_DIM") = tgb::kCandidateFeatureDim;
  m.attr("NODE_FEATURE_DIM") = tgb::kNodeFeatureDim;
  m.attr("TREE_FEATURE_DIM") = tgb::kTreeFeatureDim;
  m.attr("FEATURE_SCHEMA_VERSION") = tgb::kFeatureSchemaVersion;
}

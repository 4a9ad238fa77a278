// Copyright 2026 The privmkt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "privmkt/closed_form.hpp"
#include "privmkt/market.hpp"
#include "privmkt/numeric.hpp"
#include "privmkt/oracle.hpp"

namespace py = pybind11;
using namespace privmkt;

PYBIND11_MODULE(_privmkt, m) {
  m.doc() = "Equilibrium solver for privacy-differentiated free services";

  py::register_exception<SolverError>(m, "SolverError");
  py::register_exception<InvalidParameter>(m, "InvalidParameter");
  py::register_exception<DegenerateDifferentiation>(m,
                                                    "DegenerateDifferentiation");
  py::register_exception<SingularSystem>(m, "SingularSystem");
  py::register_exception<EmptyDomain>(m, "EmptyDomain");
  py::register_exception<NonConvergence>(m, "NonConvergence");
  py::register_exception<NotAnEquilibrium>(m, "NotAnEquilibrium");

  py::class_<MarketParams>(m, "MarketParams")
      .def(py::init([](double c, double lam, double r, double t, double eps_bar,
                       std::vector<double> p) {
             MarketParams mp{c, lam, r, t, eps_bar, std::move(p)};
             mp.validate();
             return mp;
           }),
           py::arg("c"), py::arg("lam"), py::arg("r"), py::arg("t"),
           py::arg("eps_bar"), py::arg("p"))
      .def_readwrite("c", &MarketParams::c)
      .def_readwrite("lam", &MarketParams::lam)
      .def_readwrite("r", &MarketParams::r)
      .def_readwrite("t", &MarketParams::t)
      .def_readwrite("eps_bar", &MarketParams::eps_bar)
      .def_readwrite("p", &MarketParams::p)
      .def("alpha", &MarketParams::alpha)
      .def("c_tilde", &MarketParams::c_tilde)
      .def("gap_min", &MarketParams::gap_min)
      .def("validate", &MarketParams::validate)
      .def("__repr__", [](const MarketParams& p) {
        std::ostringstream os;
        os << "MarketParams(c=" << p.c << ", lam=" << p.lam << ", r=" << p.r
           << ", t=" << p.t << ", eps_bar=" << p.eps_bar << ", p=[";
        for (size_t i = 0; i < p.p.size(); ++i)
          os << (i ? ", " : "") << p.p[i];
        os << "])";
        return os.str();
      });

  py::enum_<DistributionKind>(m, "DistributionKind")
      .value("UNIFORM", DistributionKind::Uniform)
      .value("TRUNCATED_NORMAL", DistributionKind::TruncatedNormal);

  py::class_<RiskDistribution>(m, "RiskDistribution")
      .def_static("uniform", &RiskDistribution::uniform, py::arg("eps_bar"))
      .def_static("truncated_normal", &RiskDistribution::truncated_normal,
                  py::arg("eps_bar"), py::arg("sigma"))
      .def_readonly("kind", &RiskDistribution::kind)
      .def_readonly("eps_bar", &RiskDistribution::eps_bar)
      .def_readonly("sigma", &RiskDistribution::sigma);

  py::class_<SPStrategy>(m, "SPStrategy")
      .def(py::init<double, double>(), py::arg("eps"), py::arg("v"))
      .def_readwrite("eps", &SPStrategy::eps)
      .def_readwrite("v", &SPStrategy::v)
      .def("__repr__", [](const SPStrategy& s) {
        std::ostringstream os;
        os << "SPStrategy(eps=" << s.eps << ", v=" << s.v << ")";
        return os.str();
      });

  py::class_<Threshold>(m, "Threshold")
      .def_readonly("x", &Threshold::x)
      .def_readonly("clamped", &Threshold::clamped);

  py::class_<ShareResult>(m, "ShareResult")
      .def_readonly("shares", &ShareResult::shares)
      .def_readonly("thresholds", &ShareResult::thresholds)
      .def_readonly("order", &ShareResult::order)
      .def_readonly("clamped", &ShareResult::clamped);

  py::class_<BandCheck>(m, "BandCheck")
      .def_readonly("ok", &BandCheck::ok)
      .def_readonly("lower_margin", &BandCheck::lower_margin)
      .def_readonly("upper_margin", &BandCheck::upper_margin);

  py::class_<MarginCheck>(m, "MarginCheck")
      .def_readonly("ok", &MarginCheck::ok)
      .def_readonly("margin", &MarginCheck::margin);

  py::class_<FeasibilityReport>(m, "FeasibilityReport")
      .def_readonly("cond_share", &FeasibilityReport::cond_share)
      .def_readonly("cond_eps", &FeasibilityReport::cond_eps)
      .def_readonly("cond_coverage", &FeasibilityReport::cond_coverage)
      .def_readonly("ratio", &FeasibilityReport::ratio)
      .def_readonly("all_feasible", &FeasibilityReport::all_feasible);

  py::class_<ClosedFormSolution>(m, "ClosedFormSolution")
      .def_readonly("eps1", &ClosedFormSolution::eps1)
      .def_readonly("eps2", &ClosedFormSolution::eps2)
      .def_readonly("v1", &ClosedFormSolution::v1)
      .def_readonly("v2", &ClosedFormSolution::v2)
      .def_readonly("x_tau", &ClosedFormSolution::x_tau)
      .def_readonly("pi1", &ClosedFormSolution::pi1)
      .def_readonly("pi2", &ClosedFormSolution::pi2)
      .def_readonly("alpha", &ClosedFormSolution::alpha)
      .def_readonly("c_tilde", &ClosedFormSolution::c_tilde)
      .def_readonly("feasibility", &ClosedFormSolution::feasibility);

  py::enum_<SolveMethod>(m, "SolveMethod")
      .value("CLOSED_FORM", SolveMethod::ClosedForm)
      .value("NUMERIC", SolveMethod::Numeric);

  py::enum_<Termination>(m, "Termination")
      .value("CONVERGED", Termination::Converged)
      .value("OSCILLATING", Termination::Oscillating)
      .value("MAX_ITERS", Termination::MaxIters);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("eps_tol", &SolverConfig::eps_tol)
      .def_readwrite("max_iters", &SolverConfig::max_iters)
      .def_readwrite("br_grid", &SolverConfig::br_grid)
      .def_readwrite("br_refine_tol", &SolverConfig::br_refine_tol)
      .def_readwrite("cycle_window", &SolverConfig::cycle_window)
      .def_readwrite("gap_min", &SolverConfig::gap_min)
      .def_readwrite("damping", &SolverConfig::damping)
      .def_readwrite("initial_eps", &SolverConfig::initial_eps);

  py::class_<Stage2System>(m, "Stage2System")
      .def_readonly("delta", &Stage2System::delta)
      .def_readonly("y", &Stage2System::y)
      .def_readonly("sub", &Stage2System::sub)
      .def_readonly("diag", &Stage2System::diag)
      .def_readonly("super", &Stage2System::super)
      .def_readonly("rhs", &Stage2System::rhs);

  py::class_<IterationRecord>(m, "IterationRecord")
      .def_readonly("eps", &IterationRecord::eps)
      .def_readonly("v", &IterationRecord::v)
      .def_readonly("profit", &IterationRecord::profit);

  py::class_<BestResponseTrace>(m, "BestResponseTrace")
      .def_readonly("rounds", &BestResponseTrace::rounds)
      .def_readonly("termination", &BestResponseTrace::termination)
      .def_readonly("cycle_length", &BestResponseTrace::cycle_length);

  py::class_<EquilibriumOutcome>(m, "EquilibriumOutcome")
      .def_readonly("profile", &EquilibriumOutcome::profile)
      .def_readonly("shares", &EquilibriumOutcome::shares)
      .def_readonly("profits", &EquilibriumOutcome::profits)
      .def_readonly("thresholds", &EquilibriumOutcome::thresholds)
      .def_readonly("method", &EquilibriumOutcome::method)
      .def_readonly("converged", &EquilibriumOutcome::converged)
      .def_readonly("iterations", &EquilibriumOutcome::iterations)
      .def_readonly("feasibility", &EquilibriumOutcome::feasibility);

  py::class_<IbrResult>(m, "IbrResult")
      .def_readonly("outcome", &IbrResult::outcome)
      .def_readonly("trace", &IbrResult::trace);

  py::class_<GridSpec>(m, "GridSpec")
      .def(py::init<>())
      .def(py::init([](int eps_points, int v_points) {
             return GridSpec{eps_points, v_points};
           }),
           py::arg("eps_points"), py::arg("v_points"))
      .def_readwrite("eps_points", &GridSpec::eps_points)
      .def_readwrite("v_points", &GridSpec::v_points);

  py::class_<GridBestResponse>(m, "GridBestResponse")
      .def_readonly("strategy", &GridBestResponse::strategy)
      .def_readonly("profit", &GridBestResponse::profit);

  py::class_<BruteForceStage2Result>(m, "BruteForceStage2Result")
      .def_readonly("v", &BruteForceStage2Result::v)
      .def_readonly("rounds", &BruteForceStage2Result::rounds);

  py::class_<DeviationCheck>(m, "DeviationCheck")
      .def_readonly("sp", &DeviationCheck::sp)
      .def_readonly("best", &DeviationCheck::best)
      .def_readonly("best_profit", &DeviationCheck::best_profit)
      .def_readonly("claimed_profit", &DeviationCheck::claimed_profit)
      .def_readonly("delta", &DeviationCheck::delta);

  py::class_<Certificate>(m, "Certificate")
      .def_readonly("grid", &Certificate::grid)
      .def_readonly("cert_tol", &Certificate::cert_tol)
      .def_readonly("deviations", &Certificate::deviations)
      .def_readonly("max_delta", &Certificate::max_delta)
      .def_readonly("certified", &Certificate::certified);

  // Stage-3 primitives.
  m.def("cdf", &cdf, py::arg("dist"), py::arg("eps"));
  m.def("inverse_cdf", &inverse_cdf, py::arg("dist"), py::arg("q"));
  m.def("consumer_utility", &consumer_utility, py::arg("params"),
        py::arg("dist"), py::arg("strategy"), py::arg("x"));
  m.def("indifference_threshold", &indifference_threshold, py::arg("params"),
        py::arg("dist"), py::arg("low"), py::arg("high"));
  m.def("market_shares", &market_shares, py::arg("params"), py::arg("dist"),
        py::arg("profile"));
  m.def("sp_margin", &sp_margin, py::arg("params"), py::arg("i"),
        py::arg("strategy"));
  m.def("sp_profit", &sp_profit, py::arg("params"), py::arg("dist"),
        py::arg("profile"), py::arg("i"));
  m.def("sp_profits", &sp_profits, py::arg("params"), py::arg("dist"),
        py::arg("profile"));

  // Closed form.
  m.def("derived_constants", &derived_constants, py::arg("params"));
  m.def("check_feasibility", &check_feasibility, py::arg("params"));
  m.def("solve_closed_form", &solve_closed_form, py::arg("params"));
  m.def("stage2_qos", &stage2_qos, py::arg("params"), py::arg("eps1"),
        py::arg("eps2"));
  m.def("stage1_profits", &stage1_profits, py::arg("params"), py::arg("eps1"),
        py::arg("eps2"));
  m.def("stage1_foc_residuals", &stage1_foc_residuals, py::arg("params"),
        py::arg("eps1"), py::arg("eps2"));

  // Numeric solver.
  m.def(
      "build_stage2_system",
      [](const MarketParams& p, const RiskDistribution& d,
         const std::vector<double>& eps, const std::vector<double>& ps) {
        return build_stage2_system(p, d, eps, ps);
      },
      py::arg("params"), py::arg("dist"), py::arg("eps_sorted"),
      py::arg("p_sorted"));
  m.def(
      "stage2_solve",
      [](const MarketParams& p, const RiskDistribution& d,
         const std::vector<double>& eps) { return stage2_solve(p, d, eps); },
      py::arg("params"), py::arg("dist"), py::arg("eps_sorted"));
  m.def(
      "stage2_qos_profile",
      [](const MarketParams& p, const RiskDistribution& d,
         const std::vector<double>& eps) {
        return stage2_qos_profile(p, d, eps);
      },
      py::arg("params"), py::arg("dist"), py::arg("eps"));
  m.def(
      "best_response_eps",
      [](const MarketParams& p, const RiskDistribution& d, int i,
         const std::vector<double>& eps, const SolverConfig& cfg) {
        return best_response_eps(p, d, i, eps, cfg);
      },
      py::arg("params"), py::arg("dist"), py::arg("i"), py::arg("eps"),
      py::arg("config") = SolverConfig{});
  py::class_<CertifiedOutcome>(m, "CertifiedOutcome")
      .def_readonly("outcome", &CertifiedOutcome::outcome)
      .def_readonly("certificate", &CertifiedOutcome::certificate);

  m.def("iterate_best_response", &iterate_best_response, py::arg("params"),
        py::arg("dist"), py::arg("config") = SolverConfig{});
  m.def("solve_spne", &solve_spne, py::arg("params"), py::arg("dist"),
        py::arg("config") = SolverConfig{});
  m.def("solve_spne_certified", &solve_spne_certified, py::arg("params"),
        py::arg("dist"), py::arg("config") = SolverConfig{},
        py::arg("grid") = GridSpec{}, py::arg("cert_tol") = 1e-3);
  m.def("evaluate_outcome", &evaluate_outcome, py::arg("params"),
        py::arg("dist"), py::arg("profile"));

  // Brute-force oracle.
  m.def("oracle_v_max", &oracle_v_max, py::arg("params"));
  m.def("grid_best_response", &grid_best_response, py::arg("params"),
        py::arg("dist"), py::arg("i"), py::arg("profile"), py::arg("grid"));
  m.def("one_shot_best_response", &one_shot_best_response, py::arg("params"),
        py::arg("dist"), py::arg("i"), py::arg("profile"), py::arg("grid"));
  m.def(
      "brute_force_stage2",
      [](const MarketParams& p, const RiskDistribution& d,
         const std::vector<double>& eps, int v_points,
         const std::vector<double>& v_start, int max_rounds) {
        return brute_force_stage2(p, d, eps, v_points, v_start, max_rounds);
      },
      py::arg("params"), py::arg("dist"), py::arg("eps_sorted"),
      py::arg("v_points"), py::arg("v_start") = std::vector<double>{},
      py::arg("max_rounds") = 200);
  m.def(
      "refine_stage2_qos",
      [](const MarketParams& p, const RiskDistribution& d,
         const std::vector<double>& eps, const std::vector<double>& v_start,
         double tol, int max_rounds) {
        return refine_stage2_qos(p, d, eps, v_start, tol, max_rounds);
      },
      py::arg("params"), py::arg("dist"), py::arg("eps_sorted"),
      py::arg("v_start"), py::arg("tol") = 1e-9, py::arg("max_rounds") = 200);
  m.def("certify", &certify, py::arg("params"), py::arg("dist"),
        py::arg("profile"), py::arg("grid"), py::arg("cert_tol"));
}

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

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "privmkt/closed_form.hpp"
#include "privmkt/market.hpp"
#include "privmkt/oracle.hpp"

namespace privmkt {

// Numerical equilibrium computation by backward induction for any tolerance
// distribution and m >= 2 providers: the stage-2 QoS equilibrium is a
// tridiagonal linear solve; the stage-1 risks come from iterated best
// response with convergence and oscillation detection.

struct SolverConfig {
  double eps_tol = 0.0;       // <= 0: defaults to 1e-6 * eps_bar
  int max_iters = 200;        // best-response rounds
  int br_grid = 512;          // coarse grid points of the 1-D risk search
  double br_refine_tol = 1e-8;  // golden-section interval tolerance
  int cycle_window = 50;      // profile history length for cycle detection
  double gap_min = 0.0;       // <= 0: defaults to 1e-6 * eps_bar
  double damping = 0.0;       // 0 = plain best-response updates
  std::vector<double> initial_eps;  // empty: midpoints (2i-1) eps_bar / 2m

  double resolved_eps_tol(const MarketParams& p) const {
    return eps_tol > 0.0 ? eps_tol : 1e-6 * p.eps_bar;
  }
  double resolved_gap_min(const MarketParams& p) const {
    return gap_min > 0.0 ? gap_min : p.gap_min();
  }
  std::vector<double> resolved_initial_eps(const MarketParams& p) const;
  void validate() const;
};

enum class SolveMethod { ClosedForm, Numeric };
enum class Termination { Converged, Oscillating, MaxIters };

const char* to_string(SolveMethod m);
const char* to_string(Termination t);

// The stage-2 first-order conditions as a tridiagonal system in the sorted
// QoS vector: diag[i]*v[i] + super[i]*v[i+1] + sub[i]*v[i-1] = rhs[i].
struct Stage2System {
  std::vector<double> delta;  // 1 / (t * (eps_{k+1} - eps_k)), all > 0
  std::vector<double> y;      // first-order-condition right-hand sides
  std::vector<double> sub, diag, super, rhs;
};

// State of one best-response round: risks, stage-2 QoS, and profits by
// provider identity.
struct IterationRecord {
  std::vector<double> eps, v, profit;
};

struct BestResponseTrace {
  std::vector<IterationRecord> rounds;
  Termination termination = Termination::MaxIters;
  int cycle_length = 0;  // set when termination == Oscillating
};

struct EquilibriumOutcome {
  StrategyProfile profile;          // by provider identity
  std::vector<double> shares;       // by provider identity, sum to 1
  std::vector<double> profits;      // by provider identity
  std::vector<double> thresholds;   // m-1 nondecreasing splits in [0,1]
  SolveMethod method = SolveMethod::Numeric;
  bool converged = false;
  int iterations = 0;
  // Closed-form existence check; populated for two-provider uniform inputs.
  std::optional<FeasibilityReport> feasibility;
};

// Builds the stage-2 system for risks sorted ascending with gaps >= gap_min
// and risk-independent revenues aligned to that order.
Stage2System build_stage2_system(const MarketParams& params,
                                 const RiskDistribution& dist,
                                 std::span<const double> eps_sorted,
                                 std::span<const double> p_sorted);

// Solves the stage-2 QoS equilibrium exactly for sorted risks; params.p is
// taken positionally (entry k belongs to the k-th lowest-risk provider).
std::vector<double> stage2_solve(const MarketParams& params,
                                 const RiskDistribution& dist,
                                 std::span<const double> eps_sorted);

// Stage-2 QoS for a risk vector in identity order (any ordering); sorts,
// solves, and maps the QoS back to identities.
std::vector<double> stage2_qos_profile(const MarketParams& params,
                                       const RiskDistribution& dist,
                                       std::span<const double> eps);

// True when every entry of a stage-2 solution is a feasible (non-negative)
// QoS level.
bool stage2_qos_feasible(std::span<const double> v);

// Profit-maximizing risk for provider i against fixed opponent risks, the
// stage-2 QoS re-equilibrating at every candidate. Candidates cover
// [0, eps_bar] minus gap_min neighborhoods of the opponents; the profile is
// re-sorted per candidate, so overtaking an opponent is allowed. Candidates
// whose stage-2 solution has negative QoS rank as -infinity.
double best_response_eps(const MarketParams& params, const RiskDistribution& dist,
                         int i, std::span<const double> eps,
                         const SolverConfig& cfg);

struct IbrResult {
  EquilibriumOutcome outcome;
  BestResponseTrace trace;
};

// Round-robin best-response iteration over provider risks (fixed index
// order), stage-2 QoS refreshed after each round. Terminates Converged when
// a full round moves no risk by eps_tol or more; otherwise runs to max_iters
// and reports Oscillating when some earlier profile in the history window
// recurred (cycle length attached), MaxIters otherwise.
IbrResult iterate_best_response(const MarketParams& params,
                                const RiskDistribution& dist,
                                const SolverConfig& cfg = {});

// Dispatcher: two providers + uniform tolerance + feasible parameters use
// the closed form; everything else runs the iterated solver. Both paths
// populate the same outcome structure.
EquilibriumOutcome solve_spne(const MarketParams& params,
                              const RiskDistribution& dist,
                              const SolverConfig& cfg = {});

// Builds the outcome record (shares, profits, thresholds) for a profile in
// identity order.
EquilibriumOutcome evaluate_outcome(const MarketParams& params,
                                    const RiskDistribution& dist,
                                    const StrategyProfile& profile);

struct CertifiedOutcome {
  EquilibriumOutcome outcome;
  Certificate certificate;
};

// solve_spne followed by an independent brute-force deviation check.
// Throws NotAnEquilibrium when the certificate fails, with the offending
// provider and delta in the message.
CertifiedOutcome solve_spne_certified(const MarketParams& params,
                                      const RiskDistribution& dist,
                                      const SolverConfig& cfg = {},
                                      const GridSpec& grid = {},
                                      double cert_tol = 1e-3);

}  // namespace privmkt

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

#include <utility>

#include "privmkt/market.hpp"

namespace privmkt {

// Exact two-provider equilibrium under uniformly distributed consumer
// tolerance. Provider 2 is, by the caller's labeling, the high-risk /
// high-QoS player; the solver never reorders p.

struct BandCheck {
  bool ok = false;
  double lower_margin = 0.0;  // value - lower bound
  double upper_margin = 0.0;  // upper bound - value
};

struct MarginCheck {
  bool ok = false;
  double margin = 0.0;  // slack of the inequality; >= 0 when satisfied
};

// The three sufficient conditions for the closed-form equilibrium to exist:
// both market segments nonempty, risks inside [0, eps_bar], and full market
// coverage. `ratio` is the common quantity 16(p2-p1)/(9 c t eps_bar).
struct FeasibilityReport {
  BandCheck cond_share;
  BandCheck cond_eps;
  MarginCheck cond_coverage;
  double ratio = 0.0;
  bool all_feasible = false;
};

struct ClosedFormSolution {
  double eps1 = 0.0, eps2 = 0.0;
  double v1 = 0.0, v2 = 0.0;
  double x_tau = 0.0;
  double pi1 = 0.0, pi2 = 0.0;
  double alpha = 0.0, c_tilde = 0.0;
  FeasibilityReport feasibility;
};

// (alpha, c_tilde) = (r/c - lambda, c*t*eps_bar).
std::pair<double, double> derived_constants(const MarketParams& params);

// Evaluates the three existence conditions with signed margins. Requires
// exactly two providers.
FeasibilityReport check_feasibility(const MarketParams& params);

// The closed-form equilibrium strategies, split, and profits. Infeasible
// parameters still produce the algebraic solution, with
// feasibility.all_feasible == false, so sweeps can chart the boundary.
ClosedFormSolution solve_closed_form(const MarketParams& params);

// Stage-2 equilibrium QoS pair for fixed risks eps1 < eps2 (uniform
// tolerance). Each value is simultaneously the provider's best response to
// the other.
std::pair<double, double> stage2_qos(const MarketParams& params, double eps1,
                                     double eps2);

// Stage-1 reduced profits: profits at fixed risks with stage-2 QoS already
// substituted, as functions of the risks alone.
std::pair<double, double> stage1_profits(const MarketParams& params, double eps1,
                                         double eps2);

// Left-hand sides of the two non-dominated stage-1 first-order conditions;
// both vanish at the equilibrium risks.
std::pair<double, double> stage1_foc_residuals(const MarketParams& params,
                                               double eps1, double eps2);

}  // namespace privmkt

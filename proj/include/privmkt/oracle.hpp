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

#include <span>
#include <vector>

#include "privmkt/market.hpp"

namespace privmkt {

// Brute-force verification layer. Everything here is built on the market
// primitives alone -- no reuse of the closed form or the tridiagonal solver
// -- so a certificate is an independent check of a claimed equilibrium.

struct GridSpec {
  int eps_points = 400;
  int v_points = 400;
};

// QoS level above which the per-consumer margin is non-positive for any
// risk; no rational provider exceeds it, so it bounds the search grid.
double oracle_v_max(const MarketParams& params);

struct GridBestResponse {
  SPStrategy strategy;
  double profit = 0.0;
};

struct BruteForceStage2Result {
  std::vector<double> v;  // sorted order, aligned with eps
  int rounds = 0;         // grid sweeps until the fixed point
};

// Iterated grid best responses in QoS at fixed sorted risks until no
// provider's grid choice changes, on the linear-split subgame payoff (raw
// segment lengths), whose QoS equilibrium is unique. p is taken positionally
// from params. Throws NonConvergence when the iteration cycles on grid ties
// or exhausts max_rounds.
BruteForceStage2Result brute_force_stage2(const MarketParams& params,
                                          const RiskDistribution& dist,
                                          std::span<const double> eps_sorted,
                                          int v_points,
                                          std::span<const double> v_start = {},
                                          int max_rounds = 200);

// Golden-section polish of a QoS equilibrium candidate: round-robin
// continuous best responses in QoS until the largest move is below tol.
std::vector<double> refine_stage2_qos(const MarketParams& params,
                                      const RiskDistribution& dist,
                                      std::span<const double> eps_sorted,
                                      std::span<const double> v_start,
                                      double tol = 1e-9, int max_rounds = 200);

// Best deviation available to provider i when opponents keep their risks
// and every QoS re-equilibrates: scans the risk grid, re-solving the QoS
// fixed point per candidate by iterated grid best responses plus polish.
// This is the stage-1 deviation of the sequential game.
GridBestResponse grid_best_response(const MarketParams& params,
                                    const RiskDistribution& dist, int i,
                                    const StrategyProfile& profile,
                                    const GridSpec& grid);

// Best joint (risk, QoS) cell for provider i with the opponents' strategies
// frozen as advertised -- the one-shot deviation, with no stage-2 reaction.
GridBestResponse one_shot_best_response(const MarketParams& params,
                                        const RiskDistribution& dist, int i,
                                        const StrategyProfile& profile,
                                        const GridSpec& grid);

struct DeviationCheck {
  int sp = 0;                 // provider identity
  SPStrategy best;            // most profitable deviation found
  double best_profit = 0.0;
  double claimed_profit = 0.0;
  double delta = 0.0;         // best_profit - claimed_profit
};

struct Certificate {
  GridSpec grid;
  double cert_tol = 0.0;
  std::vector<DeviationCheck> deviations;  // one per provider
  double max_delta = 0.0;
  bool certified = false;
};

// Subgame-perfect deviation check of a claimed equilibrium: for each
// provider, the better of (a) the best QoS-only deviation at the advertised
// risks and (b) the best risk deviation with all QoS re-equilibrating.
// Certified when no provider improves by more than cert_tol.
Certificate certify(const MarketParams& params, const RiskDistribution& dist,
                    const StrategyProfile& profile, const GridSpec& grid,
                    double cert_tol);

}  // namespace privmkt

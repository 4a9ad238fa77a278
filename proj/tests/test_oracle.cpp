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

#include "privmkt/oracle.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "privmkt/numeric.hpp"
#include "test_util.hpp"

using namespace privmkt;
using privmkt::testing::worked_params;

namespace {

StrategyProfile equilibrium_profile() {
  return {{testing::kEps1Star, testing::kV1Star},
          {testing::kEps2Star, testing::kV2Star}};
}

// Sequential value of a risk deviation for provider i, rebuilt from public
// pieces: sort, re-equilibrate QoS by brute force plus polish, evaluate.
double sequential_value(const MarketParams& params, const RiskDistribution& dist,
                        const StrategyProfile& profile, int i, double cand,
                        int v_points) {
  const int m = static_cast<int>(profile.size());
  std::vector<double> eps(m);
  for (int j = 0; j < m; ++j) eps[j] = profile[j].eps;
  eps[i] = cand;
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (eps[a] != eps[b]) return eps[a] < eps[b];
    return a < b;
  });
  MarketParams sorted = params;
  std::vector<double> eps_sorted(m), warm(m);
  for (int k = 0; k < m; ++k) {
    eps_sorted[k] = eps[order[k]];
    sorted.p[k] = params.p[order[k]];
    warm[k] = profile[order[k]].v;
  }
  const BruteForceStage2Result bf =
      brute_force_stage2(sorted, dist, eps_sorted, v_points, warm);
  const std::vector<double> v =
      refine_stage2_qos(sorted, dist, eps_sorted, bf.v);
  StrategyProfile prof(m);
  for (int k = 0; k < m; ++k) prof[order[k]] = SPStrategy{eps_sorted[k], v[k]};
  return sp_profit(params, dist, prof, i);
}

}  // namespace

TEST_CASE("grid bounds") {
  CHECK(oracle_v_max(worked_params()) == doctest::Approx(8.6).epsilon(1e-12));
}

TEST_CASE("brute-force stage 2") {
  const MarketParams p = worked_params();
  const RiskDistribution u = RiskDistribution::uniform(5.0);
  const int v_points = 400;
  const double cell = oracle_v_max(p) / (v_points - 1);

  SUBCASE("matches the linear solve within one grid cell") {
    std::mt19937 rng(1701);
    std::uniform_real_distribution<double> u1(0.3, 3.8);
    for (int trial = 0; trial < 10; ++trial) {
      const double e1 = u1(rng);
      std::uniform_real_distribution<double> u2(e1 + 0.5, 5.0);
      const double e2 = u2(rng);
      const std::vector<double> eps = {e1, e2};
      const std::vector<double> exact = stage2_solve(p, u, eps);
      if (!stage2_qos_feasible(exact)) continue;
      const BruteForceStage2Result bf = brute_force_stage2(p, u, eps, v_points);
      CHECK(std::abs(bf.v[0] - exact[0]) <= cell + 1e-12);
      CHECK(std::abs(bf.v[1] - exact[1]) <= cell + 1e-12);
    }
  }

  SUBCASE("matches for three providers") {
    // An interior three-provider subgame: descending untargeted revenues so
    // every provider defends a positive segment.
    MarketParams p3 = worked_params();
    p3.p = {0.8, 0.6, 0.4};
    const std::vector<double> eps = {1.0, 2.75, 4.5};
    const std::vector<double> exact = stage2_solve(p3, u, eps);
    const double cell3 = oracle_v_max(p3) / (v_points - 1);
    const BruteForceStage2Result bf = brute_force_stage2(p3, u, eps, v_points);
    for (int i = 0; i < 3; ++i)
      CHECK(std::abs(bf.v[i] - exact[i]) <= cell3 + 1e-12);
  }

  SUBCASE("a grid fixed point returns in one round") {
    const std::vector<double> eps = {1.0, 4.0};
    const BruteForceStage2Result first = brute_force_stage2(p, u, eps, 200);
    const BruteForceStage2Result again =
        brute_force_stage2(p, u, eps, 200, first.v);
    CHECK(again.rounds == 1);
    CHECK(again.v == first.v);
  }

  SUBCASE("an exhausted round cap raises") {
    const std::vector<double> eps = {1.0, 4.0};
    CHECK_THROWS_AS(brute_force_stage2(p, u, eps, 400, {}, 0), NonConvergence);
  }

  SUBCASE("polish lands on the exact solution") {
    const std::vector<double> eps = {1.2, 3.9};
    const std::vector<double> exact = stage2_solve(p, u, eps);
    const BruteForceStage2Result bf = brute_force_stage2(p, u, eps, 400);
    const std::vector<double> polished = refine_stage2_qos(p, u, eps, bf.v);
    CHECK(std::abs(polished[0] - exact[0]) < 1e-6);
    CHECK(std::abs(polished[1] - exact[1]) < 1e-6);
  }
}

TEST_CASE("grid best response") {
  const MarketParams p = worked_params();
  const RiskDistribution u = RiskDistribution::uniform(5.0);
  const StrategyProfile prof = equilibrium_profile();
  const GridSpec grid{400, 400};

  SUBCASE("finds the equilibrium strategy of the low provider") {
    const GridBestResponse br = grid_best_response(p, u, 0, prof, grid);
    const double eps_cell = p.eps_bar / (grid.eps_points - 1);
    const double v_cell = oracle_v_max(p) / (grid.v_points - 1);
    CHECK(std::abs(br.strategy.eps - testing::kEps1Star) <= eps_cell);
    CHECK(std::abs(br.strategy.v - testing::kV1Star) <= v_cell);
    CHECK(br.profit <= testing::kPi1Star + 1e-6);
  }

  SUBCASE("a degenerate grid returns its sole cell") {
    const GridBestResponse br = grid_best_response(p, u, 0, prof, GridSpec{1, 1});
    CHECK(br.strategy.eps == 0.0);
    CHECK(br.strategy.v == 0.0);
  }

  SUBCASE("dominates random cells of the same search") {
    const GridSpec small{60, 120};
    const GridBestResponse br = grid_best_response(p, u, 0, prof, small);
    std::mt19937 rng(5150);
    std::uniform_int_distribution<int> cell(0, small.eps_points - 1);
    for (int k = 0; k < 50; ++k) {
      const double cand = 5.0 * cell(rng) / (small.eps_points - 1);
      if (std::abs(cand - prof[1].eps) < p.gap_min()) continue;
      CHECK(br.profit >= sequential_value(p, u, prof, 0, cand, small.v_points) - 1e-9);
    }
  }
}

TEST_CASE("one-shot best response") {
  const MarketParams p = worked_params();
  const RiskDistribution u = RiskDistribution::uniform(5.0);
  const StrategyProfile prof = equilibrium_profile();

  SUBCASE("degenerate grid returns its sole cell") {
    const GridBestResponse br =
        one_shot_best_response(p, u, 0, prof, GridSpec{1, 1});
    CHECK(br.strategy.eps == 0.0);
    CHECK(br.strategy.v == 0.0);
  }

  SUBCASE("dominates random grid cells") {
    const GridSpec grid{80, 80};
    const GridBestResponse br = one_shot_best_response(p, u, 0, prof, grid);
    std::mt19937 rng(808);
    std::uniform_int_distribution<int> ce(0, grid.eps_points - 1),
        cv(0, grid.v_points - 1);
    for (int k = 0; k < 50; ++k) {
      const double eps = 5.0 * ce(rng) / (grid.eps_points - 1);
      const double v = oracle_v_max(p) * cv(rng) / (grid.v_points - 1);
      if (std::abs(eps - prof[1].eps) < p.gap_min()) continue;
      StrategyProfile dev = prof;
      dev[0] = SPStrategy{eps, v};
      CHECK(br.profit >= sp_profit(p, u, dev, 0) - 1e-12);
    }
  }

  SUBCASE("mimicking the rival from above can grab the market one-shot") {
    // With the rival QoS frozen, sitting just above it with slightly better
    // QoS captures everything; only the stage-2 reaction deters this, which
    // is why certification re-equilibrates QoS for risk deviations.
    const GridBestResponse br =
        one_shot_best_response(p, u, 0, prof, GridSpec{400, 400});
    CHECK(br.profit > testing::kPi1Star + 0.1);
  }
}

TEST_CASE("certification") {
  const MarketParams p = worked_params();
  const RiskDistribution u = RiskDistribution::uniform(5.0);
  const GridSpec grid{400, 400};
  const double tol = 1e-3;

  SUBCASE("the closed form is certified") {
    const Certificate cert = certify(p, u, equilibrium_profile(), grid, tol);
    CHECK(cert.certified);
    CHECK(cert.max_delta <= tol);
    CHECK(cert.deviations.size() == 2);
  }

  SUBCASE("a QoS perturbation breaks certification") {
    StrategyProfile prof = equilibrium_profile();
    prof[0].v += 0.5;
    const Certificate cert = certify(p, u, prof, grid, tol);
    CHECK_FALSE(cert.certified);
    CHECK(cert.deviations[0].delta > tol);
  }

  SUBCASE("an oscillating multi-provider profile is not certified") {
    MarketParams p3 = worked_params();
    p3.p = {0.4, 0.45, 0.8};
    SolverConfig cfg;
    cfg.max_iters = 40;
    cfg.initial_eps = {2.5, 10.0 / 3.0, 3.75};
    const EquilibriumOutcome out =
        iterate_best_response(p3, u, cfg).outcome;
    REQUIRE_FALSE(out.converged);
    const Certificate cert = certify(p3, u, out.profile, GridSpec{200, 200}, tol);
    CHECK_FALSE(cert.certified);
  }

  SUBCASE("finer grids find weakly better deviations") {
    StrategyProfile prof = equilibrium_profile();
    prof[0].v += 0.5;
    const Certificate coarse = certify(p, u, prof, GridSpec{200, 200}, tol);
    const Certificate fine = certify(p, u, prof, GridSpec{399, 399}, tol);
    CHECK(fine.max_delta >= coarse.max_delta - 1e-9);
  }

  SUBCASE("random feasible instances certify and their perturbations fail") {
    std::mt19937 rng(20260808);
    for (int k = 0; k < 3; ++k) {
      const MarketParams pr = testing::random_feasible_params(rng);
      const RiskDistribution ur = RiskDistribution::uniform(pr.eps_bar);
      const ClosedFormSolution sol = solve_closed_form(pr);
      StrategyProfile prof = {{sol.eps1, sol.v1}, {sol.eps2, sol.v2}};
      CHECK(certify(pr, ur, prof, grid, tol).certified);
      prof[0].v += 0.5;
      CHECK_FALSE(certify(pr, ur, prof, grid, tol).certified);
    }
  }
}

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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "privmkt/golden.hpp"

namespace privmkt {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double grid_value(int k, int n, double hi) {
  return n > 1 ? hi * static_cast<double>(k) / (n - 1) : 0.0;
}

// Scratch state for profile evaluations at fixed sorted risks.
struct Scratch {
  std::vector<double> thresholds, shares;
  void resize(int m) {
    thresholds.resize(m - 1);
    shares.resize(m);
  }
};

double margin_at(const MarketParams& params, double eps, double p, double v) {
  return params.r * eps + p - params.c * v - params.c * params.lam * eps;
}

// Realized profit of the provider at sorted slot k (clamped market split).
double slot_profit(const MarketParams& params, const RiskDistribution& dist,
                   std::span<const double> eps, std::span<const double> p,
                   std::span<const double> v, int k, Scratch& sc) {
  sc.resize(static_cast<int>(eps.size()));
  stage3_split(params, dist, eps, v, sc.thresholds, sc.shares);
  return margin_at(params, eps[k], p[k], v[k]) * sc.shares[k];
}

// Payoff of the linear-split stage-2 subgame: the segment lengths taken as
// raw consecutive threshold differences, any sign. This is the concave game
// with the unique QoS equilibrium; clamped payoffs can lack a fixed point
// at corner profiles.
double slot_payoff_raw(const MarketParams& params, const RiskDistribution& dist,
                       std::span<const double> eps, std::span<const double> p,
                       std::span<const double> v, int k) {
  const int m = static_cast<int>(eps.size());
  const double t = params.t;
  auto tau = [&](int j) {  // split between sorted slots j and j+1
    return (v[j] - v[j + 1] +
            t * (cdf(dist, eps[j + 1]) * eps[j + 1] -
                 cdf(dist, eps[j]) * eps[j])) /
           (t * (eps[j + 1] - eps[j]));
  };
  const double lo = k == 0 ? 0.0 : tau(k - 1);
  const double hi = k == m - 1 ? 1.0 : tau(k);
  return margin_at(params, eps[k], p[k], v[k]) * (hi - lo);
}

void check_sorted(const MarketParams& params, std::span<const double> eps) {
  for (size_t k = 0; k + 1 < eps.size(); ++k)
    if (!(eps[k + 1] - eps[k] >= params.gap_min()))
      throw DegenerateDifferentiation("risk separation below gap_min");
}

struct BfState {
  std::vector<double> v;
  int rounds = 0;
  bool settled = false;  // reached a grid fixed point (no cycle, no cap)
};

// Iterated grid best responses in QoS. Stops settled at a fixed point; stops
// unsettled when the state revisits a recent one (a grid-quantization cycle,
// possible at corner profiles where the clamped game has no pure fixed
// point) or when the round cap runs out.
BfState bf_stage2(const MarketParams& params, const RiskDistribution& dist,
                  std::span<const double> eps, std::span<const double> p,
                  int v_points, std::span<const double> v_start,
                  int max_rounds) {
  const int m = static_cast<int>(eps.size());
  const double v_max = oracle_v_max(params);
  BfState res;
  res.v.assign(m, 0.0);
  if (!v_start.empty()) {
    if (static_cast<int>(v_start.size()) != m)
      throw InvalidParameter("v_start size must match provider count");
    res.v.assign(v_start.begin(), v_start.end());
  }
  std::vector<std::vector<double>> history;
  for (int round = 1; round <= max_rounds; ++round) {
    const std::vector<double> before = res.v;
    res.rounds = round;
    bool changed = false;
    for (int k = 0; k < m; ++k) {
      double best_v = res.v[k], best_f = kNegInf;
      for (int g = 0; g < v_points; ++g) {
        res.v[k] = grid_value(g, v_points, v_max);
        const double f = slot_payoff_raw(params, dist, eps, p, res.v, k);
        if (f > best_f) {
          best_f = f;
          best_v = res.v[k];
        }
      }
      res.v[k] = best_v;
      changed = changed || best_v != before[k];
    }
    if (!changed) {
      res.settled = true;
      return res;
    }
    for (const std::vector<double>& old : history)
      if (old == res.v) return res;  // grid-tie cycling; never settles
    history.push_back(res.v);
    if (history.size() > 8) history.erase(history.begin());
  }
  return res;
}

std::vector<double> refine_qos(const MarketParams& params,
                               const RiskDistribution& dist,
                               std::span<const double> eps,
                               std::span<const double> p,
                               std::span<const double> v_start, double tol,
                               int max_rounds) {
  const int m = static_cast<int>(eps.size());
  const double v_max = oracle_v_max(params);
  std::vector<double> v(v_start.begin(), v_start.end());
  for (int round = 0; round < max_rounds; ++round) {
    double delta = 0.0;
    for (int k = 0; k < m; ++k) {
      auto f = [&](double x) {
        v[k] = x;
        return slot_payoff_raw(params, dist, eps, p, v, k);
      };
      const double old = v[k];
      const auto [bx, bf] = golden_section_max(f, 0.0, v_max, tol * 0.25);
      (void)bf;
      v[k] = bx;
      delta = std::max(delta, std::abs(bx - old));
    }
    if (delta < tol) break;
  }
  return v;
}

}  // namespace

double oracle_v_max(const MarketParams& params) {
  return (params.r * params.eps_bar +
          *std::max_element(params.p.begin(), params.p.end())) /
         params.c;
}

BruteForceStage2Result brute_force_stage2(const MarketParams& params,
                                          const RiskDistribution& dist,
                                          std::span<const double> eps_sorted,
                                          int v_points,
                                          std::span<const double> v_start,
                                          int max_rounds) {
  params.validate();
  dist.validate();
  if (v_points < 1) throw InvalidParameter("v_points must be >= 1");
  if (static_cast<int>(eps_sorted.size()) != params.provider_count())
    throw InvalidParameter("risk vector size must match provider count");
  check_sorted(params, eps_sorted);
  const BfState state = bf_stage2(params, dist, eps_sorted, params.p, v_points,
                                  v_start, max_rounds);
  if (!state.settled)
    throw NonConvergence("stage-2 grid iteration did not reach a fixed point");
  return BruteForceStage2Result{state.v, state.rounds};
}

std::vector<double> refine_stage2_qos(const MarketParams& params,
                                      const RiskDistribution& dist,
                                      std::span<const double> eps_sorted,
                                      std::span<const double> v_start,
                                      double tol, int max_rounds) {
  params.validate();
  dist.validate();
  check_sorted(params, eps_sorted);
  return refine_qos(params, dist, eps_sorted, params.p, v_start, tol,
                    max_rounds);
}

GridBestResponse grid_best_response(const MarketParams& params,
                                    const RiskDistribution& dist, int i,
                                    const StrategyProfile& profile,
                                    const GridSpec& grid) {
  params.validate();
  dist.validate();
  const int m = static_cast<int>(profile.size());
  if (i < 0 || i >= m) throw InvalidParameter("provider index out of range");
  if (grid.eps_points < 1 || grid.v_points < 1)
    throw InvalidParameter("grid must have at least one cell per axis");
  const double gap = params.gap_min();

  std::vector<double> eps(m);
  for (int j = 0; j < m; ++j) eps[j] = profile[j].eps;

  std::vector<int> order(m);
  std::vector<double> eps_sorted(m), p_sorted(m), v_warm(m);
  Scratch sc;
  GridBestResponse best;
  best.profit = kNegInf;
  bool any = false;

  for (int g = 0; g < grid.eps_points; ++g) {
    const double cand = grid_value(g, grid.eps_points, params.eps_bar);
    bool excluded = false;
    for (int j = 0; j < m; ++j)
      if (j != i && std::abs(cand - profile[j].eps) < gap) excluded = true;
    if (excluded) continue;
    any = true;
    eps[i] = cand;

    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (eps[a] != eps[b]) return eps[a] < eps[b];
      return a < b;
    });
    int slot = 0;
    for (int k = 0; k < m; ++k) {
      eps_sorted[k] = eps[order[k]];
      p_sorted[k] = params.p[order[k]];
      v_warm[k] = profile[order[k]].v;
      if (order[k] == i) slot = k;
    }
    const BfState bf =
        bf_stage2(params, dist, eps_sorted, p_sorted, grid.v_points, v_warm, 200);
    const std::vector<double> v =
        refine_qos(params, dist, eps_sorted, p_sorted, bf.v, 1e-9, 100);
    // A QoS pinned at zero means the subgame fixed point wants a negative
    // level; such candidates are infeasible, mirroring the solver's rule.
    bool pinned = false;
    for (double x : v) pinned = pinned || x == 0.0;
    if (pinned) continue;
    const double f = slot_profit(params, dist, eps_sorted, p_sorted, v, slot, sc);
    if (f > best.profit) {
      best.profit = f;
      best.strategy = SPStrategy{cand, v[slot]};
    }
  }
  if (!any) throw EmptyDomain("separation exclusions cover the risk grid");
  return best;
}

GridBestResponse one_shot_best_response(const MarketParams& params,
                                        const RiskDistribution& dist, int i,
                                        const StrategyProfile& profile,
                                        const GridSpec& grid) {
  params.validate();
  dist.validate();
  const int m = static_cast<int>(profile.size());
  if (i < 0 || i >= m) throw InvalidParameter("provider index out of range");
  if (grid.eps_points < 1 || grid.v_points < 1)
    throw InvalidParameter("grid must have at least one cell per axis");
  const double gap = params.gap_min();
  const double v_max = oracle_v_max(params);

  std::vector<int> order(m);
  std::vector<double> eps(m), eps_sorted(m), p_sorted(m), v_sorted(m);
  for (int j = 0; j < m; ++j) eps[j] = profile[j].eps;
  Scratch sc;
  GridBestResponse best;
  best.profit = kNegInf;
  bool any = false;

  for (int g = 0; g < grid.eps_points; ++g) {
    const double cand = grid_value(g, grid.eps_points, params.eps_bar);
    bool excluded = false;
    for (int j = 0; j < m; ++j)
      if (j != i && std::abs(cand - profile[j].eps) < gap) excluded = true;
    if (excluded) continue;
    any = true;
    eps[i] = cand;

    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (eps[a] != eps[b]) return eps[a] < eps[b];
      return a < b;
    });
    int slot = 0;
    for (int k = 0; k < m; ++k) {
      eps_sorted[k] = eps[order[k]];
      p_sorted[k] = params.p[order[k]];
      v_sorted[k] = profile[order[k]].v;
      if (order[k] == i) slot = k;
    }
    for (int h = 0; h < grid.v_points; ++h) {
      v_sorted[slot] = grid_value(h, grid.v_points, v_max);
      const double f =
          slot_profit(params, dist, eps_sorted, p_sorted, v_sorted, slot, sc);
      if (f > best.profit) {
        best.profit = f;
        best.strategy = SPStrategy{cand, v_sorted[slot]};
      }
    }
  }
  if (!any) throw EmptyDomain("separation exclusions cover the risk grid");
  return best;
}

Certificate certify(const MarketParams& params, const RiskDistribution& dist,
                    const StrategyProfile& profile, const GridSpec& grid,
                    double cert_tol) {
  params.validate();
  dist.validate();
  const int m = static_cast<int>(profile.size());
  const std::vector<double> claimed = sp_profits(params, dist, profile);
  const double v_max = oracle_v_max(params);

  Certificate cert;
  cert.grid = grid;
  cert.cert_tol = cert_tol;
  cert.max_delta = kNegInf;

  // Sorted view of the claimed profile, for the QoS-only deviation scan.
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (profile[a].eps != profile[b].eps) return profile[a].eps < profile[b].eps;
    return a < b;
  });
  std::vector<double> eps_sorted(m), p_sorted(m), v_claimed(m);
  for (int k = 0; k < m; ++k) {
    eps_sorted[k] = profile[order[k]].eps;
    p_sorted[k] = params.p[order[k]];
    v_claimed[k] = profile[order[k]].v;
  }
  check_sorted(params, eps_sorted);
  Scratch sc;

  for (int i = 0; i < m; ++i) {
    int slot = 0;
    for (int k = 0; k < m; ++k)
      if (order[k] == i) slot = k;

    // (a) QoS deviation at the advertised risks, opponents' QoS frozen.
    std::vector<double> v = v_claimed;
    double best_v = v_claimed[slot], best_vf = kNegInf;
    for (int h = 0; h < grid.v_points; ++h) {
      v[slot] = grid_value(h, grid.v_points, v_max);
      const double f = slot_profit(params, dist, eps_sorted, p_sorted, v, slot, sc);
      if (f > best_vf) {
        best_vf = f;
        best_v = v[slot];
      }
    }

    // (b) risk deviation with stage-2 QoS re-equilibrating everywhere.
    const GridBestResponse br = grid_best_response(params, dist, i, profile, grid);

    DeviationCheck check;
    check.sp = i;
    check.claimed_profit = claimed[i];
    if (best_vf >= br.profit) {
      check.best = SPStrategy{profile[i].eps, best_v};
      check.best_profit = best_vf;
    } else {
      check.best = br.strategy;
      check.best_profit = br.profit;
    }
    check.delta = check.best_profit - claimed[i];
    cert.max_delta = std::max(cert.max_delta, check.delta);
    cert.deviations.push_back(check);
  }
  cert.certified = cert.max_delta <= cert_tol;
  return cert;
}

}  // namespace privmkt

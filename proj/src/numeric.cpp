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

#include "privmkt/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "privmkt/golden.hpp"

namespace privmkt {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Tolerance under which a marginally negative stage-2 QoS is treated as
// rounding noise rather than an infeasible candidate.
constexpr double kQosSlack = 1e-12;

void check_dist(const MarketParams& params, const RiskDistribution& dist) {
  dist.validate();
  if (std::abs(dist.eps_bar - params.eps_bar) >
      1e-12 * std::max(1.0, params.eps_bar))
    throw InvalidParameter("distribution eps_bar disagrees with market eps_bar");
}

// Scratch buffers for candidate evaluation; avoids per-candidate allocation
// in the 1-D search loops.
struct Workspace {
  std::vector<int> order;
  std::vector<double> eps_sorted, p_sorted, v_sorted, thresholds, shares;
  std::vector<double> sub, diag, super, rhs;

  void resize(int m) {
    order.resize(m);
    eps_sorted.resize(m);
    p_sorted.resize(m);
    v_sorted.resize(m);
    thresholds.resize(m - 1);
    shares.resize(m);
    sub.resize(m);
    diag.resize(m);
    super.resize(m);
    rhs.resize(m);
  }
};

void sort_by_risk(std::span<const double> eps, std::vector<int>& order) {
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (eps[a] != eps[b]) return eps[a] < eps[b];
    return a < b;
  });
}

// Fills the tridiagonal coefficients for sorted risks into ws. The rows are
// the stage-2 first-order conditions
//   2c v_1 - c v_2 = y_1
//   -c d_{k-1} v_{k-1} + 2c (d_{k-1} + d_k) v_k - c d_k v_{k+1} = y_k
//   -c v_{m-1} + 2c v_m = y_m
// with d_k = 1/(t (eps_{k+1} - eps_k)); strictly diagonally dominant.
void fill_stage2(const MarketParams& params, const RiskDistribution& dist,
                 std::span<const double> eps, std::span<const double> p,
                 Workspace& ws) {
  const int m = static_cast<int>(eps.size());
  const double c = params.c, t = params.t, lam = params.lam, r = params.r;
  auto mass = [&](int k) { return cdf(dist, eps[k]) * eps[k]; };
  auto own = [&](int k) { return r * eps[k] + p[k] - c * lam * eps[k]; };

  ws.sub[0] = 0.0;
  ws.diag[0] = 2.0 * c;
  ws.super[0] = -c;
  ws.rhs[0] = own(0) - c * t * (mass(1) - mass(0));
  for (int k = 1; k + 1 < m; ++k) {
    const double dk = 1.0 / (t * (eps[k + 1] - eps[k]));
    const double dkm = 1.0 / (t * (eps[k] - eps[k - 1]));
    ws.sub[k] = -c * dkm;
    ws.diag[k] = 2.0 * c * (dk + dkm);
    ws.super[k] = -c * dk;
    ws.rhs[k] = dk * (own(k) - c * t * (mass(k + 1) - mass(k))) +
                dkm * (own(k) + c * t * (mass(k) - mass(k - 1)));
  }
  ws.sub[m - 1] = -c;
  ws.diag[m - 1] = 2.0 * c;
  ws.super[m - 1] = 0.0;
  ws.rhs[m - 1] = own(m - 1) - c * t * (eps[m - 1] - eps[m - 2]) +
                  c * t * (mass(m - 1) - mass(m - 2));
}

// Thomas algorithm; overwrites diag/rhs, writes the solution into v.
void solve_tridiagonal(Workspace& ws, std::span<double> v) {
  const int m = static_cast<int>(v.size());
  for (int k = 1; k < m; ++k) {
    if (std::abs(ws.diag[k - 1]) < 1e-300)
      throw SingularSystem("stage-2 system pivot underflow");
    const double w = ws.sub[k] / ws.diag[k - 1];
    ws.diag[k] -= w * ws.super[k - 1];
    ws.rhs[k] -= w * ws.rhs[k - 1];
  }
  if (std::abs(ws.diag[m - 1]) < 1e-300)
    throw SingularSystem("stage-2 system pivot underflow");
  v[m - 1] = ws.rhs[m - 1] / ws.diag[m - 1];
  for (int k = m - 2; k >= 0; --k)
    v[k] = (ws.rhs[k] - ws.super[k] * v[k + 1]) / ws.diag[k];
}

// Profit of provider `who` at the identity-ordered risk vector, stage-2 QoS
// re-equilibrated. Returns -infinity for candidates that are inseparable or
// have an infeasible (negative QoS) stage-2 solution. Optionally reports the
// full QoS vector by identity.
double reduced_profit(const MarketParams& params, const RiskDistribution& dist,
                      std::span<const double> eps, int who, double gap,
                      Workspace& ws, std::vector<double>* v_by_id = nullptr) {
  const int m = static_cast<int>(eps.size());
  ws.resize(m);
  sort_by_risk(eps, ws.order);
  for (int k = 0; k < m; ++k) {
    ws.eps_sorted[k] = eps[ws.order[k]];
    ws.p_sorted[k] = params.p[ws.order[k]];
  }
  for (int k = 0; k + 1 < m; ++k)
    if (!(ws.eps_sorted[k + 1] - ws.eps_sorted[k] >= gap)) return kNegInf;

  fill_stage2(params, dist, ws.eps_sorted, ws.p_sorted, ws);
  solve_tridiagonal(ws, ws.v_sorted);
  for (int k = 0; k < m; ++k)
    if (ws.v_sorted[k] < -kQosSlack) return kNegInf;

  stage3_split(params, dist, ws.eps_sorted, ws.v_sorted, ws.thresholds, ws.shares);
  if (v_by_id) {
    v_by_id->resize(m);
    for (int k = 0; k < m; ++k) (*v_by_id)[ws.order[k]] = ws.v_sorted[k];
  }
  double out = kNegInf;
  for (int k = 0; k < m; ++k) {
    if (ws.order[k] == who) {
      const double margin = params.r * ws.eps_sorted[k] + ws.p_sorted[k] -
                            params.c * ws.v_sorted[k] -
                            params.c * params.lam * ws.eps_sorted[k];
      out = margin * ws.shares[k];
      break;
    }
  }
  return out;
}

double best_response_eps_ws(const MarketParams& params, const RiskDistribution& dist,
                            int i, std::span<const double> eps,
                            const SolverConfig& cfg, Workspace& ws,
                            std::vector<double>& cand) {
  const int m = static_cast<int>(eps.size());
  const double gap = cfg.resolved_gap_min(params);
  const double ebar = params.eps_bar;

  cand.assign(eps.begin(), eps.end());
  auto objective = [&](double x) {
    cand[i] = x;
    return reduced_profit(params, dist, cand, i, gap, ws);
  };

  double best_x = 0.0, best_f = kNegInf;
  double prev_valid = -1.0, bracket_lo = 0.0, bracket_hi = ebar;
  double next_after_best = ebar;
  bool want_next = false;
  int valid = 0;
  for (int k = 0; k < cfg.br_grid; ++k) {
    const double x = ebar * static_cast<double>(k) / (cfg.br_grid - 1);
    bool excluded = false;
    for (int j = 0; j < m; ++j)
      if (j != i && std::abs(x - eps[j]) < gap) excluded = true;
    if (excluded) continue;
    ++valid;
    const double f = objective(x);
    if (want_next) {
      next_after_best = x;
      want_next = false;
    }
    if (f > best_f) {
      best_f = f;
      best_x = x;
      bracket_lo = prev_valid >= 0.0 ? prev_valid : 0.0;
      want_next = true;
      next_after_best = ebar;
    }
    prev_valid = x;
  }
  if (valid == 0)
    throw EmptyDomain("separation exclusions cover the whole risk range");
  if (best_f == kNegInf)
    throw EmptyDomain("no feasible best-response candidate");
  bracket_hi = next_after_best;

  // Keep the refinement bracket on one side of every opponent so the
  // objective is not split by a share discontinuity.
  for (int j = 0; j < m; ++j) {
    if (j == i) continue;
    if (bracket_lo < eps[j] && eps[j] < bracket_hi) {
      if (best_x < eps[j])
        bracket_hi = eps[j] - gap;
      else
        bracket_lo = eps[j] + gap;
    }
  }
  bracket_lo = std::max(0.0, bracket_lo);
  bracket_hi = std::min(ebar, bracket_hi);

  if (bracket_hi > bracket_lo) {
    auto [gx, gf] = golden_section_max(objective, bracket_lo, bracket_hi,
                                       cfg.br_refine_tol);
    if (gf > best_f) {
      best_f = gf;
      best_x = gx;
    }
  }
  return best_x;
}

}  // namespace

std::vector<double> SolverConfig::resolved_initial_eps(const MarketParams& p) const {
  const int m = p.provider_count();
  if (!initial_eps.empty()) {
    if (static_cast<int>(initial_eps.size()) != m)
      throw InvalidParameter("initial_eps size must match provider count");
    for (double e : initial_eps)
      if (!(e >= 0.0 && e <= p.eps_bar))
        throw InvalidParameter("initial_eps entries must lie in [0, eps_bar]");
    return initial_eps;
  }
  std::vector<double> eps(m);
  for (int i = 0; i < m; ++i)
    eps[i] = (2.0 * i + 1.0) * p.eps_bar / (2.0 * m);
  return eps;
}

void SolverConfig::validate() const {
  if (max_iters < 1) throw InvalidParameter("max_iters must be >= 1");
  if (br_grid < 8) throw InvalidParameter("br_grid must be >= 8");
  if (!(br_refine_tol > 0.0)) throw InvalidParameter("br_refine_tol must be > 0");
  if (cycle_window < 2) throw InvalidParameter("cycle_window must be >= 2");
  if (!(damping >= 0.0 && damping < 1.0))
    throw InvalidParameter("damping must lie in [0, 1)");
}

const char* to_string(SolveMethod m) {
  return m == SolveMethod::ClosedForm ? "closed_form" : "numeric";
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::Converged: return "converged";
    case Termination::Oscillating: return "oscillating";
    default: return "max_iters";
  }
}

Stage2System build_stage2_system(const MarketParams& params,
                                 const RiskDistribution& dist,
                                 std::span<const double> eps_sorted,
                                 std::span<const double> p_sorted) {
  params.validate();
  check_dist(params, dist);
  const int m = static_cast<int>(eps_sorted.size());
  if (m < 2 || eps_sorted.size() != p_sorted.size())
    throw InvalidParameter("stage-2 system needs m >= 2 aligned risks/revenues");
  for (int k = 0; k + 1 < m; ++k)
    if (!(eps_sorted[k + 1] - eps_sorted[k] >= params.gap_min()))
      throw DegenerateDifferentiation("risk separation below gap_min");

  Workspace ws;
  ws.resize(m);
  fill_stage2(params, dist, eps_sorted, p_sorted, ws);
  Stage2System sys;
  sys.sub = ws.sub;
  sys.diag = ws.diag;
  sys.super = ws.super;
  sys.rhs = ws.rhs;
  sys.y = ws.rhs;
  sys.delta.resize(m - 1);
  for (int k = 0; k + 1 < m; ++k)
    sys.delta[k] = 1.0 / (params.t * (eps_sorted[k + 1] - eps_sorted[k]));
  return sys;
}

std::vector<double> stage2_solve(const MarketParams& params,
                                 const RiskDistribution& dist,
                                 std::span<const double> eps_sorted) {
  params.validate();
  check_dist(params, dist);
  const int m = static_cast<int>(eps_sorted.size());
  if (m != params.provider_count())
    throw InvalidParameter("risk vector size must match provider count");
  for (int k = 0; k + 1 < m; ++k)
    if (!(eps_sorted[k + 1] - eps_sorted[k] >= params.gap_min()))
      throw DegenerateDifferentiation("risk separation below gap_min");

  Workspace ws;
  ws.resize(m);
  fill_stage2(params, dist, eps_sorted, params.p, ws);
  std::vector<double> v(m);
  solve_tridiagonal(ws, v);
  return v;
}

std::vector<double> stage2_qos_profile(const MarketParams& params,
                                       const RiskDistribution& dist,
                                       std::span<const double> eps) {
  params.validate();
  check_dist(params, dist);
  const int m = static_cast<int>(eps.size());
  if (m != params.provider_count())
    throw InvalidParameter("risk vector size must match provider count");

  Workspace ws;
  ws.resize(m);
  sort_by_risk(eps, ws.order);
  for (int k = 0; k < m; ++k) {
    ws.eps_sorted[k] = eps[ws.order[k]];
    ws.p_sorted[k] = params.p[ws.order[k]];
  }
  for (int k = 0; k + 1 < m; ++k)
    if (!(ws.eps_sorted[k + 1] - ws.eps_sorted[k] >= params.gap_min()))
      throw DegenerateDifferentiation("risk separation below gap_min");
  fill_stage2(params, dist, ws.eps_sorted, ws.p_sorted, ws);
  solve_tridiagonal(ws, ws.v_sorted);
  std::vector<double> v(m);
  for (int k = 0; k < m; ++k) v[ws.order[k]] = ws.v_sorted[k];
  return v;
}

bool stage2_qos_feasible(std::span<const double> v) {
  for (double x : v)
    if (x < -kQosSlack) return false;
  return true;
}

double best_response_eps(const MarketParams& params, const RiskDistribution& dist,
                         int i, std::span<const double> eps,
                         const SolverConfig& cfg) {
  params.validate();
  check_dist(params, dist);
  cfg.validate();
  if (i < 0 || i >= static_cast<int>(eps.size()))
    throw InvalidParameter("provider index out of range");
  Workspace ws;
  std::vector<double> cand;
  return best_response_eps_ws(params, dist, i, eps, cfg, ws, cand);
}

IbrResult iterate_best_response(const MarketParams& params,
                                const RiskDistribution& dist,
                                const SolverConfig& cfg) {
  params.validate();
  check_dist(params, dist);
  cfg.validate();
  const int m = params.provider_count();
  const double eps_tol = cfg.resolved_eps_tol(params);
  const double gap = cfg.resolved_gap_min(params);

  std::vector<double> eps = cfg.resolved_initial_eps(params);
  std::vector<std::vector<double>> history;
  history.push_back(eps);

  Workspace ws;
  std::vector<double> cand, prev(m), v_by_id;
  IbrResult res;
  res.trace.termination = Termination::MaxIters;
  bool oscillating = false;
  int rounds = 0;

  for (int round = 0; round < cfg.max_iters; ++round) {
    prev = eps;
    for (int i = 0; i < m; ++i) {
      const double br = best_response_eps_ws(params, dist, i, eps, cfg, ws, cand);
      eps[i] = cfg.damping > 0.0 ? cfg.damping * eps[i] + (1.0 - cfg.damping) * br
                                 : br;
    }
    ++rounds;

    IterationRecord rec;
    rec.eps = eps;
    rec.profit.resize(m);
    reduced_profit(params, dist, eps, 0, gap, ws, &v_by_id);
    rec.v = v_by_id;
    for (int i = 0; i < m; ++i)
      rec.profit[i] = reduced_profit(params, dist, eps, i, gap, ws);
    res.trace.rounds.push_back(std::move(rec));

    double delta = 0.0;
    for (int i = 0; i < m; ++i) delta = std::max(delta, std::abs(eps[i] - prev[i]));
    if (delta < eps_tol) {
      res.trace.termination = Termination::Converged;
      break;
    }
    const int lookback =
        std::min<int>(static_cast<int>(history.size()), cfg.cycle_window);
    for (int k = 2; k <= lookback; ++k) {
      const std::vector<double>& old = history[history.size() - k];
      double d = 0.0;
      for (int i = 0; i < m; ++i) d = std::max(d, std::abs(eps[i] - old[i]));
      if (d < eps_tol) {
        if (!oscillating) {
          oscillating = true;
          res.trace.cycle_length = k;
        }
        break;
      }
    }
    history.push_back(eps);
    if (static_cast<int>(history.size()) > cfg.cycle_window + 1)
      history.erase(history.begin());
  }

  if (res.trace.termination != Termination::Converged && oscillating)
    res.trace.termination = Termination::Oscillating;

  StrategyProfile profile(m);
  std::vector<double> v = stage2_qos_profile(params, dist, eps);
  for (int i = 0; i < m; ++i) profile[i] = SPStrategy{eps[i], v[i]};
  res.outcome = evaluate_outcome(params, dist, profile);
  res.outcome.method = SolveMethod::Numeric;
  res.outcome.converged = res.trace.termination == Termination::Converged;
  res.outcome.iterations = rounds;
  return res;
}

EquilibriumOutcome evaluate_outcome(const MarketParams& params,
                                    const RiskDistribution& dist,
                                    const StrategyProfile& profile) {
  const ShareResult shares = market_shares(params, dist, profile);
  EquilibriumOutcome out;
  out.profile = profile;
  out.shares = shares.shares;
  out.thresholds = shares.thresholds;
  out.profits.resize(profile.size());
  for (int i = 0; i < static_cast<int>(profile.size()); ++i)
    out.profits[i] = sp_margin(params, i, profile[i]) * shares.shares[i];
  return out;
}

CertifiedOutcome solve_spne_certified(const MarketParams& params,
                                      const RiskDistribution& dist,
                                      const SolverConfig& cfg,
                                      const GridSpec& grid, double cert_tol) {
  CertifiedOutcome res;
  res.outcome = solve_spne(params, dist, cfg);
  res.certificate = certify(params, dist, res.outcome.profile, grid, cert_tol);
  if (!res.certificate.certified) {
    std::string worst;
    for (const DeviationCheck& d : res.certificate.deviations)
      if (d.delta == res.certificate.max_delta)
        worst = "provider " + std::to_string(d.sp + 1) + " improves by " +
                std::to_string(d.delta);
    throw NotAnEquilibrium("certification failed: " + worst);
  }
  return res;
}

EquilibriumOutcome solve_spne(const MarketParams& params,
                              const RiskDistribution& dist,
                              const SolverConfig& cfg) {
  params.validate();
  check_dist(params, dist);
  const bool two_uniform = params.provider_count() == 2 &&
                           dist.kind == DistributionKind::Uniform;
  if (two_uniform) {
    const FeasibilityReport rep = check_feasibility(params);
    if (rep.all_feasible) {
      const ClosedFormSolution sol = solve_closed_form(params);
      StrategyProfile profile = {SPStrategy{sol.eps1, sol.v1},
                                 SPStrategy{sol.eps2, sol.v2}};
      EquilibriumOutcome out = evaluate_outcome(params, dist, profile);
      out.method = SolveMethod::ClosedForm;
      out.converged = true;
      out.iterations = 0;
      out.feasibility = rep;
      return out;
    }
    IbrResult res = iterate_best_response(params, dist, cfg);
    res.outcome.feasibility = rep;
    return res.outcome;
  }
  return iterate_best_response(params, dist, cfg).outcome;
}

}  // namespace privmkt

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

#include "privmkt/market.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace privmkt {

namespace {

bool finite(double x) { return std::isfinite(x); }

}  // namespace

void MarketParams::validate() const {
  if (!finite(c) || c <= 0.0) throw InvalidParameter("c must be positive");
  if (!finite(t) || t <= 0.0) throw InvalidParameter("t must be positive");
  if (!finite(eps_bar) || eps_bar <= 0.0)
    throw InvalidParameter("eps_bar must be positive");
  if (!finite(lam) || lam < 0.0) throw InvalidParameter("lambda must be >= 0");
  if (!finite(r) || r < 0.0) throw InvalidParameter("r must be >= 0");
  if (p.size() < 2) throw InvalidParameter("at least two providers required");
  for (double pi : p) {
    if (!finite(pi) || pi < 0.0) throw InvalidParameter("p_i must be >= 0");
  }
}

RiskDistribution RiskDistribution::uniform(double eps_bar) {
  RiskDistribution d;
  d.kind = DistributionKind::Uniform;
  d.eps_bar = eps_bar;
  d.validate();
  return d;
}

RiskDistribution RiskDistribution::truncated_normal(double eps_bar, double sigma) {
  RiskDistribution d;
  d.kind = DistributionKind::TruncatedNormal;
  d.eps_bar = eps_bar;
  d.sigma = sigma;
  d.validate();
  return d;
}

void RiskDistribution::validate() const {
  if (!finite(eps_bar) || eps_bar <= 0.0)
    throw InvalidParameter("distribution eps_bar must be positive");
  if (kind == DistributionKind::TruncatedNormal && (!finite(sigma) || sigma <= 0.0))
    throw InvalidParameter("truncated normal sigma must be positive");
}

double standard_normal_cdf(double y) {
  return 0.5 * std::erfc(-y / std::sqrt(2.0));
}

double cdf(const RiskDistribution& dist, double eps) {
  if (eps <= 0.0) return 0.0;
  if (eps >= dist.eps_bar) return 1.0;
  if (dist.kind == DistributionKind::Uniform) return eps / dist.eps_bar;
  const double half = 0.5 * dist.eps_bar;
  const double lo = standard_normal_cdf(-half / dist.sigma);
  const double hi = standard_normal_cdf(half / dist.sigma);
  return (standard_normal_cdf((eps - half) / dist.sigma) - lo) / (hi - lo);
}

double inverse_cdf(const RiskDistribution& dist, double q) {
  if (!finite(q) || q < 0.0 || q > 1.0)
    throw InvalidParameter("quantile must lie in [0, 1]");
  if (dist.kind == DistributionKind::Uniform) return q * dist.eps_bar;
  // F is strictly increasing on [0, eps_bar]; bisect.
  double lo = 0.0, hi = dist.eps_bar;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double f = cdf(dist, mid);
    if (std::abs(f - q) <= 1e-12 || hi - lo <= 1e-15 * dist.eps_bar) return mid;
    (f < q ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double consumer_utility(const MarketParams& params, const RiskDistribution& dist,
                        const SPStrategy& s, double x) {
  return s.v + params.t * (x - cdf(dist, s.eps)) * s.eps;
}

Threshold indifference_threshold(const MarketParams& params,
                                 const RiskDistribution& dist,
                                 const SPStrategy& low, const SPStrategy& high) {
  if (!(high.eps - low.eps >= params.gap_min()))
    throw DegenerateDifferentiation("risk separation below gap_min");
  const double t = params.t;
  const double raw = (low.v - high.v +
                      t * (cdf(dist, high.eps) * high.eps - cdf(dist, low.eps) * low.eps)) /
                     (t * (high.eps - low.eps));
  Threshold out;
  out.x = std::clamp(raw, 0.0, 1.0);
  out.clamped = out.x != raw;
  return out;
}

bool stage3_split(const MarketParams& params, const RiskDistribution& dist,
                  std::span<const double> eps, std::span<const double> v,
                  std::span<double> thresholds, std::span<double> shares) {
  const int m = static_cast<int>(eps.size());
  const double t = params.t;
  bool clamped = false;
  double prev = 0.0;
  for (int k = 0; k + 1 < m; ++k) {
    const double raw = (v[k] - v[k + 1] +
                        t * (cdf(dist, eps[k + 1]) * eps[k + 1] -
                             cdf(dist, eps[k]) * eps[k])) /
                       (t * (eps[k + 1] - eps[k]));
    const double bounded = std::min(1.0, std::max({0.0, prev, raw}));
    clamped |= bounded != raw;
    thresholds[k] = bounded;
    shares[k] = bounded - prev;
    prev = bounded;
  }
  shares[m - 1] = 1.0 - prev;
  return clamped;
}

ShareResult market_shares(const MarketParams& params, const RiskDistribution& dist,
                          const StrategyProfile& profile) {
  const int m = static_cast<int>(profile.size());
  if (m < 2) throw InvalidParameter("profile needs at least two providers");

  ShareResult res;
  res.order.resize(m);
  std::iota(res.order.begin(), res.order.end(), 0);
  std::sort(res.order.begin(), res.order.end(), [&](int a, int b) {
    if (profile[a].eps != profile[b].eps) return profile[a].eps < profile[b].eps;
    return a < b;  // deterministic tie-break by identity
  });

  std::vector<double> eps(m), v(m);
  for (int k = 0; k < m; ++k) {
    eps[k] = profile[res.order[k]].eps;
    v[k] = profile[res.order[k]].v;
  }
  for (int k = 0; k + 1 < m; ++k) {
    if (!(eps[k + 1] - eps[k] >= params.gap_min()))
      throw DegenerateDifferentiation("risk separation below gap_min");
  }

  res.thresholds.resize(m - 1);
  std::vector<double> sorted_shares(m);
  res.clamped = stage3_split(params, dist, eps, v, res.thresholds, sorted_shares);
  res.shares.resize(m);
  for (int k = 0; k < m; ++k) res.shares[res.order[k]] = sorted_shares[k];
  return res;
}

double sp_margin(const MarketParams& params, int i, const SPStrategy& s) {
  return params.r * s.eps + params.p.at(i) - params.c * s.v -
         params.c * params.lam * s.eps;
}

double sp_profit(const MarketParams& params, const RiskDistribution& dist,
                 const StrategyProfile& profile, int i) {
  return sp_margin(params, i, profile.at(i)) *
         market_shares(params, dist, profile).shares.at(i);
}

std::vector<double> sp_profits(const MarketParams& params, const RiskDistribution& dist,
                               const StrategyProfile& profile) {
  const ShareResult shares = market_shares(params, dist, profile);
  std::vector<double> out(profile.size());
  for (int i = 0; i < static_cast<int>(profile.size()); ++i)
    out[i] = sp_margin(params, i, profile[i]) * shares.shares[i];
  return out;
}

}  // namespace privmkt

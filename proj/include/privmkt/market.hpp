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

#include "privmkt/errors.hpp"

namespace privmkt {

// Minimum risk separation, as a fraction of the tolerance range. Below
// gap_min the segment threshold between two providers is numerically
// meaningless and share computations raise DegenerateDifferentiation.
inline constexpr double kGapMinScale = 1e-6;

// Scalar constants of the linear market model. The service of provider i is
// a (privacy risk, QoS) tuple; its per-consumer margin is
//   r*eps + p[i] - c*v - c*lam*eps
// and a consumer at normalized location x values it at v + t*(x - F(eps))*eps.
struct MarketParams {
  double c = 0.0;        // cost per unit of QoS
  double lam = 0.0;      // QoS-equivalent cost per unit of privacy risk
  double r = 0.0;        // revenue per unit of privacy risk
  double t = 0.0;        // consumer QoS-per-risk gain factor
  double eps_bar = 0.0;  // maximum consumer risk tolerance, > 0
  std::vector<double> p; // per-provider risk-independent revenue, size m >= 2

  int provider_count() const { return static_cast<int>(p.size()); }
  double alpha() const { return r / c - lam; }
  double c_tilde() const { return c * t * eps_bar; }
  double gap_min() const { return kGapMinScale * eps_bar; }

  // Throws InvalidParameter on any domain violation.
  void validate() const;
};

enum class DistributionKind { Uniform, TruncatedNormal };

// Law of the consumers' privacy-risk tolerance on [0, eps_bar]. The
// truncated normal is centered at eps_bar/2.
struct RiskDistribution {
  DistributionKind kind = DistributionKind::Uniform;
  double eps_bar = 0.0;
  double sigma = 0.0;  // TruncatedNormal only, > 0

  static RiskDistribution uniform(double eps_bar);
  static RiskDistribution truncated_normal(double eps_bar, double sigma);

  void validate() const;
};

// Standard normal CDF, accurate to well below 1e-7 absolute.
double standard_normal_cdf(double y);

// F(eps): fraction of consumers with tolerance at most eps. Clamps to 0 / 1
// outside [0, eps_bar].
double cdf(const RiskDistribution& dist, double eps);

// Inverse of cdf() on [0, eps_bar]; |F(result) - q| <= 1e-9.
// Throws InvalidParameter for q outside [0, 1].
double inverse_cdf(const RiskDistribution& dist, double q);

// One provider's advertised service.
struct SPStrategy {
  double eps = 0.0;  // advertised privacy risk, in [0, eps_bar]
  double v = 0.0;    // quality of service, >= 0
};

// Strategies indexed by provider identity. Identities are stable; ordering
// by risk is computed where needed, never stored.
using StrategyProfile = std::vector<SPStrategy>;

// Perceived utility of provider strategy s for the consumer at normalized
// location x in [0, 1]. May be negative (risk violation).
double consumer_utility(const MarketParams& params, const RiskDistribution& dist,
                        const SPStrategy& s, double x);

struct Threshold {
  double x = 0.0;        // indifference location, clamped to [0, 1]
  bool clamped = false;  // true when the raw value fell outside [0, 1]
};

// Location at which a consumer is indifferent between the low-risk and the
// high-risk provider. Requires low.eps + gap_min <= high.eps.
Threshold indifference_threshold(const MarketParams& params,
                                 const RiskDistribution& dist,
                                 const SPStrategy& low, const SPStrategy& high);

// Stage-3 market split for a profile already sorted by ascending risk.
// Thresholds between consecutive providers are clamped into [0, 1] and made
// nondecreasing; shares are the resulting segment lengths. eps and v hold m
// entries, thresholds m-1, shares m. Returns true when any threshold was
// clamped or reordered (corner market). No allocation; hot-path kernel.
bool stage3_split(const MarketParams& params, const RiskDistribution& dist,
                  std::span<const double> eps, std::span<const double> v,
                  std::span<double> thresholds, std::span<double> shares);

struct ShareResult {
  std::vector<double> shares;      // by provider identity; in [0,1], sum 1
  std::vector<double> thresholds;  // m-1 nondecreasing breakpoints in [0,1]
  std::vector<int> order;          // identity of the k-th lowest-risk provider
  bool clamped = false;            // corner market encountered
};

// Market shares of a separated profile (identities preserved; ties in risk
// below gap_min raise DegenerateDifferentiation).
ShareResult market_shares(const MarketParams& params, const RiskDistribution& dist,
                          const StrategyProfile& profile);

// Per-consumer margin of provider i playing s: R(eps) - C(v; eps).
double sp_margin(const MarketParams& params, int i, const SPStrategy& s);

// Total profit of provider i: margin times market share.
double sp_profit(const MarketParams& params, const RiskDistribution& dist,
                 const StrategyProfile& profile, int i);

// All providers' profits with the shares computed once.
std::vector<double> sp_profits(const MarketParams& params, const RiskDistribution& dist,
                               const StrategyProfile& profile);

}  // namespace privmkt

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

#include "privmkt/closed_form.hpp"

#include <cmath>

namespace privmkt {

namespace {

void require_two_providers(const MarketParams& params) {
  params.validate();
  if (params.provider_count() != 2)
    throw InvalidParameter("closed form requires exactly two providers");
}

}  // namespace

std::pair<double, double> derived_constants(const MarketParams& params) {
  params.validate();
  return {params.alpha(), params.c_tilde()};
}

FeasibilityReport check_feasibility(const MarketParams& params) {
  require_two_providers(params);
  const double c = params.c, t = params.t, ebar = params.eps_bar;
  const double a = params.alpha();
  const double dp = params.p[1] - params.p[0];

  FeasibilityReport rep;
  rep.ratio = 16.0 * dp / (9.0 * c * t * ebar);

  rep.cond_share.lower_margin = rep.ratio - (-1.0);
  rep.cond_share.upper_margin = 1.0 - rep.ratio;
  rep.cond_share.ok =
      rep.cond_share.lower_margin >= 0.0 && rep.cond_share.upper_margin >= 0.0;

  const double lo = (4.0 * a - 3.0 * t) / (3.0 * t);
  const double hi = (4.0 * a - t) / (3.0 * t);
  rep.cond_eps.lower_margin = rep.ratio - lo;
  rep.cond_eps.upper_margin = hi - rep.ratio;
  rep.cond_eps.ok =
      rep.cond_eps.lower_margin >= 0.0 && rep.cond_eps.upper_margin >= 0.0;

  const double lhs = std::pow(12.0 * c * a * ebar, 2) -
                     std::pow(15.0 * c * t * ebar, 2) +
                     288.0 * c * t * ebar * (params.p[1] + params.p[0]);
  const double rhs = std::pow(16.0 * dp, 2);
  rep.cond_coverage.margin = lhs - rhs;
  rep.cond_coverage.ok = rep.cond_coverage.margin >= 0.0;

  rep.all_feasible = rep.cond_share.ok && rep.cond_eps.ok && rep.cond_coverage.ok;
  return rep;
}

ClosedFormSolution solve_closed_form(const MarketParams& params) {
  require_two_providers(params);
  const double c = params.c, t = params.t, ebar = params.eps_bar;
  const double p1 = params.p[0], p2 = params.p[1];
  const double a = params.alpha();
  const double dp = p2 - p1;

  ClosedFormSolution sol;
  sol.alpha = a;
  sol.c_tilde = params.c_tilde();
  sol.eps2 = (12.0 * ebar * c * a + 15.0 * c * t * ebar - 16.0 * dp) / (24.0 * t * c);
  // eps1 and v1 deliberately use their own closed forms rather than the gap
  // relations eps2 - 3*ebar/4 and v2 - (3*ebar/4)*alpha + dp/(3c); the gap
  // laws are then checkable identities instead of construction artifacts.
  sol.eps1 = (12.0 * ebar * c * a - 3.0 * c * t * ebar - 16.0 * dp) / (24.0 * t * c);
  sol.v2 = ((2.0 * a + t) * c * a * 6.0 * ebar + (a - t) * 9.0 * c * t * ebar +
            (t - 2.0 * a) * 8.0 * p2 + (a + t) * 16.0 * p1) /
           (24.0 * c * t);
  sol.v1 = ((2.0 * a - t) * c * a * 6.0 * ebar + (a - 3.0 * t) * 3.0 * c * t * ebar +
            (t - a) * 16.0 * p2 + (2.0 * a + t) * 8.0 * p1) /
           (24.0 * c * t);
  sol.x_tau = 0.5 - 8.0 * dp / (9.0 * c * t * ebar);
  const double base = 9.0 * t * ebar / 8.0;
  const double shift = 2.0 * dp / c;
  const double scale = 4.0 * c / (27.0 * t * ebar);
  sol.pi1 = scale * (base - shift) * (base - shift);
  sol.pi2 = scale * (base + shift) * (base + shift);
  sol.feasibility = check_feasibility(params);
  return sol;
}

std::pair<double, double> stage2_qos(const MarketParams& params, double eps1,
                                     double eps2) {
  require_two_providers(params);
  if (!(eps2 - eps1 >= params.gap_min()))
    throw DegenerateDifferentiation("risk separation below gap_min");
  const double c = params.c, t = params.t, lam = params.lam, r = params.r;
  const double p1 = params.p[0], p2 = params.p[1];
  const double x1 = eps1 / params.eps_bar;
  const double x2 = eps2 / params.eps_bar;
  const double v1 = (2.0 * (r * eps1 + p1) + r * eps2 + p2) / (3.0 * c) +
                    (t * (1.0 + x1) * eps1 - lam * (eps2 + 2.0 * eps1) -
                     t * (1.0 + x2) * eps2) /
                        3.0;
  const double v2 = (2.0 * (r * eps2 + p2) + r * eps1 + p1) / (3.0 * c) +
                    (t * (2.0 - x1) * eps1 - lam * (2.0 * eps2 + eps1) -
                     t * (2.0 - x2) * eps2) /
                        3.0;
  return {v1, v2};
}

std::pair<double, double> stage1_profits(const MarketParams& params, double eps1,
                                         double eps2) {
  require_two_providers(params);
  if (!(eps2 - eps1 >= params.gap_min()))
    throw DegenerateDifferentiation("risk separation below gap_min");
  const double c = params.c, t = params.t, ebar = params.eps_bar;
  const double dp = params.p[1] - params.p[0];
  const double a = params.alpha();
  const double d = eps2 - eps1;
  const double scale = c / (9.0 * t * d);
  const double b2 = dp / c + (a + t * (2.0 * ebar - eps2 - eps1) / ebar) * d;
  const double b1 = -dp / c + (-a + t * (ebar + eps2 + eps1) / ebar) * d;
  return {scale * b1 * b1, scale * b2 * b2};
}

std::pair<double, double> stage1_foc_residuals(const MarketParams& params,
                                               double eps1, double eps2) {
  require_two_providers(params);
  if (!(eps2 - eps1 >= params.gap_min()))
    throw DegenerateDifferentiation("risk separation below gap_min");
  const double c = params.c, t = params.t, ebar = params.eps_bar;
  const double dp = params.p[1] - params.p[0];
  const double a = params.alpha();
  const double d = eps2 - eps1;
  const double res1 = (a - t * (ebar - eps2 + 3.0 * eps1) / ebar) * d - dp / c;
  const double res2 = (a + t * (2.0 * ebar - 3.0 * eps2 + eps1) / ebar) * d - dp / c;
  return {res1, res2};
}

}  // namespace privmkt

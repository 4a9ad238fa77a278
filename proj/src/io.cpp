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

#include "privmkt/io.hpp"

#include <cstdio>

namespace privmkt {

using nlohmann::json;

std::string fmt_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void to_json(json& j, const SPStrategy& s) {
  j = json{{"eps", s.eps}, {"v", s.v}};
}

void from_json(const json& j, SPStrategy& s) {
  j.at("eps").get_to(s.eps);
  j.at("v").get_to(s.v);
}

void to_json(json& j, const MarketParams& p) {
  j = json{{"c", p.c},       {"lambda", p.lam}, {"r", p.r},
           {"t", p.t},       {"eps_bar", p.eps_bar}, {"p", p.p}};
}

void from_json(const json& j, MarketParams& p) {
  j.at("c").get_to(p.c);
  j.at("lambda").get_to(p.lam);
  j.at("r").get_to(p.r);
  j.at("t").get_to(p.t);
  j.at("eps_bar").get_to(p.eps_bar);
  j.at("p").get_to(p.p);
}

void to_json(json& j, const RiskDistribution& d) {
  j = json{{"kind", d.kind == DistributionKind::Uniform ? "uniform"
                                                        : "truncated_normal"},
           {"eps_bar", d.eps_bar}};
  if (d.kind == DistributionKind::TruncatedNormal) j["sigma"] = d.sigma;
}

void from_json(const json& j, RiskDistribution& d) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "uniform") {
    d.kind = DistributionKind::Uniform;
  } else if (kind == "truncated_normal") {
    d.kind = DistributionKind::TruncatedNormal;
    j.at("sigma").get_to(d.sigma);
  } else {
    throw InvalidParameter("unknown distribution kind: " + kind);
  }
  j.at("eps_bar").get_to(d.eps_bar);
}

void to_json(json& j, const FeasibilityReport& r) {
  j = json{
      {"cond_share",
       {{"ok", r.cond_share.ok},
        {"lower_margin", r.cond_share.lower_margin},
        {"upper_margin", r.cond_share.upper_margin}}},
      {"cond_eps",
       {{"ok", r.cond_eps.ok},
        {"lower_margin", r.cond_eps.lower_margin},
        {"upper_margin", r.cond_eps.upper_margin}}},
      {"cond_coverage",
       {{"ok", r.cond_coverage.ok}, {"margin", r.cond_coverage.margin}}},
      {"ratio", r.ratio},
      {"all_feasible", r.all_feasible}};
}

void to_json(json& j, const EquilibriumOutcome& o) {
  j = json{{"method", to_string(o.method)},
           {"converged", o.converged},
           {"iterations", o.iterations},
           {"profile", o.profile},
           {"shares", o.shares},
           {"profits", o.profits},
           {"thresholds", o.thresholds}};
  if (o.feasibility) j["feasibility"] = *o.feasibility;
}

void to_json(json& j, const GridSpec& g) {
  j = json{{"eps_points", g.eps_points}, {"v_points", g.v_points}};
}

void to_json(json& j, const Certificate& c) {
  json devs = json::array();
  for (const DeviationCheck& d : c.deviations) {
    devs.push_back(json{{"sp", d.sp},
                        {"eps", d.best.eps},
                        {"v", d.best.v},
                        {"best_profit", d.best_profit},
                        {"claimed_profit", d.claimed_profit},
                        {"delta", d.delta}});
  }
  j = json{{"grid", c.grid},
           {"cert_tol", c.cert_tol},
           {"max_delta", c.max_delta},
           {"certified", c.certified},
           {"deviations", devs}};
}

json solve_document(const MarketParams& params, const RiskDistribution& dist,
                    const EquilibriumOutcome& outcome) {
  return json{{"params", params}, {"distribution", dist}, {"outcome", outcome}};
}

ProfileDocument parse_profile_document(const json& j) {
  ProfileDocument doc;
  j.at("params").get_to(doc.params);
  j.at("distribution").get_to(doc.dist);
  const json& src = j.contains("profile") ? j.at("profile")
                                          : j.at("outcome").at("profile");
  doc.profile = src.get<StrategyProfile>();
  doc.params.validate();
  doc.dist.validate();
  return doc;
}

}  // namespace privmkt

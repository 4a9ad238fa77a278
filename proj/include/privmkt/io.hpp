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

#include <string>

#include <json.hpp>

#include "privmkt/numeric.hpp"
#include "privmkt/oracle.hpp"

namespace privmkt {

// Decimal rendering of a binary64 value that parses back bit-exactly.
std::string fmt_double(double x);

void to_json(nlohmann::json& j, const SPStrategy& s);
void from_json(const nlohmann::json& j, SPStrategy& s);

void to_json(nlohmann::json& j, const MarketParams& p);
void from_json(const nlohmann::json& j, MarketParams& p);

void to_json(nlohmann::json& j, const RiskDistribution& d);
void from_json(const nlohmann::json& j, RiskDistribution& d);

void to_json(nlohmann::json& j, const FeasibilityReport& r);
void to_json(nlohmann::json& j, const EquilibriumOutcome& o);
void to_json(nlohmann::json& j, const Certificate& c);
void to_json(nlohmann::json& j, const GridSpec& g);

// The document written by the solve command and consumed by verify:
// {"params": ..., "distribution": ..., "outcome": {..., "profile": [...]}}.
// Verify also accepts a bare {"params", "distribution", "profile"} object.
nlohmann::json solve_document(const MarketParams& params,
                              const RiskDistribution& dist,
                              const EquilibriumOutcome& outcome);

struct ProfileDocument {
  MarketParams params;
  RiskDistribution dist;
  StrategyProfile profile;
};

ProfileDocument parse_profile_document(const nlohmann::json& j);

}  // namespace privmkt

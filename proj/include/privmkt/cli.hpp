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

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "privmkt/numeric.hpp"
#include "privmkt/oracle.hpp"

namespace privmkt::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;           // bad input or solver failure
inline constexpr int kExitInfeasible = 2;      // solved, with a warning
inline constexpr int kExitNotCertified = 3;    // certification failed

enum class OutputFormat { Csv, Json };

struct SweepAxis {
  std::string name;
  double start = 0.0;
  double stop = 0.0;
  int steps = 0;
};

// Fully resolved invocation of one subcommand. `settings` is the flat
// key/value map merged from the config file and --set overrides.
struct RunConfig {
  std::string command;  // solve | sweep | trace | verify
  nlohmann::json settings = nlohmann::json::object();
  std::vector<SweepAxis> axes;
  OutputFormat format = OutputFormat::Json;
  bool certify = false;
  std::string profile_path;  // verify input document
  int threads = 0;           // 0: hardware concurrency (capped by env)
};

// "name=value" override; numbers parse as numbers, everything else as text.
void apply_set(nlohmann::json& settings, const std::string& assignment);

// "name=start:stop:steps".
SweepAxis parse_axis(const std::string& text);

// Builders from the flat settings map. Throw InvalidParameter with the
// offending key in the message.
MarketParams params_from_settings(const nlohmann::json& s);
RiskDistribution dist_from_settings(const nlohmann::json& s, double eps_bar);
SolverConfig solver_from_settings(const nlohmann::json& s);
GridSpec grid_from_settings(const nlohmann::json& s);
double cert_tol_from_settings(const nlohmann::json& s);

// Worker cap: explicit config, then PRIVMKT_THREADS, then hardware.
int resolve_threads(int requested);

// Subcommand drivers; results go to `out`, diagnostics to `err`.
int run_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int run_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int run_trace(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int run_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Dispatch on cfg.command; exceptions are mapped to kExitError.
int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace privmkt::cli

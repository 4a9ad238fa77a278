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

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "privmkt/cli.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> sets;
  std::string out_path;
  std::string format;
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path,
                  "JSON config file with flat key=value parameters")
      ->check(CLI::ExistingFile);
  cmd->add_option("--set", args.sets,
                  "override a parameter, e.g. --set t=0.7 or --set p2=0.8");
  cmd->add_option("--out", args.out_path, "write output to this file");
  cmd->add_option("--format", args.format, "output format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--threads", args.threads,
                  "worker cap (also capped by PRIVMKT_THREADS)");
}

int build_config(const CommonArgs& args, const std::string& command,
                 privmkt::cli::OutputFormat default_format,
                 privmkt::cli::RunConfig& cfg) {
  cfg.command = command;
  cfg.threads = args.threads;
  if (!args.config_path.empty()) {
    std::ifstream in(args.config_path);
    try {
      in >> cfg.settings;
    } catch (const std::exception& ex) {
      std::cerr << "error: bad config file: " << ex.what() << '\n';
      return privmkt::cli::kExitError;
    }
    if (!cfg.settings.is_object()) {
      std::cerr << "error: config file must hold a JSON object\n";
      return privmkt::cli::kExitError;
    }
  }
  for (const std::string& s : args.sets) privmkt::cli::apply_set(cfg.settings, s);
  cfg.format = default_format;
  if (args.format == "csv") cfg.format = privmkt::cli::OutputFormat::Csv;
  if (args.format == "json") cfg.format = privmkt::cli::OutputFormat::Json;
  return -1;
}

int dispatch(const privmkt::cli::RunConfig& cfg, const std::string& out_path) {
  if (out_path.empty()) return privmkt::cli::run(cfg, std::cout, std::cerr);
  std::ofstream out(out_path);
  if (!out) {
    std::cerr << "error: cannot open output file: " << out_path << '\n';
    return privmkt::cli::kExitError;
  }
  return privmkt::cli::run(cfg, out, std::cerr);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"privmkt: equilibrium solver for privacy-differentiated free services"};
  app.require_subcommand(1);

  CommonArgs solve_args, sweep_args, trace_args, verify_args;
  bool solve_certify = false;
  std::vector<std::string> axes;
  std::string profile_path;

  CLI::App* solve = app.add_subcommand("solve", "solve one market instance");
  add_common(solve, solve_args);
  solve->add_flag("--certify", solve_certify,
                  "run the brute-force deviation check on the solution");

  CLI::App* sweep = app.add_subcommand("sweep", "solve over a parameter grid");
  add_common(sweep, sweep_args);
  sweep->add_option("--axis", axes,
                    "sweep axis name=start:stop:steps (one or two)")
      ->required();

  CLI::App* trace = app.add_subcommand("trace", "emit the best-response iteration");
  add_common(trace, trace_args);

  CLI::App* verify = app.add_subcommand("verify", "certify a strategy profile");
  add_common(verify, verify_args);
  verify->add_option("--profile", profile_path,
                     "JSON document from `solve` (or {params,distribution,profile})")
      ->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    privmkt::cli::RunConfig cfg;
    int rc = -1;
    std::string out_path;
    if (solve->parsed()) {
      rc = build_config(solve_args, "solve", privmkt::cli::OutputFormat::Json, cfg);
      cfg.certify = solve_certify;
      out_path = solve_args.out_path;
    } else if (sweep->parsed()) {
      rc = build_config(sweep_args, "sweep", privmkt::cli::OutputFormat::Csv, cfg);
      for (const std::string& a : axes) cfg.axes.push_back(privmkt::cli::parse_axis(a));
      out_path = sweep_args.out_path;
    } else if (trace->parsed()) {
      rc = build_config(trace_args, "trace", privmkt::cli::OutputFormat::Csv, cfg);
      out_path = trace_args.out_path;
    } else if (verify->parsed()) {
      rc = build_config(verify_args, "verify", privmkt::cli::OutputFormat::Json, cfg);
      cfg.profile_path = profile_path;
      out_path = verify_args.out_path;
    }
    if (rc >= 0) return rc;
    return dispatch(cfg, out_path);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return privmkt::cli::kExitError;
  }
}

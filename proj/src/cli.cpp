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

#include "privmkt/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "privmkt/io.hpp"

namespace privmkt::cli {

using nlohmann::json;

namespace {

double require_number(const json& s, const char* key) {
  if (!s.contains(key))
    throw InvalidParameter(std::string("missing required parameter: ") + key);
  if (!s.at(key).is_number())
    throw InvalidParameter(std::string("parameter must be numeric: ") + key);
  return s.at(key).get<double>();
}

double number_or(const json& s, const char* key, double fallback) {
  return s.contains(key) ? require_number(s, key) : fallback;
}

int int_or(const json& s, const char* key, int fallback) {
  if (!s.contains(key)) return fallback;
  return static_cast<int>(require_number(s, key));
}

bool known_axis_name(const std::string& name, int m) {
  if (name == "c" || name == "lambda" || name == "r" || name == "t" ||
      name == "eps_bar" || name == "sigma")
    return true;
  if (name.size() > 1 && name[0] == 'p') {
    const int idx = std::atoi(name.c_str() + 1);
    return idx >= 1 && idx <= m;
  }
  return false;
}

void apply_axis_value(json& s, const std::string& name, double value) {
  if (name.size() > 1 && name[0] == 'p' && std::isdigit(name[1])) {
    const size_t idx = static_cast<size_t>(std::atoi(name.c_str() + 1));
    json& p = s["p"];
    while (p.size() < idx) p.push_back(0.0);
    p[idx - 1] = value;
  } else {
    s[name] = value;
  }
}

std::string csv_bool(bool b) { return b ? "true" : "false"; }

// One grid point of a sweep.
struct SweepRow {
  std::vector<double> axis_values;
  EquilibriumOutcome outcome;
  bool has_outcome = false;
  bool has_feasibility = false;
  bool feasible = false;
  std::string error;
};

void write_sweep_header(std::ostream& out, const std::vector<SweepAxis>& axes,
                        int m) {
  bool first = true;
  auto col = [&](const std::string& name) {
    if (!first) out << ',';
    out << name;
    first = false;
  };
  for (const SweepAxis& a : axes) col(a.name);
  for (int i = 1; i <= m; ++i) col("eps_" + std::to_string(i));
  for (int i = 1; i <= m; ++i) col("v_" + std::to_string(i));
  for (int i = 1; i <= m; ++i) col("share_" + std::to_string(i));
  for (int i = 1; i <= m; ++i) col("profit_" + std::to_string(i));
  col("method");
  col("converged");
  col("feasible");
  col("error");
  out << '\n';
}

void write_sweep_row(std::ostream& out, const SweepRow& row, int m) {
  bool first = true;
  auto col = [&](const std::string& value) {
    if (!first) out << ',';
    out << value;
    first = false;
  };
  for (double v : row.axis_values) col(fmt_double(v));
  if (row.has_outcome) {
    for (int i = 0; i < m; ++i) col(fmt_double(row.outcome.profile[i].eps));
    for (int i = 0; i < m; ++i) col(fmt_double(row.outcome.profile[i].v));
    for (int i = 0; i < m; ++i) col(fmt_double(row.outcome.shares[i]));
    for (int i = 0; i < m; ++i) col(fmt_double(row.outcome.profits[i]));
    col(to_string(row.outcome.method));
    col(csv_bool(row.outcome.converged));
    col(row.has_feasibility ? csv_bool(row.feasible) : "");
  } else {
    for (int i = 0; i < 4 * m; ++i) col("");
    col("");
    col("");
    col("");
  }
  col(row.error);
  out << '\n';
}

std::string describe_infeasibility(const FeasibilityReport& rep) {
  std::ostringstream msg;
  msg << "closed-form existence conditions not satisfied:";
  if (!rep.cond_share.ok)
    msg << " share-band condition violated (ratio " << fmt_double(rep.ratio)
        << " outside [-1, 1]);";
  if (!rep.cond_eps.ok)
    msg << " risk-range condition violated (ratio " << fmt_double(rep.ratio)
        << ", lower margin " << fmt_double(rep.cond_eps.lower_margin)
        << ", upper margin " << fmt_double(rep.cond_eps.upper_margin) << ");";
  if (!rep.cond_coverage.ok)
    msg << " coverage condition violated (margin "
        << fmt_double(rep.cond_coverage.margin) << ");";
  return msg.str();
}

}  // namespace

void apply_set(json& settings, const std::string& assignment) {
  const size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw InvalidParameter("--set expects name=value: " + assignment);
  const std::string name = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = value;  // plain string (e.g. dist=uniform)
  }
  if (name.size() > 1 && name[0] == 'p' &&
      std::all_of(name.begin() + 1, name.end(),
                  [](unsigned char ch) { return std::isdigit(ch); })) {
    const size_t idx = static_cast<size_t>(std::atoi(name.c_str() + 1));
    if (idx == 0) throw InvalidParameter("provider indices start at 1: " + name);
    if (!parsed.is_number())
      throw InvalidParameter("p values must be numeric: " + assignment);
    json& p = settings["p"];
    if (!p.is_array()) p = json::array();
    while (p.size() < idx) p.push_back(0.0);
    p[idx - 1] = parsed.get<double>();
    return;
  }
  settings[name] = parsed;
}

SweepAxis parse_axis(const std::string& text) {
  const size_t eq = text.find('=');
  if (eq == std::string::npos || eq == 0)
    throw InvalidParameter("--axis expects name=start:stop:steps: " + text);
  SweepAxis axis;
  axis.name = text.substr(0, eq);
  const std::string rest = text.substr(eq + 1);
  const size_t c1 = rest.find(':');
  const size_t c2 = rest.find(':', c1 == std::string::npos ? c1 : c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos)
    throw InvalidParameter("--axis expects name=start:stop:steps: " + text);
  try {
    axis.start = std::stod(rest.substr(0, c1));
    axis.stop = std::stod(rest.substr(c1 + 1, c2 - c1 - 1));
    axis.steps = std::stoi(rest.substr(c2 + 1));
  } catch (const std::exception&) {
    throw InvalidParameter("malformed --axis values: " + text);
  }
  if (axis.steps < 2) throw InvalidParameter("axis steps must be >= 2: " + text);
  return axis;
}

MarketParams params_from_settings(const json& s) {
  MarketParams p;
  p.c = require_number(s, "c");
  p.lam = require_number(s, "lambda");
  p.r = require_number(s, "r");
  p.t = require_number(s, "t");
  p.eps_bar = require_number(s, "eps_bar");
  if (!s.contains("p") || !s.at("p").is_array() || s.at("p").size() < 2)
    throw InvalidParameter(
        "missing required parameter: p (array of per-provider revenues, or "
        "p1=..., p2=..., ...)");
  s.at("p").get_to(p.p);
  p.validate();
  return p;
}

RiskDistribution dist_from_settings(const json& s, double eps_bar) {
  const std::string kind =
      s.contains("dist") ? s.at("dist").get<std::string>() : "uniform";
  if (kind == "uniform") return RiskDistribution::uniform(eps_bar);
  if (kind == "truncated_normal" || kind == "tnormal")
    return RiskDistribution::truncated_normal(eps_bar,
                                              require_number(s, "sigma"));
  throw InvalidParameter("unknown distribution: " + kind);
}

SolverConfig solver_from_settings(const json& s) {
  SolverConfig cfg;
  cfg.eps_tol = number_or(s, "eps_tol", cfg.eps_tol);
  cfg.max_iters = int_or(s, "max_iters", cfg.max_iters);
  cfg.br_grid = int_or(s, "br_grid", cfg.br_grid);
  cfg.br_refine_tol = number_or(s, "br_refine_tol", cfg.br_refine_tol);
  cfg.cycle_window = int_or(s, "cycle_window", cfg.cycle_window);
  cfg.gap_min = number_or(s, "gap_min", cfg.gap_min);
  cfg.damping = number_or(s, "damping", cfg.damping);
  if (s.contains("initial_eps")) s.at("initial_eps").get_to(cfg.initial_eps);
  cfg.validate();
  return cfg;
}

GridSpec grid_from_settings(const json& s) {
  GridSpec g;
  g.eps_points = int_or(s, "grid_eps", g.eps_points);
  g.v_points = int_or(s, "grid_v", g.v_points);
  return g;
}

double cert_tol_from_settings(const json& s) {
  return number_or(s, "cert_tol", 1e-3);
}

int resolve_threads(int requested) {
  int threads = requested > 0 ? requested
                              : static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  if (const char* env = std::getenv("PRIVMKT_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) threads = std::min(threads, cap);
  }
  return threads;
}

int run_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const MarketParams params = params_from_settings(cfg.settings);
  const RiskDistribution dist = dist_from_settings(cfg.settings, params.eps_bar);
  const SolverConfig solver = solver_from_settings(cfg.settings);

  const EquilibriumOutcome outcome = solve_spne(params, dist, solver);
  json doc = solve_document(params, dist, outcome);

  bool certified = true;
  if (cfg.certify) {
    StrategyProfile profile = outcome.profile;
    const Certificate cert =
        certify(params, dist, profile, grid_from_settings(cfg.settings),
                cert_tol_from_settings(cfg.settings));
    doc["certificate"] = cert;
    certified = cert.certified;
  }

  if (cfg.format == OutputFormat::Json) {
    out << doc.dump(2) << '\n';
  } else {
    std::vector<SweepAxis> no_axes;
    write_sweep_header(out, no_axes, params.provider_count());
    SweepRow row;
    row.outcome = outcome;
    row.has_outcome = true;
    if (outcome.feasibility) {
      row.has_feasibility = true;
      row.feasible = outcome.feasibility->all_feasible;
    }
    write_sweep_row(out, row, params.provider_count());
  }

  const bool infeasible =
      outcome.feasibility && !outcome.feasibility->all_feasible;
  if (infeasible) err << "warning: " << describe_infeasibility(*outcome.feasibility)
                      << " computed numerically instead\n";
  if (!outcome.converged)
    err << "warning: best-response iteration did not converge\n";
  if (!certified) return kExitNotCertified;
  if (infeasible || !outcome.converged) return kExitInfeasible;
  return kExitOk;
}

int run_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.axes.empty() || cfg.axes.size() > 2)
    throw InvalidParameter("sweep expects one or two --axis arguments");

  // The full parameter set must be present up front so every grid point
  // fails or succeeds on its own merits, not on missing keys.
  const MarketParams base = params_from_settings(cfg.settings);
  (void)dist_from_settings(cfg.settings, base.eps_bar);
  const SolverConfig solver = solver_from_settings(cfg.settings);
  for (const SweepAxis& a : cfg.axes)
    if (!known_axis_name(a.name, base.provider_count()))
      throw InvalidParameter("unknown sweep axis: " + a.name);

  const int outer = cfg.axes[0].steps;
  const int inner = cfg.axes.size() == 2 ? cfg.axes[1].steps : 1;
  const int total = outer * inner;
  std::vector<SweepRow> rows(total);

  auto axis_value = [](const SweepAxis& a, int k) {
    return a.start + (a.stop - a.start) * static_cast<double>(k) / (a.steps - 1);
  };

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int idx = next.fetch_add(1); idx < total; idx = next.fetch_add(1)) {
      SweepRow& row = rows[idx];
      json point = cfg.settings;
      const int k0 = idx / inner;
      apply_axis_value(point, cfg.axes[0].name, axis_value(cfg.axes[0], k0));
      row.axis_values.push_back(axis_value(cfg.axes[0], k0));
      if (cfg.axes.size() == 2) {
        const int k1 = idx % inner;
        apply_axis_value(point, cfg.axes[1].name, axis_value(cfg.axes[1], k1));
        row.axis_values.push_back(axis_value(cfg.axes[1], k1));
      }
      try {
        const MarketParams params = params_from_settings(point);
        const RiskDistribution dist = dist_from_settings(point, params.eps_bar);
        row.outcome = solve_spne(params, dist, solver);
        row.has_outcome = true;
        if (row.outcome.feasibility) {
          row.has_feasibility = true;
          row.feasible = row.outcome.feasibility->all_feasible;
        }
      } catch (const std::exception& ex) {
        row.error = ex.what();
      }
    }
  };

  const int threads = std::min(resolve_threads(cfg.threads), total);
  std::vector<std::thread> pool;
  for (int i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (std::thread& th : pool) th.join();

  int errors = 0;
  for (const SweepRow& row : rows)
    if (!row.error.empty()) ++errors;
  if (errors > 0) err << "warning: " << errors << " of " << total
                      << " grid points failed (see error column)\n";

  if (cfg.format == OutputFormat::Json) {
    json arr = json::array();
    for (const SweepRow& row : rows) {
      json r;
      for (size_t a = 0; a < cfg.axes.size(); ++a)
        r[cfg.axes[a].name] = row.axis_values[a];
      if (row.has_outcome) r["outcome"] = row.outcome;
      if (!row.error.empty()) r["error"] = row.error;
      arr.push_back(std::move(r));
    }
    out << arr.dump(2) << '\n';
  } else {
    write_sweep_header(out, cfg.axes, base.provider_count());
    for (const SweepRow& row : rows)
      write_sweep_row(out, row, base.provider_count());
  }
  return kExitOk;
}

int run_trace(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const MarketParams params = params_from_settings(cfg.settings);
  const RiskDistribution dist = dist_from_settings(cfg.settings, params.eps_bar);
  const SolverConfig solver = solver_from_settings(cfg.settings);
  const int m = params.provider_count();

  const IbrResult res = iterate_best_response(params, dist, solver);

  if (cfg.format == OutputFormat::Json) {
    json rounds = json::array();
    for (size_t k = 0; k < res.trace.rounds.size(); ++k) {
      const IterationRecord& rec = res.trace.rounds[k];
      rounds.push_back(json{{"iteration", k + 1},
                            {"eps", rec.eps},
                            {"v", rec.v},
                            {"profit", rec.profit}});
    }
    const json doc{{"rounds", rounds},
                   {"termination", to_string(res.trace.termination)},
                   {"cycle_length", res.trace.cycle_length},
                   {"iterations", res.outcome.iterations}};
    out << doc.dump(2) << '\n';
  } else {
    out << "iteration,sp,eps,v,profit\n";
    for (size_t k = 0; k < res.trace.rounds.size(); ++k) {
      const IterationRecord& rec = res.trace.rounds[k];
      for (int i = 0; i < m; ++i) {
        out << (k + 1) << ',' << (i + 1) << ',' << fmt_double(rec.eps[i]) << ','
            << fmt_double(rec.v[i]) << ',' << fmt_double(rec.profit[i]) << '\n';
      }
    }
    out << "# termination=" << to_string(res.trace.termination)
        << " cycle_length=" << res.trace.cycle_length
        << " iterations=" << res.outcome.iterations << '\n';
  }

  if (res.trace.termination != Termination::Converged)
    err << "note: iteration ended " << to_string(res.trace.termination) << '\n';
  return kExitOk;
}

int run_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  ProfileDocument doc;
  if (!cfg.profile_path.empty()) {
    std::ifstream in(cfg.profile_path);
    if (!in) throw InvalidParameter("cannot open profile file: " + cfg.profile_path);
    json j;
    in >> j;
    doc = parse_profile_document(j);
  } else {
    doc.params = params_from_settings(cfg.settings);
    doc.dist = dist_from_settings(cfg.settings, doc.params.eps_bar);
    const EquilibriumOutcome outcome =
        solve_spne(doc.params, doc.dist, solver_from_settings(cfg.settings));
    doc.profile = outcome.profile;
    err << "note: no profile file given; verifying a fresh solve\n";
  }

  const Certificate cert =
      certify(doc.params, doc.dist, doc.profile, grid_from_settings(cfg.settings),
              cert_tol_from_settings(cfg.settings));

  if (cfg.format == OutputFormat::Json) {
    json j{{"params", doc.params},
           {"distribution", doc.dist},
           {"profile", doc.profile},
           {"certificate", cert}};
    out << j.dump(2) << '\n';
  } else {
    out << "sp,best_eps,best_v,best_profit,claimed_profit,delta\n";
    for (const DeviationCheck& d : cert.deviations) {
      out << (d.sp + 1) << ',' << fmt_double(d.best.eps) << ','
          << fmt_double(d.best.v) << ',' << fmt_double(d.best_profit) << ','
          << fmt_double(d.claimed_profit) << ',' << fmt_double(d.delta) << '\n';
    }
    out << "# certified=" << csv_bool(cert.certified)
        << " max_delta=" << fmt_double(cert.max_delta) << '\n';
  }
  return cert.certified ? kExitOk : kExitNotCertified;
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (cfg.command == "solve") return run_solve(cfg, out, err);
    if (cfg.command == "sweep") return run_sweep(cfg, out, err);
    if (cfg.command == "trace") return run_trace(cfg, out, err);
    if (cfg.command == "verify") return run_verify(cfg, out, err);
    err << "error: unknown command: " << cfg.command << '\n';
    return kExitError;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitError;
  }
}

}  // namespace privmkt::cli

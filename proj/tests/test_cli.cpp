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

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "privmkt/io.hpp"
#include "test_util.hpp"

using namespace privmkt;
using nlohmann::json;

namespace {

json worked_settings(double t = 0.7, double eps_bar = 5.0) {
  return json{{"c", 0.5},      {"lambda", 0.75},     {"r", 0.7}, {"t", t},
              {"eps_bar", eps_bar}, {"p", {0.4, 0.8}}};
}

cli::RunConfig make_config(const std::string& command, const json& settings) {
  cli::RunConfig cfg;
  cfg.command = command;
  cfg.settings = settings;
  return cfg;
}

struct RunCapture {
  int exit_code;
  std::string out;
  std::string err;
};

RunCapture run_cfg(const cli::RunConfig& cfg) {
  std::ostringstream out, err;
  const int rc = cli::run(cfg, out, err);
  return {rc, out.str(), err.str()};
}

}  // namespace

TEST_CASE("settings parsing") {
  json s = json::object();
  cli::apply_set(s, "t=0.7");
  cli::apply_set(s, "p1=0.4");
  cli::apply_set(s, "p2=0.8");
  cli::apply_set(s, "dist=uniform");
  CHECK(s["t"] == 0.7);
  CHECK(s["p"][0] == 0.4);
  CHECK(s["p"][1] == 0.8);
  CHECK(s["dist"] == "uniform");
  CHECK_THROWS_AS(cli::apply_set(s, "novalue"), InvalidParameter);
  CHECK_THROWS_AS(cli::apply_set(s, "p0=1.0"), InvalidParameter);

  const cli::SweepAxis axis = cli::parse_axis("eps_bar=3:5:5");
  CHECK(axis.name == "eps_bar");
  CHECK(axis.start == 3.0);
  CHECK(axis.stop == 5.0);
  CHECK(axis.steps == 5);
  CHECK_THROWS_AS(cli::parse_axis("eps_bar=3:5:1"), InvalidParameter);
  CHECK_THROWS_AS(cli::parse_axis("eps_bar=3-5-5"), InvalidParameter);
}

TEST_CASE("worker caps") {
  const char* saved = std::getenv("PRIVMKT_THREADS");
  setenv("PRIVMKT_THREADS", "2", 1);
  CHECK(cli::resolve_threads(8) == 2);
  CHECK(cli::resolve_threads(1) == 1);
  unsetenv("PRIVMKT_THREADS");
  CHECK(cli::resolve_threads(8) == 8);
  CHECK(cli::resolve_threads(0) >= 1);
  if (saved) setenv("PRIVMKT_THREADS", saved, 1);
}

TEST_CASE("solve command") {
  SUBCASE("feasible instance emits the closed form and exits 0") {
    const RunCapture r = run_cfg(make_config("solve", worked_settings()));
    CHECK(r.exit_code == cli::kExitOk);
    const json doc = json::parse(r.out);
    CHECK(doc["outcome"]["method"] == "closed_form");
    CHECK(doc["outcome"]["profile"][0]["eps"].get<double>() ==
          doctest::Approx(testing::kEps1Star).epsilon(1e-9));
    CHECK(doc["outcome"]["profile"][1]["eps"].get<double>() ==
          doctest::Approx(testing::kEps2Star).epsilon(1e-9));
    CHECK(doc["outcome"]["shares"][0].get<double>() ==
          doctest::Approx(testing::kXTauStar).epsilon(1e-9));

    // Output parses back losslessly as a verification input.
    const ProfileDocument parsed = parse_profile_document(doc);
    CHECK(parsed.profile[1].v ==
          doc["outcome"]["profile"][1]["v"].get<double>());
  }

  SUBCASE("infeasible instance warns, names the condition, exits 2") {
    const RunCapture r = run_cfg(make_config("solve", worked_settings(0.5)));
    CHECK(r.exit_code == cli::kExitInfeasible);
    CHECK(r.err.find("risk-range condition") != std::string::npos);
    const json doc = json::parse(r.out);
    CHECK(doc["outcome"]["method"] == "numeric");
    CHECK(doc["outcome"]["feasibility"]["all_feasible"] == false);
  }

  SUBCASE("missing parameters exit 1") {
    json s = worked_settings();
    s.erase("eps_bar");
    const RunCapture r = run_cfg(make_config("solve", s));
    CHECK(r.exit_code == cli::kExitError);
    CHECK(r.err.find("eps_bar") != std::string::npos);
  }

  SUBCASE("certification flag drives the exit code") {
    cli::RunConfig good = make_config("solve", worked_settings());
    good.certify = true;
    good.settings["grid_eps"] = 150;
    good.settings["grid_v"] = 150;
    const RunCapture ok = run_cfg(good);
    CHECK(ok.exit_code == cli::kExitOk);
    CHECK(json::parse(ok.out)["certificate"]["certified"] == true);

    json s = worked_settings();
    s["p"] = {0.4, 0.45, 0.8};
    s["initial_eps"] = {2.5, 10.0 / 3.0, 3.75};
    s["max_iters"] = 25;
    s["grid_eps"] = 120;
    s["grid_v"] = 120;
    cli::RunConfig bad = make_config("solve", s);
    bad.certify = true;
    const RunCapture failed = run_cfg(bad);
    CHECK(failed.exit_code == cli::kExitNotCertified);
    CHECK(json::parse(failed.out)["certificate"]["certified"] == false);
  }

  SUBCASE("csv format uses the sweep schema") {
    cli::RunConfig cfg = make_config("solve", worked_settings());
    cfg.format = cli::OutputFormat::Csv;
    const RunCapture r = run_cfg(cfg);
    CHECK(r.exit_code == cli::kExitOk);
    CHECK(r.out.rfind("eps_1,eps_2,v_1,v_2,share_1,share_2,profit_1,profit_2,"
                      "method,converged,feasible,error\n",
                      0) == 0);
  }
}

TEST_CASE("sweep command") {
  cli::RunConfig cfg = make_config("sweep", worked_settings());
  cfg.format = cli::OutputFormat::Csv;
  cfg.axes = {cli::parse_axis("eps_bar=3:5:5")};

  SUBCASE("emits one row per grid point with the documented header") {
    const RunCapture r = run_cfg(cfg);
    CHECK(r.exit_code == cli::kExitOk);
    std::istringstream lines(r.out);
    std::string header;
    std::getline(lines, header);
    CHECK(header ==
          "eps_bar,eps_1,eps_2,v_1,v_2,share_1,share_2,profit_1,profit_2,"
          "method,converged,feasible,error");
    int rows = 0;
    std::string line;
    while (std::getline(lines, line))
      if (!line.empty()) ++rows;
    CHECK(rows == 5);
  }

  SUBCASE("byte-identical output across runs and thread counts") {
    cfg.axes.push_back(cli::parse_axis("t=0.59:0.85:3"));
    cfg.threads = 1;
    const RunCapture serial = run_cfg(cfg);
    cfg.threads = 4;
    const RunCapture parallel = run_cfg(cfg);
    CHECK(serial.exit_code == cli::kExitOk);
    CHECK(serial.out == parallel.out);
    const RunCapture repeat = run_cfg(cfg);
    CHECK(repeat.out == parallel.out);
  }

  SUBCASE("unknown axis names are rejected") {
    cfg.axes = {cli::parse_axis("bogus=1:2:2")};
    const RunCapture r = run_cfg(cfg);
    CHECK(r.exit_code == cli::kExitError);
    CHECK(r.err.find("unknown sweep axis") != std::string::npos);
  }

  SUBCASE("per-point failures land in the error column") {
    // Sweeping t through zero makes individual points invalid.
    cfg.axes = {cli::parse_axis("t=-0.1:0.7:2")};
    const RunCapture r = run_cfg(cfg);
    CHECK(r.exit_code == cli::kExitOk);
    CHECK(r.out.find("t must be positive") != std::string::npos);
  }
}

TEST_CASE("trace command") {
  json s = worked_settings();
  s["p"] = {0.4, 0.45, 0.8};
  s["initial_eps"] = {2.5, 10.0 / 3.0, 3.75};

  SUBCASE("a one-round cap emits one round and a footer") {
    json s1 = s;
    s1["max_iters"] = 1;
    cli::RunConfig cfg = make_config("trace", s1);
    cfg.format = cli::OutputFormat::Csv;
    const RunCapture r = run_cfg(cfg);
    CHECK(r.exit_code == cli::kExitOk);
    std::istringstream lines(r.out);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "iteration,sp,eps,v,profit");
    int data_rows = 0;
    std::string footer;
    while (std::getline(lines, line)) {
      if (!line.empty() && line[0] == '#')
        footer = line;
      else if (!line.empty())
        ++data_rows;
    }
    CHECK(data_rows == 3);
    CHECK(footer.find("termination=max_iters") != std::string::npos);
  }

  SUBCASE("the stacked three-provider start oscillates") {
    json s2 = s;
    s2["max_iters"] = 40;
    cli::RunConfig cfg = make_config("trace", s2);
    cfg.format = cli::OutputFormat::Json;
    const RunCapture r = run_cfg(cfg);
    CHECK(r.exit_code == cli::kExitOk);
    const json doc = json::parse(r.out);
    CHECK(doc["termination"] == "oscillating");
    CHECK(doc["rounds"].size() == 40);
  }

  SUBCASE("a feasible two-provider market converges onto the closed form") {
    cli::RunConfig cfg = make_config("trace", worked_settings());
    cfg.format = cli::OutputFormat::Json;
    const RunCapture r = run_cfg(cfg);
    CHECK(r.exit_code == cli::kExitOk);
    const json doc = json::parse(r.out);
    CHECK(doc["termination"] == "converged");
    const json last = doc["rounds"].back();
    CHECK(last["eps"][0].get<double>() ==
          doctest::Approx(testing::kEps1Star).epsilon(1e-4));
    CHECK(last["eps"][1].get<double>() ==
          doctest::Approx(testing::kEps2Star).epsilon(1e-4));
  }
}

TEST_CASE("verify command") {
  const std::string dir = std::getenv("PRIVMKT_TEST_TMPDIR")
                              ? std::getenv("PRIVMKT_TEST_TMPDIR")
                              : "/tmp";

  // Produce a solve document to feed back in.
  const RunCapture solved = run_cfg(make_config("solve", worked_settings()));
  REQUIRE(solved.exit_code == cli::kExitOk);

  SUBCASE("round trip through a file certifies") {
    const std::string path = dir + "/privmkt_verify_ok.json";
    {
      std::ofstream f(path);
      f << solved.out;
    }
    cli::RunConfig cfg = make_config("verify", json::object());
    cfg.profile_path = path;
    cfg.settings["grid_eps"] = 200;
    cfg.settings["grid_v"] = 200;
    const RunCapture r = run_cfg(cfg);
    CHECK(r.exit_code == cli::kExitOk);
    const json doc = json::parse(r.out);
    CHECK(doc["certificate"]["certified"] == true);
  }

  SUBCASE("a perturbed profile fails with exit 3") {
    json doc = json::parse(solved.out);
    doc["outcome"]["profile"][0]["v"] =
        doc["outcome"]["profile"][0]["v"].get<double>() + 0.5;
    const std::string path = dir + "/privmkt_verify_bad.json";
    {
      std::ofstream f(path);
      f << doc.dump();
    }
    cli::RunConfig cfg = make_config("verify", json::object());
    cfg.profile_path = path;
    cfg.settings["grid_eps"] = 200;
    cfg.settings["grid_v"] = 200;
    const RunCapture r = run_cfg(cfg);
    CHECK(r.exit_code == cli::kExitNotCertified);
  }

  SUBCASE("coincident risks are a degenerate input, exit 1") {
    json doc = json::parse(solved.out);
    doc["outcome"]["profile"][0]["eps"] = 2.0;
    doc["outcome"]["profile"][1]["eps"] = 2.0;
    const std::string path = dir + "/privmkt_verify_degenerate.json";
    {
      std::ofstream f(path);
      f << doc.dump();
    }
    cli::RunConfig cfg = make_config("verify", json::object());
    cfg.profile_path = path;
    const RunCapture r = run_cfg(cfg);
    CHECK(r.exit_code == cli::kExitError);
    CHECK(r.err.find("gap_min") != std::string::npos);
  }
}

#ifdef PRIVMKT_CLI_PATH
TEST_CASE("binary end to end") {
  const std::string bin = PRIVMKT_CLI_PATH;
  const std::string dir = std::getenv("PRIVMKT_TEST_TMPDIR")
                              ? std::getenv("PRIVMKT_TEST_TMPDIR")
                              : "/tmp";
  const std::string base =
      bin +
      " solve --set c=0.5 --set lambda=0.75 --set r=0.7 --set eps_bar=5"
      " --set p1=0.4 --set p2=0.8";

  auto run_shell = [](const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  };

  CHECK(run_shell(base + " --set t=0.7 --out " + dir +
                  "/privmkt_e2e.json 2>/dev/null") == 0);
  CHECK(run_shell(base + " --set t=0.5 --out /dev/null 2>/dev/null") == 2);
  CHECK(run_shell(bin + " solve --set t=0.7 2>/dev/null") == 1);
  CHECK(run_shell(bin + " --help >/dev/null 2>&1") == 0);
  CHECK(run_shell(bin + " verify --profile " + dir +
                  "/privmkt_e2e.json --set grid_eps=150 --set grid_v=150"
                  " --out /dev/null 2>/dev/null") == 0);
}
#endif

// Copyright 2026 The cbfform Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// cbfform command-line front end. Talks to the simulator only through the C API.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "cbf/cbfform.h"

namespace {

constexpr int kExitInvalid = CBF_INVALID;

struct Owned {
  char* p = nullptr;
  ~Owned() { cbf_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

int report(int status) {
  if (status != CBF_OK) std::cerr << "error: " << cbf_last_error() << '\n';
  return status;
}

struct ScenarioArgs {
  std::string presetName;
  std::string scenarioPath;
  std::vector<std::string> sets;
  std::optional<double> dt;
  std::optional<double> tEnd;

  void attach(CLI::App* app) {
    auto* p = app->add_option("--preset", presetName, "Built-in scenario name (see `preset list`)");
    auto* s = app->add_option("--scenario", scenarioPath, "Scenario JSON file")->check(CLI::ExistingFile);
    p->excludes(s);
    app->add_option("--set", sets, "Override key=value (repeatable), e.g. k_o=0, k_p_3=14, p2x=-1.5");
    app->add_option("--dt", dt, "Base step size [s]")->check(CLI::PositiveNumber);
    app->add_option("--t-end", tEnd, "Horizon [s]")->check(CLI::PositiveNumber);
  }

  // Builds the scenario; on failure prints the reason and returns a status.
  int load(cbf_scenario** out) const {
    int st = scenarioPath.empty() ? cbf_scenario_from_preset(presetName.empty() ? "paper-4agent" : presetName.c_str(), out)
                                  : cbf_scenario_load(scenarioPath.c_str(), out);
    if (st != CBF_OK) return report(st);
    std::vector<std::string> all = sets;
    if (dt) all.push_back("dt=" + CLI::detail::to_string(*dt));
    if (tEnd) all.push_back("t_end=" + CLI::detail::to_string(*tEnd));
    for (const auto& kv : all) {
      st = cbf_scenario_set(*out, kv.c_str());
      if (st != CBF_OK) {
        cbf_scenario_free(*out);
        *out = nullptr;
        return report(st);
      }
    }
    return CBF_OK;
  }
};

std::string fmtDouble(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

int cmdRun(const ScenarioArgs& args, const std::string& outDir, bool quiet) {
  cbf_scenario* sc = nullptr;
  if (int st = args.load(&sc); st != CBF_OK) return st;
  cbf_run_result* res = nullptr;
  int st = cbf_run(sc, &res);
  const int n = cbf_scenario_agent_count(sc);
  cbf_scenario_free(sc);
  if (st != CBF_OK) return report(st);

  std::error_code ec;
  std::filesystem::create_directories(outDir, ec);
  if (ec) {
    cbf_run_free(res);
    std::cerr << "error: cannot create " << outDir << ": " << ec.message() << '\n';
    return CBF_ERROR;
  }
  const auto dir = std::filesystem::path(outDir);
  st = cbf_run_write_csv(res, (dir / "trajectory.csv").string().c_str());
  if (st == CBF_OK) st = cbf_run_write_metadata(res, (dir / "metadata.json").string().c_str());
  if (st != CBF_OK) {
    cbf_run_free(res);
    return report(st);
  }

  const cbf_termination term = cbf_run_termination(res);
  if (!quiet) {
    std::cout << "termination: "
              << (term == CBF_TERM_COMPLETED ? "completed" : term == CBF_TERM_BARRIER_VIOLATION ? "barrier_violation" : "non_finite_state")
              << "\nmin_d: " << fmtDouble(cbf_run_min_d(res)) << "\nt_final: " << fmtDouble(cbf_run_final_time(res)) << '\n';
    if (term == CBF_TERM_BARRIER_VIOLATION) {
      std::cout << "violation: edge " << cbf_run_violation_edge(res) << " at t = " << fmtDouble(cbf_run_violation_time(res)) << '\n';
    }
    for (int i = 2; i <= n; ++i) {
      double e = NAN;
      if (cbf_run_final_position_error(res, i, &e) == CBF_OK) std::cout << "|p~_" << i << "|: " << fmtDouble(e) << '\n';
    }
    std::cout << "wall_time_s: " << fmtDouble(cbf_run_wall_time(res)) << "\noutputs: " << (dir / "trajectory.csv").string()
              << ", " << (dir / "metadata.json").string() << '\n';
  }
  cbf_run_free(res);
  switch (term) {
    case CBF_TERM_COMPLETED: return CBF_OK;
    case CBF_TERM_BARRIER_VIOLATION: return CBF_BARRIER_VIOLATION;
    default: return CBF_ERROR;
  }
}

int cmdVerify(const std::vector<std::string>& suites, std::uint64_t seed, unsigned threads, const std::string& jsonPath) {
  std::string joined;
  for (const auto& s : suites) joined += (joined.empty() ? "" : ",") + s;
  Owned json, summary;
  const int st = cbf_verify(joined.c_str(), seed, threads, &json.p, &summary.p);
  if (st != CBF_OK && st != CBF_CLAIM_FAILED) return report(st);
  std::cout << summary.str();
  if (!jsonPath.empty()) {
    std::ofstream f(jsonPath);
    f << json.str() << '\n';
    if (!f) {
      std::cerr << "error: cannot write " << jsonPath << '\n';
      return CBF_ERROR;
    }
  }
  return st;
}

int cmdSweep(const ScenarioArgs& args, const std::vector<std::string>& grids, unsigned threads, const std::string& outDir,
             bool writeRuns) {
  cbf_scenario* sc = nullptr;
  if (int st = args.load(&sc); st != CBF_OK) return st;
  std::error_code ec;
  std::filesystem::create_directories(outDir, ec);
  if (ec) {
    cbf_scenario_free(sc);
    std::cerr << "error: cannot create " << outDir << ": " << ec.message() << '\n';
    return CBF_ERROR;
  }
  std::vector<const char*> ptrs;
  for (const auto& g : grids) ptrs.push_back(g.c_str());
  const auto dir = std::filesystem::path(outDir);
  const std::string csv = (dir / "sweep.csv").string();
  const std::string runs = (dir / "runs").string();
  size_t count = 0;
  const int st = cbf_sweep(sc, ptrs.data(), ptrs.size(), threads, csv.c_str(), writeRuns ? runs.c_str() : nullptr, &count);
  cbf_scenario_free(sc);
  if (st != CBF_OK) return report(st);
  std::cout << count << " runs -> " << csv << '\n';
  return CBF_OK;
}

int cmdPresetExport(const std::string& name, const std::string& out) {
  cbf_scenario* sc = nullptr;
  if (int st = cbf_scenario_from_preset(name.c_str(), &sc); st != CBF_OK) return report(st);
  Owned json;
  const int st = cbf_scenario_to_json(sc, &json.p);
  cbf_scenario_free(sc);
  if (st != CBF_OK) return report(st);
  if (out.empty() || out == "-") {
    std::cout << json.str() << '\n';
    return CBF_OK;
  }
  std::ofstream f(out);
  f << json.str() << '\n';
  if (!f) {
    std::cerr << "error: cannot write " << out << '\n';
    return CBF_ERROR;
  }
  return CBF_OK;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cbfform: leader-follower formation simulator with barrier-based collision avoidance"};
  app.set_version_flag("--version", std::string(cbf_version()));
  app.require_subcommand(1);
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());

  auto* run = app.add_subcommand("run", "Simulate one scenario; writes trajectory.csv and metadata.json");
  ScenarioArgs runArgs;
  runArgs.attach(run);
  std::string runOut = "out";
  bool quiet = false;
  run->add_option("-o,--out", runOut, "Output directory")->capture_default_str();
  run->add_flag("-q,--quiet", quiet, "Only set the exit status");

  auto* verify = app.add_subcommand("verify", "Run numerical claim suites");
  std::vector<std::string> suites{"all"};
  std::uint64_t seed = 0;
  unsigned verifyThreads = hw;
  std::string verifyJson;
  verify->add_option("--suite", suites, "Suite name (repeatable): lemma1, lyapunov, setpoints, instability, preset, all")
      ->capture_default_str();
  verify->add_option("--seed", seed, "Seed for all randomized draws")->required();
  verify->add_option("-j,--threads", verifyThreads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  verify->add_option("--json", verifyJson, "Also write the JSON report here");

  auto* sweep = app.add_subcommand("sweep", "Run a parameter grid in parallel; writes sweep.csv");
  ScenarioArgs sweepArgs;
  sweepArgs.attach(sweep);
  std::vector<std::string> grids;
  unsigned sweepThreads = hw;
  std::string sweepOut = "sweep";
  bool writeRuns = false;
  sweep->add_option("--grid", grids, "Axis key=v1,v2,... (repeatable; Cartesian product)")->required();
  sweep->add_option("-j,--threads", sweepThreads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  sweep->add_option("-o,--out", sweepOut, "Output directory")->capture_default_str();
  sweep->add_flag("--write-runs", writeRuns, "Also write each run's outputs under <out>/runs/");

  auto* presetCmd = app.add_subcommand("preset", "List or export built-in scenarios");
  presetCmd->require_subcommand(1);
  auto* list = presetCmd->add_subcommand("list", "Print preset names");
  auto* exportCmd = presetCmd->add_subcommand("export", "Print a preset as scenario JSON");
  std::string exportName;
  std::string exportOut;
  exportCmd->add_option("name", exportName, "Preset name")->required();
  exportCmd->add_option("-o,--out", exportOut, "Write to this file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  if (*run) return cmdRun(runArgs, runOut, quiet);
  if (*verify) return cmdVerify(suites, seed, verifyThreads, verifyJson);
  if (*sweep) return cmdSweep(sweepArgs, grids, sweepThreads, sweepOut, writeRuns);
  if (*list) {
    Owned names;
    if (int st = cbf_preset_names(&names.p); st != CBF_OK) return report(st);
    std::cout << names.str();
    return 0;
  }
  if (*exportCmd) return cmdPresetExport(exportName, exportOut);
  return 0;
}

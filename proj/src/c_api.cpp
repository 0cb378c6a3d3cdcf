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

#include "cbf/cbfform.h"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <string>

#include <fmt/format.h>

#include "cbf/errors.hpp"
#include "cbf/scenario.hpp"
#include "cbf/sweep.hpp"
#include "cbf/verify.hpp"

struct cbf_scenario {
  cbf::Scenario s;
};

struct cbf_run_result {
  cbf::Scenario scenario;
  cbf::TrajectoryRecord record;
  double wall = 0.0;
};

namespace {

thread_local std::string lastError;

int fail(int code, std::string msg) {
  lastError = std::move(msg);
  return code;
}

// Maps exceptions escaping the core onto status codes.
template <class F>
int guarded(F&& f) {
  try {
    lastError.clear();
    return f();
  } catch (const cbf::ValidationError& e) {
    return fail(CBF_INVALID, e.what());
  } catch (const cbf::ParseError& e) {
    return fail(CBF_INVALID, e.what());
  } catch (const cbf::BarrierViolation& e) {
    return fail(CBF_BARRIER_VIOLATION, e.what());
  } catch (const std::exception& e) {
    return fail(CBF_ERROR, e.what());
  } catch (...) {
    return fail(CBF_ERROR, "unknown error");
  }
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

int nullArg(const char* what) { return fail(CBF_ERROR, fmt::format("{} must not be NULL", what)); }

std::vector<std::string> splitComma(const char* s) {
  std::vector<std::string> out;
  std::string cur;
  for (const char* c = s; *c != '\0'; ++c) {
    if (*c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (*c != ' ') {
      cur += *c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

extern "C" {

const char* cbf_version(void) { return "1.0.0"; }

const char* cbf_last_error(void) { return lastError.c_str(); }

void cbf_string_free(char* s) { std::free(s); }

int cbf_scenario_from_preset(const char* name, cbf_scenario** out) {
  if (name == nullptr || out == nullptr) return nullArg("name/out");
  return guarded([&]() -> int {
    *out = new cbf_scenario{cbf::preset(name)};
    return CBF_OK;
  });
}

int cbf_scenario_load(const char* path, cbf_scenario** out) {
  if (path == nullptr || out == nullptr) return nullArg("path/out");
  return guarded([&]() -> int {
    *out = new cbf_scenario{cbf::loadScenario(path)};
    return CBF_OK;
  });
}

int cbf_scenario_parse(const char* json_text, cbf_scenario** out) {
  if (json_text == nullptr || out == nullptr) return nullArg("json_text/out");
  return guarded([&]() -> int {
    *out = new cbf_scenario{cbf::parseScenario(json_text)};
    return CBF_OK;
  });
}

int cbf_scenario_clone(const cbf_scenario* s, cbf_scenario** out) {
  if (s == nullptr || out == nullptr) return nullArg("scenario/out");
  return guarded([&]() -> int {
    *out = new cbf_scenario{s->s};
    return CBF_OK;
  });
}

int cbf_scenario_set(cbf_scenario* s, const char* assignment) {
  if (s == nullptr || assignment == nullptr) return nullArg("scenario/assignment");
  return guarded([&]() -> int {
    cbf::Scenario copy = s->s;
    cbf::applyOverride(copy, assignment);
    s->s = std::move(copy);
    return CBF_OK;
  });
}

int cbf_scenario_to_json(const cbf_scenario* s, char** out) {
  if (s == nullptr || out == nullptr) return nullArg("scenario/out");
  return guarded([&]() -> int {
    *out = dup(cbf::toJson(s->s).dump(2));
    return CBF_OK;
  });
}

int cbf_scenario_agent_count(const cbf_scenario* s) { return s == nullptr ? 0 : s->s.formation.n; }

void cbf_scenario_free(cbf_scenario* s) { delete s; }

int cbf_preset_names(char** out) {
  if (out == nullptr) return nullArg("out");
  return guarded([&]() -> int {
    std::string names;
    for (const auto& n : cbf::presetNames()) names += n + "\n";
    *out = dup(names);
    return CBF_OK;
  });
}

int cbf_run(const cbf_scenario* s, cbf_run_result** out) {
  if (s == nullptr || out == nullptr) return nullArg("scenario/out");
  return guarded([&]() -> int {
    auto result = std::make_unique<cbf_run_result>();
    result->scenario = s->s;
    const auto t0 = std::chrono::steady_clock::now();
    result->record = cbf::run(s->s.initial, s->s.formation, s->s.controller, s->s.sim);
    result->wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    *out = result.release();
    return CBF_OK;
  });
}

cbf_termination cbf_run_termination(const cbf_run_result* r) {
  switch (r->record.termination) {
    case cbf::Termination::Completed: return CBF_TERM_COMPLETED;
    case cbf::Termination::BarrierViolation: return CBF_TERM_BARRIER_VIOLATION;
    case cbf::Termination::NonFiniteState: return CBF_TERM_NON_FINITE;
  }
  return CBF_TERM_NON_FINITE;
}

double cbf_run_min_d(const cbf_run_result* r) { return r->record.minD; }
double cbf_run_max_abs_phi(const cbf_run_result* r) { return r->record.maxAbsPhi; }
double cbf_run_violation_time(const cbf_run_result* r) {
  return r->record.violationTime.value_or(std::numeric_limits<double>::quiet_NaN());
}
int cbf_run_violation_edge(const cbf_run_result* r) { return r->record.violationEdge.value_or(0); }
double cbf_run_wall_time(const cbf_run_result* r) { return r->wall; }
size_t cbf_run_row_count(const cbf_run_result* r) { return r->record.rows.size(); }
double cbf_run_final_time(const cbf_run_result* r) {
  return r->record.rows.empty() ? std::numeric_limits<double>::quiet_NaN() : r->record.rows.back().t;
}

int cbf_run_final_position(const cbf_run_result* r, int agent, double* xyz) {
  if (r == nullptr || xyz == nullptr) return nullArg("result/xyz");
  if (agent < 1 || agent > r->record.n || r->record.rows.empty()) {
    return fail(CBF_INVALID, fmt::format("agent {} outside 1..{}", agent, r->record.n));
  }
  const auto& p = r->record.rows.back().p[static_cast<std::size_t>(agent - 1)];
  for (int c = 0; c < 3; ++c) xyz[c] = p[c];
  return CBF_OK;
}

int cbf_run_final_position_error(const cbf_run_result* r, int agent, double* err) {
  if (r == nullptr || err == nullptr) return nullArg("result/err");
  if (agent < 2 || agent > r->record.n || r->record.rows.empty()) {
    return fail(CBF_INVALID, fmt::format("follower {} outside 2..{}", agent, r->record.n));
  }
  return guarded([&]() -> int {
    const auto errs = cbf::errorStates(r->record.finalState(), r->scenario.formation);
    *err = errs[static_cast<std::size_t>(agent - 2)].pTilde.norm();
    return CBF_OK;
  });
}

int cbf_run_write_csv(const cbf_run_result* r, const char* path) {
  if (r == nullptr || path == nullptr) return nullArg("result/path");
  return guarded([&]() -> int {
    std::ofstream f(path, std::ios::binary);
    if (!f) return fail(CBF_ERROR, fmt::format("cannot open {} for writing", path));
    cbf::writeCsv(r->record, f);
    f.flush();
    return f ? CBF_OK : fail(CBF_ERROR, fmt::format("write to {} failed", path));
  });
}

int cbf_run_metadata_json(const cbf_run_result* r, char** out) {
  if (r == nullptr || out == nullptr) return nullArg("result/out");
  return guarded([&]() -> int {
    *out = dup(cbf::runMetadata(r->scenario, r->record, r->wall).dump(2));
    return CBF_OK;
  });
}

int cbf_run_write_metadata(const cbf_run_result* r, const char* path) {
  if (r == nullptr || path == nullptr) return nullArg("result/path");
  return guarded([&]() -> int {
    std::ofstream f(path, std::ios::binary);
    if (!f) return fail(CBF_ERROR, fmt::format("cannot open {} for writing", path));
    f << cbf::runMetadata(r->scenario, r->record, r->wall).dump(2) << '\n';
    f.flush();
    return f ? CBF_OK : fail(CBF_ERROR, fmt::format("write to {} failed", path));
  });
}

void cbf_run_free(cbf_run_result* r) { delete r; }

int cbf_verify(const char* suites, uint64_t seed, unsigned threads, char** report_json, char** summary) {
  if (suites == nullptr) return nullArg("suites");
  return guarded([&]() -> int {
    const auto report = cbf::runVerify(splitComma(suites), seed, threads);
    if (report_json != nullptr) *report_json = dup(report.toJson().dump(2));
    if (summary != nullptr) *summary = dup(report.summary());
    if (!report.allPassed()) return fail(CBF_CLAIM_FAILED, "one or more claims failed");
    return CBF_OK;
  });
}

int cbf_verify_suite_names(char** out) {
  if (out == nullptr) return nullArg("out");
  return guarded([&]() -> int {
    *out = dup(fmt::format("{}", fmt::join(cbf::suiteNames(), ",")));
    return CBF_OK;
  });
}

int cbf_sweep(const cbf_scenario* base, const char* const* grids, size_t grid_count, unsigned threads,
              const char* csv_path, const char* run_dir, size_t* run_count) {
  if (base == nullptr || csv_path == nullptr || (grids == nullptr && grid_count > 0)) {
    return nullArg("base/grids/csv_path");
  }
  return guarded([&]() -> int {
    std::vector<cbf::SweepAxis> axes;
    for (size_t k = 0; k < grid_count; ++k) axes.push_back(cbf::parseSweepAxis(grids[k]));
    cbf::SweepOptions opts;
    opts.threads = threads;
    if (run_dir != nullptr) opts.runDirectory = std::filesystem::path(run_dir);
    const auto rows = cbf::runSweep(base->s, axes, opts);
    std::ofstream f(csv_path, std::ios::binary);
    if (!f) return fail(CBF_ERROR, fmt::format("cannot open {} for writing", csv_path));
    cbf::writeSweepCsv(axes, rows, f);
    f.flush();
    if (run_count != nullptr) *run_count = rows.size();
    return f ? CBF_OK : fail(CBF_ERROR, fmt::format("write to {} failed", csv_path));
  });
}

}  // extern "C"

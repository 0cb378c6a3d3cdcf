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

#include "cbf/sweep.hpp"

#include <chrono>
#include <fstream>

#include <fmt/format.h>

#include "cbf/analysis.hpp"
#include "cbf/errors.hpp"
#include "cbf/verify.hpp"

namespace cbf {

SweepAxis parseSweepAxis(std::string_view spec) {
  const auto eq = spec.find('=');
  if (eq == std::string_view::npos || eq == 0 || eq + 1 == spec.size()) {
    throw ValidationError({fmt::format("grid '{}' must look like key=v1,v2,...", spec)});
  }
  SweepAxis axis{std::string(spec.substr(0, eq)), {}};
  std::string_view rest = spec.substr(eq + 1);
  while (true) {
    const auto comma = rest.find(',');
    const auto item = rest.substr(0, comma);
    if (item.empty()) throw ValidationError({fmt::format("grid '{}' has an empty value", spec)});
    axis.values.emplace_back(item);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return axis;
}

std::optional<double> settlingTime(const TrajectoryRecord& record, const FormationSpec& spec, double tol) {
  std::optional<double> settled;
  for (const auto& row : record.rows) {
    double worst = 0.0;
    for (int i = 2; i <= spec.n; ++i) {
      worst = std::max(worst, (row.p[static_cast<std::size_t>(i - 1)] - desiredPosition(spec, i, row.t)).norm());
    }
    if (worst > tol) {
      settled.reset();
    } else if (!settled) {
      settled = row.t;
    }
  }
  return settled;
}

namespace {

void writeRunOutputs(const std::filesystem::path& dir, const Scenario& s, const TrajectoryRecord& rec, double wall) {
  std::filesystem::create_directories(dir);
  std::ofstream csv(dir / "trajectory.csv");
  writeCsv(rec, csv);
  std::ofstream meta(dir / "metadata.json");
  meta << runMetadata(s, rec, wall).dump(2) << '\n';
  if (!csv || !meta) throw Error(fmt::format("could not write run outputs under {}", dir.string()));
}

}  // namespace

std::vector<SweepRow> runSweep(const Scenario& base, const std::vector<SweepAxis>& axes, const SweepOptions& opts) {
  std::size_t total = 1;
  for (const auto& a : axes) total *= a.values.size();

  // Build and validate every grid point up front so bad values fail fast.
  std::vector<Scenario> scenarios;
  std::vector<std::vector<std::string>> assignments;
  scenarios.reserve(total);
  for (std::size_t k = 0; k < total; ++k) {
    Scenario s = base;
    std::vector<std::string> set;
    std::size_t rem = k;
    for (std::size_t a = axes.size(); a-- > 0;) {
      const auto& axis = axes[a];
      set.insert(set.begin(), axis.key + "=" + axis.values[rem % axis.values.size()]);
      rem /= axis.values.size();
    }
    for (const auto& kv : set) applyOverride(s, kv);
    s.label = base.label + (set.empty() ? "" : "[" + fmt::format("{}", fmt::join(set, " ")) + "]");
    scenarios.push_back(std::move(s));
    assignments.push_back(std::move(set));
  }

  std::vector<SweepRow> rows(total);
  std::vector<TrajectoryRecord> kept(opts.runDirectory ? total : 0);
  std::vector<double> wall(total, 0.0);
  parallelFor(total, opts.threads, [&](std::size_t k) {
    const Scenario& s = scenarios[k];
    const auto t0 = std::chrono::steady_clock::now();
    TrajectoryRecord rec = run(s.initial, s.formation, s.controller, s.sim);
    wall[k] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    SweepRow& row = rows[k];
    row.assignments = assignments[k];
    row.termination = std::string(toString(rec.termination));
    row.minD = rec.minD;
    row.violationTime = rec.violationTime;
    if (rec.termination == Termination::Completed) {
      std::vector<std::string> cls;
      for (const auto& c : classifyLimit(rec, s.formation)) {
        cls.push_back(c.converged ? fmt::format("{}", c.setPoint->index) : "none");
      }
      row.classes = fmt::format("{}", fmt::join(cls, ";"));
      row.settlingTime = settlingTime(rec, s.formation, opts.settleTolerance);
    }
    if (opts.runDirectory) kept[k] = std::move(rec);
  });

  if (opts.runDirectory) {
    for (std::size_t k = 0; k < total; ++k) {
      writeRunOutputs(*opts.runDirectory / fmt::format("run_{:04d}", k), scenarios[k], kept[k], wall[k]);
    }
  }
  return rows;
}

void writeSweepCsv(const std::vector<SweepAxis>& axes, const std::vector<SweepRow>& rows, std::ostream& out) {
  for (const auto& a : axes) out << a.key << ',';
  out << "termination,min_d,violation_time,classes,settling_time\n";
  const auto opt = [](const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string(); };
  for (const auto& r : rows) {
    for (const auto& kv : r.assignments) out << kv.substr(kv.find('=') + 1) << ',';
    out << r.termination << ',' << fmt::format("{}", r.minD) << ',' << opt(r.violationTime) << ',' << r.classes << ','
        << opt(r.settlingTime) << '\n';
  }
}

}  // namespace cbf

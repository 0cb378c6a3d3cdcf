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

#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "cbf/scenario.hpp"

namespace cbf {

/// One grid dimension: an override key and the values it takes.
struct SweepAxis {
  std::string key;
  std::vector<std::string> values;
};

/// Parses "key=v1,v2,...".
SweepAxis parseSweepAxis(std::string_view spec);

struct SweepOptions {
  unsigned threads = 1;
  /// Largest follower position error (m) that counts as settled.
  double settleTolerance = 1e-2;
  /// When set, each run's trajectory.csv and metadata.json go to run_<k>/ here.
  std::optional<std::filesystem::path> runDirectory;
};

struct SweepRow {
  std::vector<std::string> assignments;  // key=value per axis
  std::string termination;
  double minD = 0.0;
  std::optional<double> violationTime;
  std::string classes;                   // set-point index per follower, ';'-separated
  std::optional<double> settlingTime;
};

/// Cartesian product over the axes, applied as overrides on copies of `base`.
/// Rows come back in grid order (last axis fastest).
std::vector<SweepRow> runSweep(const Scenario& base, const std::vector<SweepAxis>& axes, const SweepOptions& opts);

void writeSweepCsv(const std::vector<SweepAxis>& axes, const std::vector<SweepRow>& rows, std::ostream& out);

/// First recorded time after which every follower's position error stays
/// within `tol`; empty if that never happens.
std::optional<double> settlingTime(const TrajectoryRecord& record, const FormationSpec& spec, double tol);

}  // namespace cbf

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

// Scenario files: JSON (de)serialization, validation, overrides and presets.
//
// Units: positions and lengths in m, velocities in m/s, time in s, angular
// rates in rad/s, gains k_p in 1/s^2, k_v and k_o in 1/s.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cbf/control.hpp"
#include "cbf/formation.hpp"
#include "cbf/sim.hpp"

namespace cbf {

struct Scenario {
  std::string label;
  FormationSpec formation;
  ControllerConfig controller;
  SimConfig sim;
  WorldState initial;

  /// Every violated invariant across all sections.
  std::vector<std::string> problems() const;
  /// Throws ValidationError listing all problems.
  void validate() const;
};

nlohmann::json toJson(const Scenario& s);

/// Parses and validates. ParseError carries line:column for malformed JSON;
/// ValidationError lists every schema or invariant problem with its JSON path.
Scenario parseScenario(std::string_view text, std::string_view sourceName = "<string>");
Scenario scenarioFromJson(const nlohmann::json& j);
Scenario loadScenario(const std::filesystem::path& path);

bool operator==(const Scenario& a, const Scenario& b);

/// Applies one `key=value` override and re-validates. Keys:
///   k_p k_v k_o eta_p eta_v          every follower, or with suffix _<i>
///   c_<i>                            edge length of follower i
///   p<i>x p<i>y p<i>z v<i>x ...      initial state of agent i
///   r dt t_end d_floor record_stride integrator variant label
void applyOverride(Scenario& s, std::string_view assignment);

std::vector<std::string> presetNames();
/// Throws ValidationError for an unknown name.
Scenario preset(std::string_view name);

/// Metadata sidecar for one run: scenario_label, termination, min_d,
/// max_abs_phi, wall_time_s, config_echo, plus violation details when present.
nlohmann::json runMetadata(const Scenario& s, const TrajectoryRecord& record, double wallTimeSeconds);

}  // namespace cbf

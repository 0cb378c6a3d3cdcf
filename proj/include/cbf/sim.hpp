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

// Closed-loop integration of the double-integrator chain.

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cbf/control.hpp"
#include "cbf/formation.hpp"

namespace cbf {

struct AgentState {
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
};

struct WorldState {
  double t = 0.0;
  std::vector<AgentState> agents;

  std::vector<Vec3> positions() const;
  std::vector<Vec3> velocities() const;
  bool finite() const;
};

enum class Integrator { Rk4, Rk45Adaptive };

std::string_view toString(Integrator i);
Integrator integratorFromString(std::string_view s);

struct SimConfig {
  double dt = 0.01;
  double tEnd = 30.0;
  Integrator integrator = Integrator::Rk4;
  /// Abort threshold on d_i. Non-positive means "use 1e-6 * r".
  double dFloor = 0.0;
  int recordStride = 1;

  /// Sub-stepping kicks in when some d_i < nearBarrierFraction * r.
  double nearBarrierFraction = 0.1;
  double substepTolerance = 1e-9;
  int maxHalvings = 20;

  /// Tolerances of the embedded Dormand-Prince pair.
  double rk45RelTol = 1e-10;
  double rk45AbsTol = 1e-12;

  double floorFor(double r) const { return dFloor > 0.0 ? dFloor : 1e-6 * r; }
  std::vector<std::string> problems(double r) const;
};

struct TrajectoryRow {
  double t = 0.0;
  std::vector<Vec3> p, v, u;                   // n entries
  std::vector<double> d, phi, L;               // n - 1 entries (followers 2..n)
  std::vector<Vec3> eTilde, nuTilde;           // n - 1 entries
};

enum class Termination { Completed, BarrierViolation, NonFiniteState };

std::string_view toString(Termination t);

struct TrajectoryRecord {
  int n = 0;
  std::vector<TrajectoryRow> rows;
  Termination termination = Termination::Completed;
  /// Set for BarrierViolation: follower index of the edge and time.
  std::optional<int> violationEdge;
  std::optional<double> violationTime;
  std::string message;
  /// Over every accepted base step, not only recorded rows.
  double minD = 0.0;
  double maxAbsPhi = 0.0;
  long long rhsEvaluations = 0;

  WorldState finalState() const;
};

/// One base step of size cfg.dt. Throws BarrierViolation if a stage state has
/// some d_i <= d_floor and sub-stepping cannot avoid it; NonFiniteState on
/// blow-up.
WorldState step(const WorldState& state, const FormationSpec& spec, const ControllerConfig& ctrl,
                const SimConfig& cfg);

/// Integrates to cfg.tEnd. A violation ends the run; the rows up to the last
/// accepted state are kept.
TrajectoryRecord run(const WorldState& initial, const FormationSpec& spec, const ControllerConfig& ctrl,
                     const SimConfig& cfg);

struct FollowerErrors {
  Vec3 eTilde;   // e - e*
  Vec3 nuTilde;  // nu - Omega* e
  Vec3 pTilde;   // p - p*
  Vec3 vTilde;   // v - v*
};

/// Entry k belongs to follower k + 2. Defined for any state, including d <= 0.
std::vector<FollowerErrors> errorStates(const WorldState& state, const FormationSpec& spec);

/// Fixed header: t, p1x..vnz (p then v per agent), u2x..unz, d2..dn,
/// phi2..phin, L2..Ln.
std::string csvHeader(int n);
void writeCsv(const TrajectoryRecord& record, std::ostream& out);

}  // namespace cbf

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

// Numerical checks of the barrier and stability properties: the scalar
// divergent-flow harness, Lyapunov monotonicity along recorded runs, the
// enumeration and classification of set points, and instability probes.

#pragma once

#include <optional>
#include <vector>

#include "cbf/control.hpp"
#include "cbf/formation.hpp"
#include "cbf/lyapunov.hpp"
#include "cbf/sim.hpp"

namespace cbf {

// ---------------------------------------------------------------------------
// Scalar harness: d'' = -k_o d'/d - alpha(t)

/// alpha(t) = offset + sum_k amp_k sin(freq_k t + phase_k)
struct AlphaSignal {
  struct Term {
    double amp = 0.0;
    double freq = 1.0;
    double phase = 0.0;
  };
  double offset = 0.0;
  std::vector<Term> terms;

  double operator()(double t) const;
  double derivative(double t) const;
  /// int_0^t alpha
  double integral(double t) const;
  /// sup |alpha|
  double bound() const;
};

struct ScalarBarrierSystem {
  double ko = 1.0;
  AlphaSignal alpha;
  double d0 = 1.0;
  double ddot0 = 0.0;
};

struct ScalarTrajectory {
  std::vector<double> t, d, ddot, phi;
  double minD = 0.0;
  /// True when the run stopped early because d dropped below the stop floor
  /// (d still positive, heading to zero).
  bool reachedFloor = false;
  bool crossedZero = false;
  double integralAlpha = 0.0;  // int_0^T alpha at the last sample
};

struct ScalarHarnessOptions {
  /// Stop once d < stopFloor * d0.
  double stopFloor = 1e-10;
  double relTol = 1e-8;
};

/// Integrates the scalar barrier dynamics with a stiff Rosenbrock scheme,
/// sampling every `dt`. Throws NonFiniteState on blow-up. A step landing at
/// d <= 0 ends the run with crossedZero set.
ScalarTrajectory simulateScalarBarrier(const ScalarBarrierSystem& sys, double horizon, double dt,
                                const ScalarHarnessOptions& opts = {});

// ---------------------------------------------------------------------------
// Lyapunov monotonicity along a record

struct LyapunovCheck {
  int follower = 0;
  int samples = 0;
  double maxFiniteDifference = 0.0;   // max of central-difference dL/dt
  double maxAbsMismatch = 0.0;        // max |fd - analytic|
  double maxAbsAnalytic = 0.0;        // max |analytic dL/dt|
  double spacing = 0.0;               // record spacing used by the differences
};

/// Fourth-order finite differences of each follower's recorded L against the analytic
/// derivative. With `upstreamTol` set, rows where the predecessor's position
/// error exceeds it are skipped (cascade transient of the distributed law).
std::vector<LyapunovCheck> checkLyapunov(const TrajectoryRecord& record, const FormationSpec& spec,
                                         const ControllerConfig& ctrl, std::optional<double> upstreamTol = {});

// ---------------------------------------------------------------------------
// Set points

struct SetPoint {
  int agent = 0;
  /// 1-based; bit (j - 2) of (index - 1) set means edge j sits at -r.
  int index = 1;
  std::vector<double> choices;  // c_j or -r for j = 2..agent
  Vec3 position = Vec3::Zero();
  bool stable = false;
};

/// All 2^(agent-1) combinations p*_1 + sum_j choice_j g*_j at time t.
std::vector<SetPoint> enumerateSetPoints(const FormationSpec& spec, int agent, double t = 0.0);

struct LimitClass {
  int agent = 0;
  bool converged = false;
  std::optional<SetPoint> setPoint;   // nearest set point (mean tail distance)
  double maxTailDistance = 0.0;       // to the nearest set point
  double maxTailSpeed = 0.0;          // relative to the set point's velocity
};

struct ClassifyOptions {
  double tolPos = 0.0;  // non-positive: 1e-2 * r
  double tolVel = 1e-3;
  double tailFraction = 0.1;
};

/// One entry per follower 2..n.
std::vector<LimitClass> classifyLimit(const TrajectoryRecord& record, const FormationSpec& spec,
                                      const ClassifyOptions& opts = {});

// ---------------------------------------------------------------------------
// Instability probes around the singular set point of one edge

struct ProbeConfig {
  int edge = 2;
  double epsilon = 0.05;
  double delta = 0.01;
  Vec3 omegaAxis = Vec3::UnitZ();
  double horizon = 20.0;
  ClassifyOptions classify;
};

struct ProbeResult {
  bool escaped = false;
  std::vector<LimitClass> classes;
  Termination termination = Termination::Completed;
  /// Lyapunov values of the probed follower at (e~, 0):
  double lStart = 0.0;              // perturbed start, radius (1 + delta) r
  double lUnstableSameRadius = 0.0; // antipodal point at the same radius
  double lEpsilon = 0.0;            // e = -r R(eps) g*, the rotated boundary point
  double lUnstable = 0.0;           // e = -r g*
  double startD = 0.0;
};

/// Initial state for a probe: every edge at its desired value except `edge`,
/// placed at e = -(1 + delta) r R(eps) g*, all relative velocities desired.
WorldState probeInitialState(const FormationSpec& spec, const ProbeConfig& probe);

/// Runs the closed loop from the perturbed unstable point. `escaped` is true
/// when every follower is classified at the stable set point.
ProbeResult instabilityProbe(const FormationSpec& spec, const ControllerConfig& ctrl, const SimConfig& sim,
                             const ProbeConfig& probe);

}  // namespace cbf

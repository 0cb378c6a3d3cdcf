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

// Per-follower feedback: nominal PD-like tracking plus divergent-flow barrier.

#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "cbf/formation.hpp"
#include "cbf/geom3.hpp"

namespace cbf {

/// Relative quantities a follower measures with respect to its predecessor.
struct EdgeObservables {
  Vec3 e;         // p_i - p_{i-1}
  Vec3 nu;        // v_i - v_{i-1}
  double d;       // |e| - r
  UnitVec3 g;     // e / |e|
  double phi;     // divergent flow g.nu / d
  Vec3 eTilde;    // e - e*
  Vec3 nuTilde;   // nu - Omega* e
};

/// Throws DegenerateEdge when |e| < 1e-9 and BarrierViolation when d <= 0.
/// `edge` and `t` only label the exception.
EdgeObservables edgeObservables(const Vec3& pi, const Vec3& vi, const Vec3& pPrev, const Vec3& vPrev, double r,
                                const DesiredEdgeState& desired, int edge = 0,
                                double t = std::numeric_limits<double>::quiet_NaN());

/// h(s) = eta / sqrt(1 + s) on s >= 0.
struct HFunction {
  double eta = 1.0;

  double operator()(double s) const { return eta / std::sqrt(1.0 + s); }
  double derivative(double s) const { return -0.5 * eta / ((1.0 + s) * std::sqrt(1.0 + s)); }
  /// int_0^S h(s) ds
  double integral(double S) const { return 2.0 * eta * (std::sqrt(1.0 + S) - 1.0); }
};

enum class NominalVariant { Centralized, Distributed };

std::string_view toString(NominalVariant v);
NominalVariant nominalVariantFromString(std::string_view s);

struct FollowerGains {
  double kp = 10.0;
  double kv = 7.0;
  double ko = 7.0;
  HFunction hp;  // evaluated at |e~|^2
  HFunction hv;  // evaluated at |nu~|
};

/// gains[k] belongs to follower k + 2.
struct ControllerConfig {
  NominalVariant variant = NominalVariant::Distributed;
  std::vector<FollowerGains> gains;

  const FollowerGains& follower(int i) const { return gains.at(static_cast<std::size_t>(i - 2)); }
  std::vector<std::string> problems(int n) const;
};

/// -k_o g phi
Vec3 barrierFeedback(const EdgeObservables& obs, double ko);

/// -k_p h_p e~ - k_v h_v nu~ + u*_e(e) + u_{i-1}
Vec3 nominalCentralized(const EdgeObservables& obs, const FollowerGains& gains, const Vec3& uEStarOfE,
                        const Vec3& uPrev);

/// Same law with the predecessor's desired acceleration u*_{i-1} in place of
/// its actual input.
Vec3 nominalDistributed(const EdgeObservables& obs, const FollowerGains& gains, const Vec3& uEStarOfE,
                        const Vec3& uStarPrev);

/// Composed follower input. `uPrev` is the predecessor's actual input and
/// `uStarPrev` its desired acceleration; the variant picks which is used.
Vec3 controlInput(const EdgeObservables& obs, const FollowerGains& gains, NominalVariant variant,
                  const Vec3& uEStarOfE, const Vec3& uPrev, const Vec3& uStarPrev);

/// Leader input: the independently supplied reference acceleration.
Vec3 leaderInput(const FormationSpec& spec, double t);

/// Inputs and observables for the whole chain at one instant.
struct ClosedLoopSample {
  std::vector<Vec3> u;                  // n entries
  std::vector<EdgeObservables> edges;   // n - 1 entries, edges[k] for follower k + 2
  std::vector<DesiredEdgeState> desired;
};

/// Evaluates every agent's input. Followers are processed in chain order
/// because the centralized law feeds u_{i-1} into u_i.
ClosedLoopSample evaluateClosedLoop(const FormationSpec& spec, const ControllerConfig& cfg, double t,
                                    std::span<const Vec3> positions, std::span<const Vec3> velocities);

}  // namespace cbf

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

// Chain formation description and the desired trajectories it induces.

#pragma once

#include <limits>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "cbf/geom3.hpp"

namespace cbf {

/// Angular-velocity signal for one edge. All built-in families keep a
/// fixed rotation axis or switch between constant generators, which gives
/// the transport e*(t) = R(t) e*(0) in closed form.
class OmegaSignal {
 public:
  struct Zero {};
  struct Constant {
    Vec3 w;
  };
  /// w(t) = axis * (bias + amplitude * sin(freq * t + phase)), axis unit.
  struct Sinusoidal {
    Vec3 axis;
    double bias = 0.0;
    double amplitude = 0.0;
    double freq = 1.0;
    double phase = 0.0;
  };
  /// w(t) = values[k] on [switches[k-1], switches[k]); switches strictly
  /// increasing and positive, values.size() == switches.size() + 1.
  struct PiecewiseConstant {
    std::vector<double> switches;
    std::vector<Vec3> values;
  };
  using Kind = std::variant<Zero, Constant, Sinusoidal, PiecewiseConstant>;

  OmegaSignal() = default;
  explicit OmegaSignal(Kind kind) : kind_(std::move(kind)) {}

  static OmegaSignal zero() { return OmegaSignal(); }
  static OmegaSignal constant(const Vec3& w) { return OmegaSignal(Constant{w}); }

  SkewMat3 value(double t) const;
  SkewMat3 derivative(double t) const;
  /// Rotation mapping e*(0) to e*(t) under de*/dt = value(t) e*.
  Rot3 transport(double t) const;
  bool identicallyZero() const;

  const Kind& kind() const noexcept { return kind_; }

 private:
  Kind kind_ = Zero{};
};

/// Reference trajectory of the leader with two continuous derivatives.
class LeaderTrajectory {
 public:
  struct Constant {
    Vec3 position;
  };
  struct ConstantVelocity {
    Vec3 position;  // at t = 0
    Vec3 velocity;
  };
  struct ConstantAcceleration {
    Vec3 position;  // at t = 0
    Vec3 velocity;  // at t = 0
    Vec3 acceleration;
  };
  /// Component-wise center + amplitude .* sin(omega .* t + phase).
  struct Sinusoidal {
    Vec3 center;
    Vec3 amplitude;
    Vec3 omega;
    Vec3 phase;
  };
  /// Uniformly sampled positions smoothed by a cubic B-spline per axis.
  /// Outside [t0, t0 + (N-1) dt] the trajectory continues at the endpoint
  /// velocity.
  struct Sampled {
    double t0 = 0.0;
    double dt = 0.1;
    std::vector<Vec3> points;
  };
  using Kind = std::variant<Constant, ConstantVelocity, ConstantAcceleration, Sinusoidal, Sampled>;

  LeaderTrajectory() : LeaderTrajectory(Constant{Vec3::Zero()}) {}
  explicit LeaderTrajectory(Kind kind);

  Vec3 position(double t) const;
  Vec3 velocity(double t) const;
  Vec3 acceleration(double t) const;

  const Kind& kind() const noexcept { return kind_; }

 private:
  Kind kind_;
  std::vector<boost::math::interpolators::cardinal_cubic_b_spline<double>> splines_;
};

struct FormationEdge {
  double c = 1.0;
  UnitVec3 gStar{1.0, 0.0, 0.0};
  OmegaSignal omega;
};

/// Chain 1 -> 2 -> ... -> n. edges[k] belongs to follower k + 2.
struct FormationSpec {
  int n = 2;
  double r = 0.5;
  double maxEdge = std::numeric_limits<double>::infinity();  // D, validation only
  std::vector<FormationEdge> edges;
  LeaderTrajectory leader;

  const FormationEdge& edge(int i) const { return edges.at(static_cast<std::size_t>(i - 2)); }

  /// Every violated structural invariant, empty when valid.
  std::vector<std::string> problems() const;
};

struct DesiredEdgeState {
  Vec3 eStar;
  Vec3 nuStar;
  /// Omega_dot + Omega^2 at time t; applied to e or e* by the controller.
  Mat3 uEStarCoeff;
  SkewMat3 omega;
};

/// Desired relative state of edge i (2 <= i <= n) at time t.
DesiredEdgeState desiredEdge(const FormationSpec& spec, int i, double t);

/// p*_i(t) = p*_1(t) + sum_{j=2..i} e*_j(t), 1 <= i <= n.
Vec3 desiredPosition(const FormationSpec& spec, int i, double t);

Vec3 desiredVelocity(const FormationSpec& spec, int i, double t);

/// u*_i(t) = p''*_1(t) + sum_{j=2..i} (Omega_dot*_j + Omega*_j^2) e*_j(t).
Vec3 desiredFeedforward(const FormationSpec& spec, int i, double t);

}  // namespace cbf

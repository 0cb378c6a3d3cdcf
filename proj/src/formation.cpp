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

#include "cbf/formation.hpp"

#include <cmath>

#include <fmt/format.h>

#include "cbf/errors.hpp"

namespace cbf {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::size_t segmentIndex(const std::vector<double>& switches, double t) {
  std::size_t k = 0;
  while (k < switches.size() && t >= switches[k]) ++k;
  return k;
}

}  // namespace

SkewMat3 OmegaSignal::value(double t) const {
  return std::visit(
      Overloaded{
          [](const Zero&) { return SkewMat3(); },
          [](const Constant& c) { return SkewMat3(c.w); },
          [t](const Sinusoidal& s) {
            return SkewMat3(s.axis * (s.bias + s.amplitude * std::sin(s.freq * t + s.phase)));
          },
          [t](const PiecewiseConstant& p) { return SkewMat3(p.values[segmentIndex(p.switches, t)]); },
      },
      kind_);
}

SkewMat3 OmegaSignal::derivative(double t) const {
  if (const auto* s = std::get_if<Sinusoidal>(&kind_)) {
    return SkewMat3(s->axis * (s->amplitude * s->freq * std::cos(s->freq * t + s->phase)));
  }
  // Piecewise-constant signals have zero derivative between switches.
  return SkewMat3();
}

Rot3 OmegaSignal::transport(double t) const {
  return std::visit(
      Overloaded{
          [](const Zero&) { return Rot3(); },
          [t](const Constant& c) { return expSo3(SkewMat3(c.w), t); },
          [t](const Sinusoidal& s) {
            // angle = int_0^t bias + amplitude sin(freq tau + phase) dtau
            const double angle =
                s.bias * t - s.amplitude / s.freq * (std::cos(s.freq * t + s.phase) - std::cos(s.phase));
            return expSo3(SkewMat3(s.axis), angle);
          },
          [t](const PiecewiseConstant& p) {
            Rot3 acc;
            double start = 0.0;
            const std::size_t last = segmentIndex(p.switches, t);
            for (std::size_t k = 0; k <= last; ++k) {
              const double end = k < last ? p.switches[k] : t;
              acc = expSo3(SkewMat3(p.values[k]), end - start) * acc;
              start = end;
            }
            return acc;
          },
      },
      kind_);
}

bool OmegaSignal::identicallyZero() const {
  return std::visit(
      Overloaded{
          [](const Zero&) { return true; },
          [](const Constant& c) { return c.w.isZero(0.0); },
          [](const Sinusoidal& s) {
            return s.axis.isZero(0.0) || (s.bias == 0.0 && s.amplitude == 0.0);
          },
          [](const PiecewiseConstant& p) {
            for (const auto& v : p.values) {
              if (!v.isZero(0.0)) return false;
            }
            return true;
          },
      },
      kind_);
}

LeaderTrajectory::LeaderTrajectory(Kind kind) : kind_(std::move(kind)) {
  if (const auto* s = std::get_if<Sampled>(&kind_)) {
    if (s->points.size() < 4 || !(s->dt > 0.0)) {
      throw ValidationError({"leader.sampled needs at least 4 points and dt > 0"});
    }
    for (int axis = 0; axis < 3; ++axis) {
      std::vector<double> values;
      values.reserve(s->points.size());
      for (const auto& p : s->points) values.push_back(p[axis]);
      splines_.emplace_back(values.begin(), values.end(), s->t0, s->dt);
    }
  }
}

namespace {

// Maps t into the spline support; returns the overshoot past either end.
double clampToSupport(const LeaderTrajectory::Sampled& s, double t, double& overshoot) {
  const double t1 = s.t0 + s.dt * static_cast<double>(s.points.size() - 1);
  overshoot = 0.0;
  if (t < s.t0) {
    overshoot = t - s.t0;
    return s.t0;
  }
  if (t > t1) {
    overshoot = t - t1;
    return t1;
  }
  return t;
}

}  // namespace

Vec3 LeaderTrajectory::position(double t) const {
  return std::visit(
      Overloaded{
          [](const Constant& c) -> Vec3 { return c.position; },
          [t](const ConstantVelocity& c) -> Vec3 { return c.position + c.velocity * t; },
          [t](const ConstantAcceleration& c) -> Vec3 {
            return c.position + c.velocity * t + 0.5 * t * t * c.acceleration;
          },
          [t](const Sinusoidal& s) -> Vec3 {
            return s.center + s.amplitude.cwiseProduct((s.omega * t + s.phase).array().sin().matrix());
          },
          [this, t](const Sampled& s) -> Vec3 {
            double over;
            const double tc = clampToSupport(s, t, over);
            Vec3 p;
            for (int a = 0; a < 3; ++a) p[a] = splines_[a](tc) + over * splines_[a].prime(tc);
            return p;
          },
      },
      kind_);
}

Vec3 LeaderTrajectory::velocity(double t) const {
  return std::visit(
      Overloaded{
          [](const Constant&) -> Vec3 { return Vec3::Zero(); },
          [](const ConstantVelocity& c) -> Vec3 { return c.velocity; },
          [t](const ConstantAcceleration& c) -> Vec3 { return c.velocity + t * c.acceleration; },
          [t](const Sinusoidal& s) -> Vec3 {
            return s.amplitude.cwiseProduct(s.omega).cwiseProduct((s.omega * t + s.phase).array().cos().matrix());
          },
          [this, t](const Sampled& s) -> Vec3 {
            double over;
            const double tc = clampToSupport(s, t, over);
            Vec3 v;
            for (int a = 0; a < 3; ++a) v[a] = splines_[a].prime(tc);
            return v;
          },
      },
      kind_);
}

Vec3 LeaderTrajectory::acceleration(double t) const {
  return std::visit(
      Overloaded{
          [](const Constant&) -> Vec3 { return Vec3::Zero(); },
          [](const ConstantVelocity&) -> Vec3 { return Vec3::Zero(); },
          [](const ConstantAcceleration& c) -> Vec3 { return c.acceleration; },
          [t](const Sinusoidal& s) -> Vec3 {
            return -s.amplitude.cwiseProduct(s.omega.cwiseAbs2())
                        .cwiseProduct((s.omega * t + s.phase).array().sin().matrix());
          },
          [this, t](const Sampled& s) -> Vec3 {
            double over;
            const double tc = clampToSupport(s, t, over);
            if (over != 0.0) return Vec3::Zero();
            Vec3 a;
            for (int k = 0; k < 3; ++k) a[k] = splines_[k].double_prime(tc);
            return a;
          },
      },
      kind_);
}

std::vector<std::string> FormationSpec::problems() const {
  std::vector<std::string> out;
  if (n < 2) out.push_back(fmt::format("formation.n must be >= 2 (got {})", n));
  if (!(r > 0.0)) out.push_back(fmt::format("formation.r must be > 0 (got {})", r));
  if (n >= 2 && edges.size() != static_cast<std::size_t>(n - 1)) {
    out.push_back(fmt::format("formation.edges must list n-1 = {} edges (got {})", n - 1, edges.size()));
  }
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto& e = edges[k];
    if (!(e.c > r)) {
      out.push_back(fmt::format("formation.edges[{}].c = {} must exceed r = {}", k, e.c, r));
    }
    if (!(e.c < maxEdge)) {
      out.push_back(fmt::format("formation.edges[{}].c = {} must be below D = {}", k, e.c, maxEdge));
    }
    if (const auto* s = std::get_if<OmegaSignal::Sinusoidal>(&e.omega.kind())) {
      if (std::abs(s->axis.norm() - 1.0) > 1e-9) {
        out.push_back(fmt::format("formation.edges[{}].omega_star.axis must be a unit vector", k));
      }
      if (!(s->freq > 0.0)) out.push_back(fmt::format("formation.edges[{}].omega_star.freq must be > 0", k));
    }
    if (const auto* p = std::get_if<OmegaSignal::PiecewiseConstant>(&e.omega.kind())) {
      bool ok = p->values.size() == p->switches.size() + 1;
      for (std::size_t j = 0; ok && j < p->switches.size(); ++j) {
        ok = p->switches[j] > (j == 0 ? 0.0 : p->switches[j - 1]);
      }
      if (!ok) {
        out.push_back(fmt::format(
            "formation.edges[{}].omega_star: switches must be positive and increasing with one more value than switches",
            k));
      }
    }
  }
  return out;
}

DesiredEdgeState desiredEdge(const FormationSpec& spec, int i, double t) {
  const FormationEdge& edge = spec.edge(i);
  const SkewMat3 omega = edge.omega.value(t);
  const Vec3 e0 = edge.c * edge.gStar.vec();
  DesiredEdgeState out;
  out.omega = omega;
  if (edge.omega.identicallyZero()) {
    out.eStar = e0;
    out.nuStar = Vec3::Zero();
    out.uEStarCoeff = Mat3::Zero();
    return out;
  }
  const Mat3 w = omega.matrix();
  out.eStar = edge.omega.transport(t) * e0;
  out.nuStar = omega * out.eStar;
  out.uEStarCoeff = edge.omega.derivative(t).matrix() + w * w;
  return out;
}

Vec3 desiredPosition(const FormationSpec& spec, int i, double t) {
  Vec3 p = spec.leader.position(t);
  for (int j = 2; j <= i; ++j) p += desiredEdge(spec, j, t).eStar;
  return p;
}

Vec3 desiredVelocity(const FormationSpec& spec, int i, double t) {
  Vec3 v = spec.leader.velocity(t);
  for (int j = 2; j <= i; ++j) v += desiredEdge(spec, j, t).nuStar;
  return v;
}

Vec3 desiredFeedforward(const FormationSpec& spec, int i, double t) {
  Vec3 u = spec.leader.acceleration(t);
  for (int j = 2; j <= i; ++j) {
    const DesiredEdgeState de = desiredEdge(spec, j, t);
    u += de.uEStarCoeff * de.eStar;
  }
  return u;
}

}  // namespace cbf

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

#include "cbf/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <Eigen/LU>
#include <fmt/format.h>

#include "cbf/errors.hpp"

namespace cbf {

double AlphaSignal::operator()(double t) const {
  double a = offset;
  for (const auto& k : terms) a += k.amp * std::sin(k.freq * t + k.phase);
  return a;
}

double AlphaSignal::derivative(double t) const {
  double a = 0.0;
  for (const auto& k : terms) a += k.amp * k.freq * std::cos(k.freq * t + k.phase);
  return a;
}

double AlphaSignal::integral(double t) const {
  double a = offset * t;
  for (const auto& k : terms) a -= k.amp / k.freq * (std::cos(k.freq * t + k.phase) - std::cos(k.phase));
  return a;
}

double AlphaSignal::bound() const {
  double b = std::abs(offset);
  for (const auto& k : terms) b += std::abs(k.amp);
  return b;
}

namespace {

// Past the singular boundary the derivative is replaced by a huge finite
// value so the step controller rejects the trial step instead of seeing NaN.
constexpr double kRejectValue = 1e200;

using Pair = Eigen::Vector2d;

Pair scalarRhs(const ScalarBarrierSystem& sys, double t, const Pair& x) {
  return Pair(x[1], x[0] > 0.0 ? -sys.ko * x[1] / x[0] - sys.alpha(t) : kRejectValue);
}

// Linearly implicit Rosenbrock (2,3) pair with an L-stable second-order
// solution; the 1/d damping term makes the system stiff as d -> 0.
class Rosenbrock23 {
 public:
  Rosenbrock23(const ScalarBarrierSystem& sys, double atol, double rtol) : sys_(sys), atol_(atol), rtol_(rtol) {}

  struct Attempt {
    Pair y;
    double err;
  };

  Attempt attempt(double t, const Pair& y, double h) const {
    static const double gamma = 1.0 / (2.0 + std::sqrt(2.0));
    static const double e32 = 6.0 + std::sqrt(2.0);
    const double d = y[0] > 0.0 ? y[0] : std::numeric_limits<double>::min();
    Eigen::Matrix2d jac;
    jac << 0.0, 1.0, sys_.ko * y[1] / (d * d), -sys_.ko / d;
    const Pair dfdt(0.0, -sys_.alpha.derivative(t));
    const Eigen::Matrix2d w = Eigen::Matrix2d::Identity() - h * gamma * jac;
    const Eigen::PartialPivLU<Eigen::Matrix2d> lu(w);
    const Pair f0 = scalarRhs(sys_, t, y);
    const Pair k1 = lu.solve(f0 + h * gamma * dfdt);
    const Pair f1 = scalarRhs(sys_, t + 0.5 * h, y + 0.5 * h * k1);
    const Pair k2 = lu.solve(f1 - k1) + k1;
    const Pair ynew = y + h * k2;
    const Pair f2 = scalarRhs(sys_, t + h, ynew);
    const Pair k3 = lu.solve(f2 - e32 * (k2 - f1) - 2.0 * (k1 - f0) + h * gamma * dfdt);
    const Pair errVec = h / 6.0 * (k1 - 2.0 * k2 + k3);
    double err = 0.0;
    for (int c = 0; c < 2; ++c) {
      const double scale = atol_ + rtol_ * std::max(std::abs(y[c]), std::abs(ynew[c]));
      err = std::max(err, std::abs(errVec[c]) / scale);
    }
    if (!std::isfinite(err) || !ynew.allFinite()) err = std::numeric_limits<double>::infinity();
    return {ynew, err};
  }

 private:
  const ScalarBarrierSystem& sys_;
  double atol_;
  double rtol_;
};

}  // namespace

ScalarTrajectory simulateScalarBarrier(const ScalarBarrierSystem& sys, double horizon, double dt,
                                const ScalarHarnessOptions& opts) {
  if (!(sys.d0 > 0.0) || !(sys.ko > 0.0) || !(dt > 0.0)) {
    throw ValidationError({"scalar barrier system needs d0 > 0, k_o > 0 and dt > 0"});
  }
  const double floor = opts.stopFloor * sys.d0;
  const Rosenbrock23 method(sys, 1e-6 * floor, opts.relTol);
  ScalarTrajectory out;
  Pair y(sys.d0, sys.ddot0);
  double t = 0.0;
  const auto push = [&](double ts, const Pair& s) {
    out.t.push_back(ts);
    out.d.push_back(s[0]);
    out.ddot.push_back(s[1]);
    out.phi.push_back(s[1] / s[0]);
    out.integralAlpha = sys.alpha.integral(ts);
  };
  push(t, y);
  out.minD = sys.d0;
  double h = std::min(dt, 1e-3 * sys.d0 / sys.ko);
  long long sample = 1;
  while (t < horizon) {
    const double nextSample = std::min(static_cast<double>(sample) * dt, horizon);
    const double hTry = std::min(h, nextSample - t);
    const auto [ynew, err] = method.attempt(t, y, hTry);
    if (err > 1.0) {
      h = hTry * std::max(0.1, 0.8 * std::cbrt(1.0 / err));
      if (h < 1e-14 * std::max(1.0, t)) {
        // Step size collapsed against the boundary.
        out.crossedZero = true;
        return out;
      }
      continue;
    }
    t = hTry == nextSample - t ? nextSample : t + hTry;
    y = ynew;
    if (!y.allFinite()) throw NonFiniteState(fmt::format("scalar barrier system blew up at t={}", t));
    out.minD = std::min(out.minD, y[0]);
    if (y[0] <= 0.0) {
      out.crossedZero = true;
      push(t, y);
      return out;
    }
    if (t == nextSample) {
      push(t, y);
      ++sample;
    }
    const double grow = err == 0.0 ? 5.0 : std::min(5.0, 0.8 * std::cbrt(1.0 / err));
    // A step clipped at a sample boundary says little about the natural size.
    h = hTry < h ? std::max(h, hTry * grow) : hTry * grow;
    if (y[0] < floor) {
      out.reachedFloor = true;
      if (out.t.back() < t) push(t, y);
      return out;
    }
  }
  return out;
}

namespace {

// dL/dt at interior row r, fourth order on uniform spacing (offset stencils
// next to the ends), three-point central otherwise.
double fourthOrderDerivative(const std::vector<TrajectoryRow>& rows, std::size_t r, std::size_t k) {
  const std::size_t n = rows.size();
  const double h = 0.5 * (rows[r + 1].t - rows[r - 1].t);
  const auto L = [&](std::size_t j) { return rows[j].L[k]; };
  const auto uniformOn = [&](std::size_t a, std::size_t b) {
    return std::abs(rows[b].t - rows[a].t - static_cast<double>(b - a) * h) <= 1e-9 * h;
  };
  if (n >= 5) {
    if (r >= 2 && r + 2 < n && uniformOn(r - 2, r + 2)) {
      return (L(r - 2) - 8.0 * L(r - 1) + 8.0 * L(r + 1) - L(r + 2)) / (12.0 * h);
    }
    if (r == 1 && uniformOn(0, 4)) {
      return (-3.0 * L(0) - 10.0 * L(1) + 18.0 * L(2) - 6.0 * L(3) + L(4)) / (12.0 * h);
    }
    if (r + 2 == n && uniformOn(n - 5, n - 1)) {
      return (3.0 * L(r + 1) + 10.0 * L(r) - 18.0 * L(r - 1) + 6.0 * L(r - 2) - L(r - 3)) / (12.0 * h);
    }
  }
  return (L(r + 1) - L(r - 1)) / (2.0 * h);
}

}  // namespace

std::vector<LyapunovCheck> checkLyapunov(const TrajectoryRecord& record, const FormationSpec& spec,
                                         const ControllerConfig& ctrl, std::optional<double> upstreamTol) {
  std::vector<LyapunovCheck> out;
  const auto& rows = record.rows;
  for (int i = 2; i <= spec.n; ++i) {
    LyapunovCheck c;
    c.follower = i;
    const auto k = static_cast<std::size_t>(i - 2);
    for (std::size_t r = 1; r + 1 < rows.size(); ++r) {
      if (upstreamTol && i >= 3) {
        const double upstream =
            (rows[r].p[k] - desiredPosition(spec, i - 1, rows[r].t)).norm();
        if (upstream >= *upstreamTol) continue;
      }
      const double fd = fourthOrderDerivative(rows, r, k);
      const auto& row = rows[r];
      const EdgeObservables obs = edgeObservables(row.p[k + 1], row.v[k + 1], row.p[k], row.v[k], spec.r,
                                                  desiredEdge(spec, i, row.t), i, row.t);
      const double analytic = lyapunov(obs, ctrl.follower(i)).dLdtAnalytic;
      c.maxFiniteDifference = c.samples == 0 ? fd : std::max(c.maxFiniteDifference, fd);
      c.maxAbsMismatch = std::max(c.maxAbsMismatch, std::abs(fd - analytic));
      c.maxAbsAnalytic = std::max(c.maxAbsAnalytic, std::abs(analytic));
      c.spacing = std::max(c.spacing, 0.5 * (rows[r + 1].t - rows[r - 1].t));
      ++c.samples;
    }
    out.push_back(c);
  }
  return out;
}

namespace {

struct SetPointState {
  Vec3 p;
  Vec3 v;
};

SetPointState setPointState(const FormationSpec& spec, const SetPoint& sp, double t) {
  SetPointState s{spec.leader.position(t), spec.leader.velocity(t)};
  for (int j = 2; j <= sp.agent; ++j) {
    const DesiredEdgeState de = desiredEdge(spec, j, t);
    const double scale = sp.choices[static_cast<std::size_t>(j - 2)] / spec.edge(j).c;
    s.p += scale * de.eStar;
    s.v += scale * de.nuStar;
  }
  return s;
}

}  // namespace

std::vector<SetPoint> enumerateSetPoints(const FormationSpec& spec, int agent, double t) {
  if (agent < 1 || agent > spec.n) {
    throw ValidationError({fmt::format("agent index {} outside 1..{}", agent, spec.n)});
  }
  const int edges = agent - 1;
  const int count = 1 << edges;
  std::vector<SetPoint> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int m = 1; m <= count; ++m) {
    SetPoint sp;
    sp.agent = agent;
    sp.index = m;
    sp.stable = m == 1;
    for (int j = 2; j <= agent; ++j) {
      const bool atBoundary = ((m - 1) >> (j - 2)) & 1;
      sp.choices.push_back(atBoundary ? -spec.r : spec.edge(j).c);
    }
    sp.position = setPointState(spec, sp, t).p;
    out.push_back(std::move(sp));
  }
  return out;
}

std::vector<LimitClass> classifyLimit(const TrajectoryRecord& record, const FormationSpec& spec,
                                      const ClassifyOptions& opts) {
  const double tolPos = opts.tolPos > 0.0 ? opts.tolPos : 1e-2 * spec.r;
  std::vector<LimitClass> out;
  if (record.rows.empty()) return out;
  const double tFirst = record.rows.front().t;
  const double tLast = record.rows.back().t;
  const double tailStart = tLast - opts.tailFraction * (tLast - tFirst);
  std::vector<const TrajectoryRow*> tail;
  for (const auto& row : record.rows) {
    if (row.t >= tailStart) tail.push_back(&row);
  }
  for (int i = 2; i <= spec.n; ++i) {
    const auto k = static_cast<std::size_t>(i - 1);
    LimitClass lc;
    lc.agent = i;
    const auto candidates = enumerateSetPoints(spec, i, tLast);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& sp : candidates) {
      double mean = 0.0;
      for (const auto* row : tail) mean += (row->p[k] - setPointState(spec, sp, row->t).p).norm();
      mean /= static_cast<double>(tail.size());
      if (mean < best) {
        best = mean;
        lc.setPoint = sp;
      }
    }
    for (const auto* row : tail) {
      const SetPointState s = setPointState(spec, *lc.setPoint, row->t);
      lc.maxTailDistance = std::max(lc.maxTailDistance, (row->p[k] - s.p).norm());
      lc.maxTailSpeed = std::max(lc.maxTailSpeed, (row->v[k] - s.v).norm());
    }
    lc.converged = lc.maxTailDistance < tolPos && lc.maxTailSpeed < opts.tolVel;
    out.push_back(std::move(lc));
  }
  return out;
}

WorldState probeInitialState(const FormationSpec& spec, const ProbeConfig& probe) {
  if (probe.edge < 2 || probe.edge > spec.n) {
    throw ValidationError({fmt::format("probe edge {} outside 2..{}", probe.edge, spec.n)});
  }
  if (!(probe.delta > 0.0)) throw ValidationError({"probe delta must be > 0"});
  const Vec3& gStar = spec.edge(probe.edge).gStar.vec();
  if (probe.epsilon != 0.0 && probe.omegaAxis.cross(gStar).norm() < 1e-12) {
    throw ValidationError({"probe rotation must move g* (g* in ker(Omega))"});
  }
  WorldState s;
  s.t = 0.0;
  s.agents.push_back({spec.leader.position(0.0), spec.leader.velocity(0.0)});
  const Rot3 rot = expSo3(SkewMat3(probe.omegaAxis), probe.epsilon);
  for (int j = 2; j <= spec.n; ++j) {
    const DesiredEdgeState de = desiredEdge(spec, j, 0.0);
    const Vec3 e = j == probe.edge ? Vec3(-(1.0 + probe.delta) * spec.r * (rot * gStar)) : de.eStar;
    const AgentState& prev = s.agents.back();
    s.agents.push_back({prev.p + e, prev.v + de.omega * e});
  }
  return s;
}

ProbeResult instabilityProbe(const FormationSpec& spec, const ControllerConfig& ctrl, const SimConfig& sim,
                             const ProbeConfig& probe) {
  const WorldState init = probeInitialState(spec, probe);
  const FollowerGains& gains = ctrl.follower(probe.edge);
  const FormationEdge& edge = spec.edge(probe.edge);
  const Vec3& gStar = edge.gStar.vec();
  const Vec3 eStar = edge.c * gStar;
  const Rot3 rot = expSo3(SkewMat3(probe.omegaAxis), probe.epsilon);
  const auto k = static_cast<std::size_t>(probe.edge - 1);

  ProbeResult res;
  res.startD = (init.agents[k].p - init.agents[k - 1].p).norm() - spec.r;
  const Vec3 zero = Vec3::Zero();
  res.lStart = lyapunovAt(init.agents[k].p - init.agents[k - 1].p - eStar, zero, gains);
  res.lUnstableSameRadius = lyapunovAt(-(1.0 + probe.delta) * spec.r * gStar - eStar, zero, gains);
  res.lEpsilon = lyapunovAt(-spec.r * (rot * gStar) - eStar, zero, gains);
  res.lUnstable = lyapunovAt(-spec.r * gStar - eStar, zero, gains);

  SimConfig cfg = sim;
  cfg.tEnd = probe.horizon;
  const TrajectoryRecord rec = run(init, spec, ctrl, cfg);
  res.termination = rec.termination;
  res.classes = classifyLimit(rec, spec, probe.classify);
  res.escaped = rec.termination == Termination::Completed &&
                std::all_of(res.classes.begin(), res.classes.end(), [](const LimitClass& c) {
                  return c.converged && c.setPoint && c.setPoint->index == 1;
                });
  return res;
}

}  // namespace cbf

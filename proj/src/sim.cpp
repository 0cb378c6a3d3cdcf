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

#include "cbf/sim.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "cbf/errors.hpp"
#include "cbf/lyapunov.hpp"

namespace cbf {

std::vector<Vec3> WorldState::positions() const {
  std::vector<Vec3> out;
  out.reserve(agents.size());
  for (const auto& a : agents) out.push_back(a.p);
  return out;
}

std::vector<Vec3> WorldState::velocities() const {
  std::vector<Vec3> out;
  out.reserve(agents.size());
  for (const auto& a : agents) out.push_back(a.v);
  return out;
}

bool WorldState::finite() const {
  if (!std::isfinite(t)) return false;
  return std::all_of(agents.begin(), agents.end(), [](const AgentState& a) { return a.p.allFinite() && a.v.allFinite(); });
}

std::string_view toString(Integrator i) { return i == Integrator::Rk4 ? "rk4" : "rk45-adaptive"; }

Integrator integratorFromString(std::string_view s) {
  if (s == "rk4") return Integrator::Rk4;
  if (s == "rk45-adaptive" || s == "rk45") return Integrator::Rk45Adaptive;
  throw ValidationError({fmt::format("unknown integrator '{}'", s)});
}

std::string_view toString(Termination t) {
  switch (t) {
    case Termination::Completed:
      return "completed";
    case Termination::BarrierViolation:
      return "barrier_violation";
    case Termination::NonFiniteState:
      return "non_finite_state";
  }
  return "unknown";
}

std::vector<std::string> SimConfig::problems(double r) const {
  std::vector<std::string> out;
  if (!(dt > 0.0) || !std::isfinite(dt)) out.push_back(fmt::format("sim.dt must be > 0 (got {})", dt));
  if (!(tEnd > 0.0) || !std::isfinite(tEnd)) out.push_back(fmt::format("sim.t_end must be > 0 (got {})", tEnd));
  if (recordStride < 1) out.push_back(fmt::format("sim.record_stride must be >= 1 (got {})", recordStride));
  if (dFloor < 0.0 || (r > 0.0 && dFloor >= 0.1 * r)) {
    out.push_back(fmt::format("sim.d_floor must satisfy 0 <= d_floor < 0.1 r (got {})", dFloor));
  }
  return out;
}

WorldState TrajectoryRecord::finalState() const {
  WorldState s;
  if (rows.empty()) return s;
  const auto& row = rows.back();
  s.t = row.t;
  for (int i = 0; i < n; ++i) s.agents.push_back({row.p[i], row.v[i]});
  return s;
}

namespace {

using Derivative = std::vector<AgentState>;  // (p', v') = (v, u)

struct EdgeGap {
  double d;
  int edge;
};

EdgeGap smallestGap(const WorldState& s, double r) {
  EdgeGap out{std::numeric_limits<double>::infinity(), 0};
  for (std::size_t k = 1; k < s.agents.size(); ++k) {
    const double d = (s.agents[k].p - s.agents[k - 1].p).norm() - r;
    if (!(d >= out.d)) out = {d, static_cast<int>(k + 1)};
  }
  return out;
}

WorldState offset(const WorldState& s, double h, std::initializer_list<std::pair<double, const Derivative*>> terms) {
  WorldState out = s;
  for (const auto& [c, k] : terms) {
    for (std::size_t a = 0; a < out.agents.size(); ++a) {
      out.agents[a].p += h * c * (*k)[a].p;
      out.agents[a].v += h * c * (*k)[a].v;
    }
  }
  return out;
}

double maxDifference(const WorldState& a, const WorldState& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.agents.size(); ++k) {
    m = std::max(m, (a.agents[k].p - b.agents[k].p).cwiseAbs().maxCoeff());
    m = std::max(m, (a.agents[k].v - b.agents[k].v).cwiseAbs().maxCoeff());
  }
  return m;
}

class Stepper {
 public:
  Stepper(const FormationSpec& spec, const ControllerConfig& ctrl, const SimConfig& cfg)
      : spec_(spec), ctrl_(ctrl), cfg_(cfg), floor_(cfg.floorFor(spec.r)) {}

  /// Advances `s` to time `target`.
  WorldState advance(const WorldState& s, double target) {
    return cfg_.integrator == Integrator::Rk4 ? advanceRk4(s, target) : advanceRk45(s, target);
  }

  long long evaluations() const noexcept { return evals_; }

 private:
  Derivative rhs(const WorldState& s) {
    ++evals_;
    const EdgeGap gap = smallestGap(s, spec_.r);
    if (gap.d <= floor_) throw BarrierViolation(gap.edge, s.t, gap.d);
    const auto pos = s.positions();
    const auto vel = s.velocities();
    const ClosedLoopSample sample = evaluateClosedLoop(spec_, ctrl_, s.t, pos, vel);
    Derivative k(s.agents.size());
    for (std::size_t a = 0; a < k.size(); ++a) k[a] = {s.agents[a].v, sample.u[a]};
    return k;
  }

  WorldState rk4(const WorldState& s, double h) {
    const Derivative k1 = rhs(s);
    WorldState s2 = offset(s, h, {{0.5, &k1}});
    s2.t = s.t + 0.5 * h;
    const Derivative k2 = rhs(s2);
    WorldState s3 = offset(s, h, {{0.5, &k2}});
    s3.t = s.t + 0.5 * h;
    const Derivative k3 = rhs(s3);
    WorldState s4 = offset(s, h, {{1.0, &k3}});
    s4.t = s.t + h;
    const Derivative k4 = rhs(s4);
    WorldState out = offset(s, h, {{1.0 / 6.0, &k1}, {2.0 / 6.0, &k2}, {2.0 / 6.0, &k3}, {1.0 / 6.0, &k4}});
    out.t = s.t + h;
    return out;
  }

  bool nearBarrier(const WorldState& s) const {
    return smallestGap(s, spec_.r).d < cfg_.nearBarrierFraction * spec_.r;
  }

  WorldState advanceRk4(WorldState s, double target) {
    const double h = target - s.t;
    const double hMin = std::ldexp(h, -cfg_.maxHalvings);
    double hs = std::min(hint_ > 0.0 ? hint_ : h, h);
    while (target - s.t > 1e-12 * h) {
      const double remaining = target - s.t;
      if (!nearBarrier(s)) {
        double hTry = remaining;
        for (;;) {
          try {
            s = rk4(s, hTry);
            break;
          } catch (const BarrierViolation&) {
            if (hTry * 0.5 < hMin) throw;
            hTry *= 0.5;
          }
        }
        continue;
      }
      // Step doubling: the divergent-flow term stiffens as d -> 0.
      hs = std::min(hs, remaining);
      WorldState fine;
      double err;
      try {
        const WorldState coarse = rk4(s, hs);
        fine = rk4(rk4(s, 0.5 * hs), 0.5 * hs);
        err = maxDifference(coarse, fine);
      } catch (const BarrierViolation&) {
        if (hs * 0.5 < hMin) throw;
        hs *= 0.5;
        continue;
      }
      if (err > cfg_.substepTolerance && hs * 0.5 >= hMin) {
        hs *= 0.5;
        continue;
      }
      s = fine;
      if (hs >= remaining) s.t = target;
      if (err < cfg_.substepTolerance / 32.0) hs = std::min(2.0 * hs, h);
    }
    s.t = target;
    hint_ = hs;
    return s;
  }

  WorldState advanceRk45(WorldState s, double target) {
    // Dormand-Prince 5(4).
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;

    const double h = target - s.t;
    const double hMin = std::ldexp(h, -40);
    double hs = std::min(hint_ > 0.0 ? hint_ : h, h);
    while (target - s.t > 1e-12 * h) {
      hs = std::min(hs, target - s.t);
      WorldState y5;
      double errNorm;
      try {
        const Derivative k1 = rhs(s);
        auto at = [&](double c, std::initializer_list<std::pair<double, const Derivative*>> terms) {
          WorldState w = offset(s, hs, terms);
          w.t = s.t + c * hs;
          return w;
        };
        const Derivative k2 = rhs(at(c2, {{a21, &k1}}));
        const Derivative k3 = rhs(at(c3, {{a31, &k1}, {a32, &k2}}));
        const Derivative k4 = rhs(at(c4, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
        const Derivative k5 = rhs(at(c5, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
        const Derivative k6 = rhs(at(1.0, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
        y5 = at(1.0, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
        const Derivative k7 = rhs(y5);
        const WorldState err = offset(WorldState{s.t, Derivative(s.agents.size())}, hs,
                                      {{e1, &k1}, {e3, &k3}, {e4, &k4}, {e5, &k5}, {e6, &k6}, {e7, &k7}});
        errNorm = 0.0;
        for (std::size_t a = 0; a < s.agents.size(); ++a) {
          for (int c = 0; c < 3; ++c) {
            const double sp = cfg_.rk45AbsTol +
                              cfg_.rk45RelTol * std::max(std::abs(s.agents[a].p[c]), std::abs(y5.agents[a].p[c]));
            const double sv = cfg_.rk45AbsTol +
                              cfg_.rk45RelTol * std::max(std::abs(s.agents[a].v[c]), std::abs(y5.agents[a].v[c]));
            errNorm = std::max({errNorm, std::abs(err.agents[a].p[c]) / sp, std::abs(err.agents[a].v[c]) / sv});
          }
        }
      } catch (const BarrierViolation&) {
        if (hs * 0.25 < hMin) throw;
        hs *= 0.25;
        continue;
      }
      if (!std::isfinite(errNorm)) throw NonFiniteState(fmt::format("non-finite error estimate at t={}", s.t));
      if (errNorm > 1.0) {
        if (hs < hMin) throw NonFiniteState(fmt::format("step size underflow at t={}", s.t));
        hs *= std::max(0.2, 0.9 * std::pow(errNorm, -0.2));
        continue;
      }
      const bool last = hs >= target - s.t;
      s = y5;
      if (last) s.t = target;
      const double grow = errNorm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(errNorm, -0.2), 0.2, 5.0);
      hs = std::min(hs * grow, h);
    }
    s.t = target;
    hint_ = hs;
    return s;
  }

  const FormationSpec& spec_;
  const ControllerConfig& ctrl_;
  const SimConfig& cfg_;
  double floor_;
  double hint_ = 0.0;
  long long evals_ = 0;
};

TrajectoryRow makeRow(const WorldState& s, const FormationSpec& spec, const ControllerConfig& ctrl) {
  const auto pos = s.positions();
  const auto vel = s.velocities();
  const ClosedLoopSample sample = evaluateClosedLoop(spec, ctrl, s.t, pos, vel);
  TrajectoryRow row;
  row.t = s.t;
  row.p = pos;
  row.v = vel;
  row.u = sample.u;
  for (int i = 2; i <= spec.n; ++i) {
    const EdgeObservables& obs = sample.edges[static_cast<std::size_t>(i - 2)];
    row.d.push_back(obs.d);
    row.phi.push_back(obs.phi);
    row.eTilde.push_back(obs.eTilde);
    row.nuTilde.push_back(obs.nuTilde);
    row.L.push_back(lyapunov(obs, ctrl.follower(i)).L);
  }
  return row;
}

void trackExtremes(const WorldState& s, double r, TrajectoryRecord& rec) {
  for (std::size_t k = 1; k < s.agents.size(); ++k) {
    const Vec3 e = s.agents[k].p - s.agents[k - 1].p;
    const double len = e.norm();
    const double d = len - r;
    rec.minD = std::min(rec.minD, d);
    if (d > 0.0) {
      const double phi = e.dot(s.agents[k].v - s.agents[k - 1].v) / (len * d);
      rec.maxAbsPhi = std::max(rec.maxAbsPhi, std::abs(phi));
    }
  }
}

}  // namespace

WorldState step(const WorldState& state, const FormationSpec& spec, const ControllerConfig& ctrl,
                const SimConfig& cfg) {
  Stepper stepper(spec, ctrl, cfg);
  WorldState next = stepper.advance(state, state.t + cfg.dt);
  if (!next.finite()) throw NonFiniteState(fmt::format("non-finite state at t={}", next.t));
  return next;
}

TrajectoryRecord run(const WorldState& initial, const FormationSpec& spec, const ControllerConfig& ctrl,
                     const SimConfig& cfg) {
  if (static_cast<int>(initial.agents.size()) != spec.n) {
    throw ValidationError({fmt::format("initial state has {} agents, formation has {}", initial.agents.size(), spec.n)});
  }
  const double floor = cfg.floorFor(spec.r);
  TrajectoryRecord rec;
  rec.n = spec.n;
  rec.minD = std::numeric_limits<double>::infinity();
  const EdgeGap gap0 = smallestGap(initial, spec.r);
  if (!(gap0.d > floor)) {
    throw ValidationError({fmt::format("edge {} starts with d = {} <= d_floor = {}", gap0.edge, gap0.d, floor)});
  }

  Stepper stepper(spec, ctrl, cfg);
  const auto steps = static_cast<long long>(std::llround(cfg.tEnd / cfg.dt));
  WorldState s = initial;
  trackExtremes(s, spec.r, rec);
  rec.rows.push_back(makeRow(s, spec, ctrl));
  for (long long k = 1; k <= steps; ++k) {
    const double target = initial.t + static_cast<double>(k) * cfg.dt;
    try {
      s = stepper.advance(s, target);
    } catch (const BarrierViolation& bv) {
      rec.termination = Termination::BarrierViolation;
      rec.violationEdge = bv.edge();
      rec.violationTime = bv.time();
      rec.message = bv.what();
      rec.minD = std::min(rec.minD, bv.distance());
      break;
    } catch (const NonFiniteState& nf) {
      rec.termination = Termination::NonFiniteState;
      rec.message = nf.what();
      break;
    }
    if (!s.finite()) {
      rec.termination = Termination::NonFiniteState;
      rec.message = fmt::format("non-finite state at t={}", target);
      break;
    }
    trackExtremes(s, spec.r, rec);
    const EdgeGap gap = smallestGap(s, spec.r);
    if (gap.d <= floor) {
      rec.termination = Termination::BarrierViolation;
      rec.violationEdge = gap.edge;
      rec.violationTime = s.t;
      rec.message = BarrierViolation(gap.edge, s.t, gap.d).what();
      break;
    }
    if (k % cfg.recordStride == 0 || k == steps) rec.rows.push_back(makeRow(s, spec, ctrl));
  }
  rec.rhsEvaluations = stepper.evaluations();
  return rec;
}

std::vector<FollowerErrors> errorStates(const WorldState& state, const FormationSpec& spec) {
  std::vector<FollowerErrors> out;
  for (int i = 2; i <= spec.n; ++i) {
    const DesiredEdgeState de = desiredEdge(spec, i, state.t);
    const auto& a = state.agents[static_cast<std::size_t>(i - 1)];
    const auto& b = state.agents[static_cast<std::size_t>(i - 2)];
    const Vec3 e = a.p - b.p;
    const Vec3 nu = a.v - b.v;
    out.push_back(FollowerErrors{
        .eTilde = e - de.eStar,
        .nuTilde = nu - de.omega * e,
        .pTilde = a.p - desiredPosition(spec, i, state.t),
        .vTilde = a.v - desiredVelocity(spec, i, state.t),
    });
  }
  return out;
}

std::string csvHeader(int n) {
  std::string h = "t";
  static constexpr const char* axes[] = {"x", "y", "z"};
  for (int i = 1; i <= n; ++i) {
    for (const char* a : axes) h += fmt::format(",p{}{}", i, a);
    for (const char* a : axes) h += fmt::format(",v{}{}", i, a);
  }
  for (int i = 2; i <= n; ++i) {
    for (const char* a : axes) h += fmt::format(",u{}{}", i, a);
  }
  for (int i = 2; i <= n; ++i) h += fmt::format(",d{}", i);
  for (int i = 2; i <= n; ++i) h += fmt::format(",phi{}", i);
  for (int i = 2; i <= n; ++i) h += fmt::format(",L{}", i);
  return h;
}

void writeCsv(const TrajectoryRecord& record, std::ostream& out) {
  out << csvHeader(record.n) << '\n';
  fmt::memory_buffer buf;
  for (const auto& row : record.rows) {
    buf.clear();
    fmt::format_to(std::back_inserter(buf), "{}", row.t);
    for (int i = 0; i < record.n; ++i) {
      for (int c = 0; c < 3; ++c) fmt::format_to(std::back_inserter(buf), ",{}", row.p[i][c]);
      for (int c = 0; c < 3; ++c) fmt::format_to(std::back_inserter(buf), ",{}", row.v[i][c]);
    }
    for (int i = 1; i < record.n; ++i) {
      for (int c = 0; c < 3; ++c) fmt::format_to(std::back_inserter(buf), ",{}", row.u[i][c]);
    }
    for (double d : row.d) fmt::format_to(std::back_inserter(buf), ",{}", d);
    for (double p : row.phi) fmt::format_to(std::back_inserter(buf), ",{}", p);
    for (double l : row.L) fmt::format_to(std::back_inserter(buf), ",{}", l);
    buf.push_back('\n');
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
}

}  // namespace cbf

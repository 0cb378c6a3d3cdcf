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

#include "cbf/verify.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <numbers>
#include <thread>

#include <fmt/format.h>

#include "cbf/analysis.hpp"
#include "cbf/errors.hpp"

namespace cbf {

using nlohmann::json;

bool VerifyReport::allPassed() const {
  return std::all_of(claims.begin(), claims.end(), [](const Claim& c) { return c.passed; });
}

json VerifyReport::toJson() const {
  json arr = json::array();
  for (const auto& c : claims) {
    arr.push_back({{"suite", c.suite}, {"claim", c.name}, {"passed", c.passed}, {"detail", c.detail},
                   {"measured", c.measured}});
  }
  return {{"seed", seed}, {"passed", allPassed()}, {"claims", arr}};
}

std::string VerifyReport::summary() const {
  std::string out;
  int passed = 0;
  for (const auto& c : claims) {
    out += fmt::format("[{}] {}.{}: {}\n", c.passed ? "PASS" : "FAIL", c.suite, c.name, c.detail);
    passed += c.passed ? 1 : 0;
  }
  out += fmt::format("{}/{} claims passed (seed {})\n", passed, claims.size(), seed);
  return out;
}

std::vector<std::string> suiteNames() { return {"lemma1", "lyapunov", "setpoints", "instability", "preset"}; }

void parallelFor(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (threads == 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failureMutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < count; k = next++) {
        try {
          fn(k);
        } catch (...) {
          std::lock_guard lock(failureMutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

Vec3 randomUnit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    const Vec3 v(n(rng), n(rng), n(rng));
    if (v.norm() > 1e-3) return v.normalized();
  }
}

// ---------------------------------------------------------------------------

std::vector<Claim> scalarBarrierSuite(std::mt19937_64& rng, unsigned threads) {
  std::vector<Claim> out;
  constexpr int kRandomSystems = 100;
  constexpr double kHorizon = 20.0;
  constexpr double kSampleDt = 0.01;
  {
    std::vector<ScalarBarrierSystem> systems;
    for (int k = 0; k < kRandomSystems; ++k) {
      ScalarBarrierSystem s;
      s.ko = uniform(rng, 0.5, 10.0);
      s.d0 = std::pow(10.0, uniform(rng, -2.0, 1.0));
      s.ddot0 = uniform(rng, -3.0, 3.0);
      s.alpha.offset = uniform(rng, -2.0, 2.0);
      for (int t = 0; t < 2; ++t) {
        s.alpha.terms.push_back({uniform(rng, 0.0, 2.0), uniform(rng, 0.2, 3.0), uniform(rng, 0.0, 2.0 * std::numbers::pi)});
      }
      systems.push_back(s);
    }
    std::vector<ScalarTrajectory> runs(systems.size());
    parallelFor(systems.size(), threads, [&](std::size_t k) { runs[k] = simulateScalarBarrier(systems[k], kHorizon, kSampleDt); });
    double minD = std::numeric_limits<double>::infinity();
    int crossed = 0;
    int floored = 0;
    for (const auto& r : runs) {
      minD = std::min(minD, r.minD);
      crossed += r.crossedZero ? 1 : 0;
      floored += r.reachedFloor ? 1 : 0;
    }
    out.push_back({"lemma1", "positivity", crossed == 0 && minD > 0.0,
                   fmt::format("{} random bounded-alpha systems, min d = {:.3e}, {} crossed zero", kRandomSystems, minD, crossed),
                   {{"systems", kRandomSystems}, {"min_d", minD}, {"crossed_zero", crossed}, {"reached_floor", floored}}});
  }
  {
    constexpr double kRelTol = 0.02;
    json cases = json::array();
    bool ok = true;
    double worst = 0.0;
    for (double a0 : {0.5, 1.0, 2.0}) {
      for (double ko : {1.0, 2.0, 7.0}) {
        ScalarBarrierSystem s;
        s.ko = ko;
        s.alpha.offset = a0;
        s.d0 = 1.0;
        s.ddot0 = 0.0;
        const ScalarTrajectory r = simulateScalarBarrier(s, 10.0 * ko / a0 + 10.0, kSampleDt);
        const double target = -a0 / ko;
        const double rel = std::abs(r.phi.back() / target - 1.0);
        worst = std::max(worst, rel);
        ok = ok && rel <= kRelTol && !r.crossedZero;
        cases.push_back({{"alpha0", a0}, {"k_o", ko}, {"phi_T", r.phi.back()}, {"target", target}, {"rel_err", rel}});
      }
    }
    out.push_back({"lemma1", "terminal_flow", ok,
                   fmt::format("phi(T) vs -alpha0/k_o over 9 cases, worst relative error {:.2e} (tol {})", worst, kRelTol),
                   {{"cases", cases}, {"tolerance", kRelTol}}});
  }
  {
    struct Case {
      double amp, freq, ko;
    };
    bool ok = true;
    double worst = std::numeric_limits<double>::infinity();
    json cases = json::array();
    for (const Case c : {Case{1.0, 1.0, 2.0}, Case{0.5, 1.0, 1.0}, Case{2.0, 2.0, 7.0}, Case{1.0, 0.5, 7.0}}) {
      ScalarBarrierSystem s;
      s.ko = c.ko;
      s.alpha.terms = {{c.amp, c.freq, 0.0}};
      s.d0 = 1.0;
      const ScalarTrajectory r = simulateScalarBarrier(s, 60.0, kSampleDt);
      const double ratio = r.minD / s.d0;
      worst = std::min(worst, ratio);
      ok = ok && ratio > 0.1 && !r.crossedZero && !r.reachedFloor;
      cases.push_back({{"amp", c.amp}, {"freq", c.freq}, {"k_o", c.ko}, {"min_d_over_d0", ratio}});
    }
    out.push_back({"lemma1", "bounded_integral", ok,
                   fmt::format("alpha = A sin(w t): min d / d0 = {:.3f} (threshold 0.1)", worst), {{"cases", cases}}});
  }
  {
    // One-sided check of the divergence direction: a positive constant alpha
    // has an unbounded integral and must drive d toward zero.
    bool ok = true;
    json cases = json::array();
    for (double a0 : {0.5, 1.0, 2.0}) {
      ScalarBarrierSystem s;
      s.ko = 2.0;
      s.alpha.offset = a0;
      s.d0 = 1.0;
      const ScalarTrajectory r = simulateScalarBarrier(s, 10.0 * s.ko / a0 + 10.0, kSampleDt);
      const double ratio = r.d.back() / s.d0;
      ok = ok && ratio < 1e-3 && !r.crossedZero;
      cases.push_back({{"alpha0", a0}, {"d_T_over_d0", ratio}, {"int_alpha", r.integralAlpha}});
    }
    out.push_back({"lemma1", "divergent_integral", ok, "constant alpha0 > 0 drives d below 1e-3 d0 without crossing",
                   {{"cases", cases}}});
  }
  return out;
}

// ---------------------------------------------------------------------------

}  // namespace

Scenario randomTwoAgentScenario(std::mt19937_64& rng) {
  Scenario s;
  s.label = "random-two-agent";
  s.formation.n = 2;
  s.formation.r = 0.5;
  const double c = uniform(rng, 1.0, 2.5);
  s.formation.edges = {{c, UnitVec3(randomUnit(rng)), OmegaSignal::zero()}};
  s.controller.variant = NominalVariant::Centralized;
  FollowerGains g;
  g.kp = uniform(rng, 1.0, 4.0);
  g.kv = uniform(rng, 1.0, 4.0);
  g.ko = uniform(rng, 0.5, 3.0);
  s.controller.gains = {g};
  s.sim.dt = 0.01;
  s.sim.tEnd = 15.0;
  const Vec3 eStar = c * s.formation.edges[0].gStar.vec();
  Vec3 e0;
  do {
    e0 = eStar + uniform(rng, 0.2, 2.0) * randomUnit(rng);
  } while (e0.norm() < 1.5 * s.formation.r);
  const Vec3 nu0 = uniform(rng, 0.0, 1.0) * randomUnit(rng);
  s.initial.agents = {{Vec3::Zero(), Vec3::Zero()}, {e0, nu0}};
  return s;
}

namespace {

std::vector<Claim> lyapunovSuite(std::mt19937_64& rng, unsigned threads) {
  constexpr int kScenarios = 20;
  constexpr double kMarginFraction = 0.05;
  constexpr double kMonotoneTol = 1e-9;
  constexpr double kMismatchFactor = 5.0;

  std::vector<Scenario> scenarios;
  std::vector<TrajectoryRecord> records;
  int rejected = 0;
  while (static_cast<int>(scenarios.size()) < kScenarios) {
    // Draw a batch, keep those whose edge stays clear of the barrier.
    std::vector<Scenario> batch;
    for (int k = 0; k < kScenarios; ++k) batch.push_back(randomTwoAgentScenario(rng));
    std::vector<TrajectoryRecord> recs(batch.size());
    parallelFor(batch.size(), threads, [&](std::size_t k) {
      recs[k] = run(batch[k].initial, batch[k].formation, batch[k].controller, batch[k].sim);
    });
    for (std::size_t k = 0; k < batch.size() && static_cast<int>(scenarios.size()) < kScenarios; ++k) {
      if (recs[k].termination == Termination::Completed && recs[k].minD > kMarginFraction * batch[k].formation.r) {
        scenarios.push_back(batch[k]);
        records.push_back(std::move(recs[k]));
      } else {
        ++rejected;
      }
    }
  }

  double worstFd = -std::numeric_limits<double>::infinity();
  double worstRatio = 0.0;
  bool monotone = true;
  bool matches = true;
  json cases = json::array();
  for (std::size_t k = 0; k < scenarios.size(); ++k) {
    const auto checks = checkLyapunov(records[k], scenarios[k].formation, scenarios[k].controller);
    const auto& c = checks.front();
    const double tol = kMismatchFactor * c.spacing * c.spacing * c.maxAbsAnalytic;
    worstFd = std::max(worstFd, c.maxFiniteDifference);
    worstRatio = std::max(worstRatio, c.maxAbsMismatch / tol);
    monotone = monotone && c.maxFiniteDifference <= kMonotoneTol;
    matches = matches && c.maxAbsMismatch <= tol;
    cases.push_back({{"max_fd", c.maxFiniteDifference}, {"max_mismatch", c.maxAbsMismatch}, {"tolerance", tol},
                     {"min_d", records[k].minD}});
  }
  return {
      {"lyapunov", "monotone", monotone,
       fmt::format("{} two-agent runs, max finite-difference dL/dt = {:.3e} (tol {})", kScenarios, worstFd, kMonotoneTol),
       {{"cases", cases}, {"rejected_draws", rejected}}},
      {"lyapunov", "matches_analytic", matches,
       fmt::format("worst |fd - analytic| / (5 dt^2 max|dL/dt|) = {:.3f}", worstRatio), {{"worst_ratio", worstRatio}}},
  };
}

// ---------------------------------------------------------------------------

std::vector<Claim> setpointSuite(std::mt19937_64& rng) {
  FormationSpec spec;
  spec.n = 5;
  spec.r = 0.5;
  spec.leader = LeaderTrajectory(LeaderTrajectory::Constant{Vec3(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1))});
  for (int k = 0; k < 4; ++k) spec.edges.push_back({uniform(rng, 1.0, 3.0), UnitVec3(randomUnit(rng)), OmegaSignal::zero()});
  bool ok = true;
  json cases = json::array();
  double worst = 0.0;
  for (int i = 2; i <= 5; ++i) {
    const auto pts = enumerateSetPoints(spec, i);
    const auto stable = std::count_if(pts.begin(), pts.end(), [](const SetPoint& p) { return p.stable; });
    const auto it = std::find_if(pts.begin(), pts.end(), [](const SetPoint& p) { return p.stable; });
    const double err = it == pts.end() ? INFINITY : (it->position - desiredPosition(spec, i, 0.0)).norm();
    worst = std::max(worst, err);
    ok = ok && pts.size() == (std::size_t{1} << (i - 1)) && stable == 1 && err <= 1e-12;
    cases.push_back({{"agent", i}, {"count", pts.size()}, {"stable", stable}, {"stable_error", err}});
  }
  std::vector<Claim> out{{"setpoints", "enumeration", ok,
                          fmt::format("2^(i-1) set points with one stable for i = 2..5, stable error {:.1e}", worst),
                          {{"cases", cases}}}};

  const Scenario s = preset("paper-4agent");
  const TrajectoryRecord rec = run(s.initial, s.formation, s.controller, s.sim);
  const auto classes = classifyLimit(rec, s.formation);
  bool allDesired = rec.termination == Termination::Completed;
  json cls = json::array();
  for (const auto& c : classes) {
    allDesired = allDesired && c.converged && c.setPoint->index == 1;
    cls.push_back({{"agent", c.agent}, {"m", c.setPoint ? c.setPoint->index : 0}, {"converged", c.converged}});
  }
  out.push_back({"setpoints", "classify_preset", allDesired, "paper-4agent: every follower converges to m = 1",
                 {{"classes", cls}}});
  return out;
}

// ---------------------------------------------------------------------------

std::vector<Vec3> probeAxes() {
  return {Vec3::UnitZ(), Vec3::UnitY(), Vec3(0, 1, 1).normalized(), Vec3(0, 1, -1).normalized(),
          Vec3(1, 1, 1).normalized()};
}

std::vector<Claim> instabilitySuite(unsigned threads) {
  const Scenario s = preset("paper-4agent");
  const auto axes = probeAxes();
  std::vector<ProbeResult> results(axes.size());
  parallelFor(axes.size(), threads, [&](std::size_t k) {
    ProbeConfig p;
    p.edge = 2;
    p.epsilon = 0.05;
    p.delta = 0.01;
    p.omegaAxis = axes[k];
    p.horizon = 20.0;
    results[k] = instabilityProbe(s.formation, s.controller, s.sim, p);
  });
  int escaped = 0;
  bool drop = true;
  json cases = json::array();
  for (const auto& r : results) {
    escaped += r.escaped ? 1 : 0;
    drop = drop && r.lStart < r.lUnstableSameRadius && r.lEpsilon < r.lUnstable;
    cases.push_back({{"escaped", r.escaped}, {"L_start", r.lStart}, {"L_unstable_same_radius", r.lUnstableSameRadius},
                     {"L_eps", r.lEpsilon}, {"L_0", r.lUnstable}});
  }
  std::vector<Claim> out{
      {"instability", "escape", escaped == static_cast<int>(axes.size()),
       fmt::format("{}/{} probes (eps 0.05, delta 0.01) escape to m = 1", escaped, axes.size()), {{"cases", cases}}},
      {"instability", "lyapunov_drop", drop, "L(perturbed) < L(unstable point) for every probe", {}},
  };

  const std::vector<double> eps = {0.01, 0.02, 0.05, 0.1, 0.2};
  const std::vector<double> deltas = {0.005, 0.01, 0.02, 0.05, 0.1};
  std::vector<char> grid(eps.size() * deltas.size(), 0);
  parallelFor(grid.size(), threads, [&](std::size_t k) {
    ProbeConfig p;
    p.epsilon = eps[k / deltas.size()];
    p.delta = deltas[k % deltas.size()];
    p.omegaAxis = axes[k % axes.size()];
    p.horizon = 40.0;
    grid[k] = instabilityProbe(s.formation, s.controller, s.sim, p).escaped ? 1 : 0;
  });
  const auto gridEscaped = std::count(grid.begin(), grid.end(), 1);
  out.push_back({"instability", "grid", gridEscaped == static_cast<long>(grid.size()),
                 fmt::format("{}/{} probes on the 5x5 (eps, delta) grid escape", gridEscaped, grid.size()),
                 {{"escaped", gridEscaped}}});
  return out;
}

// ---------------------------------------------------------------------------

std::vector<Claim> presetSuite(unsigned threads) {
  std::vector<Claim> out;
  const Scenario base = preset("paper-4agent");

  Scenario baseline = base;
  applyOverride(baseline, "k_o=0");
  Scenario centralized = base;
  applyOverride(centralized, "variant=centralized");
  Scenario halved = base;
  applyOverride(halved, "dt=" + fmt::format("{}", base.sim.dt / 2.0));

  const std::vector<const Scenario*> runs = {&base, &baseline, &centralized, &halved};
  std::vector<TrajectoryRecord> recs(runs.size());
  std::vector<double> wall(runs.size());
  parallelFor(runs.size(), threads, [&](std::size_t k) {
    const auto t0 = std::chrono::steady_clock::now();
    recs[k] = run(runs[k]->initial, runs[k]->formation, runs[k]->controller, runs[k]->sim);
    wall[k] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  });

  {
    const auto& rec = recs[0];
    double maxErr = 0.0;
    for (const auto& e : errorStates(rec.finalState(), base.formation)) maxErr = std::max(maxErr, e.pTilde.norm());
    const bool ok = rec.termination == Termination::Completed && rec.rows.back().t >= base.sim.tEnd - 1e-9 &&
                    rec.minD > 0.0 && maxErr < 1e-2 && wall[0] < 5.0;
    out.push_back({"preset", "collision_avoidance", ok,
                   fmt::format("min d = {:.4f}, max |p~(T)| = {:.2e}, wall {:.2f} s", rec.minD, maxErr, wall[0]),
                   {{"min_d", rec.minD}, {"max_final_error", maxErr}, {"wall_time_s", wall[0]}}});
  }
  {
    const auto& rec = recs[1];
    const bool ok = rec.termination == Termination::BarrierViolation && rec.violationTime.value_or(INFINITY) < base.sim.tEnd;
    out.push_back({"preset", "baseline_collision", ok,
                   fmt::format("k_o = 0 ends with {} at t = {:.3f}", toString(rec.termination), rec.violationTime.value_or(NAN)),
                   {{"termination", std::string(toString(rec.termination))}, {"violation_time", rec.violationTime.value_or(NAN)}}});
  }
  {
    bool ok = true;
    json cls = json::array();
    for (std::size_t k : {std::size_t{0}, std::size_t{2}}) {
      for (const auto& c : classifyLimit(recs[k], base.formation)) {
        ok = ok && c.converged && c.setPoint->index == 1;
        cls.push_back({{"variant", k == 0 ? "distributed" : "centralized"}, {"agent", c.agent}, {"m", c.setPoint->index}});
      }
    }
    // Drop the upstream agents onto their desired trajectories and compare
    // both laws for the downstream follower at every recorded state.
    double worst = 0.0;
    ControllerConfig dist = base.controller;
    dist.variant = NominalVariant::Distributed;
    ControllerConfig cent = base.controller;
    cent.variant = NominalVariant::Centralized;
    for (const auto& row : recs[0].rows) {
      for (int i = 2; i <= base.formation.n; ++i) {
        std::vector<Vec3> p(row.p.begin(), row.p.begin() + i);
        std::vector<Vec3> v(row.v.begin(), row.v.begin() + i);
        for (int j = 1; j < i; ++j) {
          p[j - 1] = desiredPosition(base.formation, j, row.t);
          v[j - 1] = desiredVelocity(base.formation, j, row.t);
        }
        p[i - 1] = p[i - 2] + (row.p[i - 1] - row.p[i - 2]);
        v[i - 1] = v[i - 2] + (row.v[i - 1] - row.v[i - 2]);
        FormationSpec truncated = base.formation;
        truncated.n = i;
        truncated.edges.resize(static_cast<std::size_t>(i - 1));
        const auto a = evaluateClosedLoop(truncated, dist, row.t, p, v);
        const auto b = evaluateClosedLoop(truncated, cent, row.t, p, v);
        worst = std::max(worst, (a.u.back() - b.u.back()).cwiseAbs().maxCoeff());
      }
    }
    ok = ok && worst <= 1e-10;
    out.push_back({"preset", "distributed_vs_centralized", ok,
                   fmt::format("both variants reach m = 1; tracked-neighbor input gap {:.1e} (tol 1e-10)", worst),
                   {{"classes", cls}, {"max_input_gap", worst}}});
  }
  {
    double gap = 0.0;
    const auto a = recs[0].finalState();
    const auto b = recs[3].finalState();
    const bool sameEnd = a.agents.size() == b.agents.size() && std::abs(a.t - b.t) < 1e-9;
    for (std::size_t k = 0; sameEnd && k < a.agents.size(); ++k) gap = std::max(gap, (a.agents[k].p - b.agents[k].p).norm());
    const bool ok = sameEnd && recs[3].termination == Termination::Completed && gap < 1e-6;
    out.push_back({"preset", "integrator_order", ok, fmt::format("halving dt moves final positions by {:.2e} m (tol 1e-6)", gap),
                   {{"position_gap", gap}}});
  }
  return out;
}

}  // namespace

VerifyReport runVerify(const std::vector<std::string>& suites, std::uint64_t seed, unsigned threads) {
  std::vector<std::string> selected;
  for (const auto& s : suites) {
    if (s == "all") {
      selected = suiteNames();
      break;
    }
    const auto names = suiteNames();
    if (std::find(names.begin(), names.end(), s) == names.end()) {
      throw ValidationError({fmt::format("unknown verify suite '{}'", s)});
    }
    selected.push_back(s);
  }
  VerifyReport report;
  report.seed = seed;
  std::mt19937_64 rng(seed);
  for (const auto& s : selected) {
    std::vector<Claim> claims;
    if (s == "lemma1") claims = scalarBarrierSuite(rng, threads);
    if (s == "lyapunov") claims = lyapunovSuite(rng, threads);
    if (s == "setpoints") claims = setpointSuite(rng);
    if (s == "instability") claims = instabilitySuite(threads);
    if (s == "preset") claims = presetSuite(threads);
    for (auto& c : claims) report.claims.push_back(std::move(c));
  }
  return report;
}

}  // namespace cbf

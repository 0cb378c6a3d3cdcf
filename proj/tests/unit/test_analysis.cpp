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

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "cbf/analysis.hpp"
#include "cbf/errors.hpp"
#include "cbf/lyapunov.hpp"
#include "cbf/scenario.hpp"
#include "cbf/verify.hpp"

namespace cbf {
namespace {

void expectVecNear(const Vec3& a, const Vec3& b, double tol) {
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), tol) << "got " << a.transpose() << " want " << b.transpose();
}

// ---- scalar harness -------------------------------------------------------

TEST(ScalarBarrier, RestingSystemStaysPut) {
  ScalarBarrierSystem s;
  s.ko = 3.0;
  s.d0 = 0.7;
  const auto tr = simulateScalarBarrier(s, 10.0, 0.1);
  for (double d : tr.d) EXPECT_DOUBLE_EQ(d, 0.7);
  EXPECT_EQ(tr.t.size(), 101u);
  EXPECT_DOUBLE_EQ(tr.t.back(), 10.0);
}

TEST(ScalarBarrier, ConstantAlphaFlowConverges) {
  ScalarBarrierSystem s;
  s.ko = 2.0;
  s.alpha.offset = 1.0;
  s.d0 = 1.0;
  const auto tr = simulateScalarBarrier(s, 30.0, 0.01);
  EXPECT_FALSE(tr.crossedZero);
  EXPECT_NEAR(tr.phi.back(), -0.5, 0.01);
  EXPECT_LT(tr.d.back(), 1e-4);
  EXPECT_LT(std::abs(tr.ddot.back()), 1e-4);
  for (double d : tr.d) ASSERT_GT(d, 0.0);
}

TEST(ScalarBarrier, BoundedIntegralKeepsDistance) {
  ScalarBarrierSystem s;
  s.ko = 2.0;
  s.alpha.terms = {{1.0, 1.0, 0.0}};
  s.d0 = 1.0;
  const auto tr = simulateScalarBarrier(s, 60.0, 0.01);
  EXPECT_FALSE(tr.reachedFloor);
  EXPECT_GT(tr.minD, 0.1);
  EXPECT_NEAR(tr.integralAlpha, 1.0 - std::cos(60.0), 1e-12);
}

TEST(ScalarBarrier, RejectsBadInput) {
  ScalarBarrierSystem s;
  s.d0 = 0.0;
  EXPECT_THROW(simulateScalarBarrier(s, 1.0, 0.1), ValidationError);
  s.d0 = 1.0;
  s.ko = 0.0;
  EXPECT_THROW(simulateScalarBarrier(s, 1.0, 0.1), ValidationError);
}

TEST(ScalarBarrier, StrongApproachIsCaughtByBarrier) {
  ScalarBarrierSystem s;
  s.ko = 0.5;
  s.d0 = 0.01;
  s.ddot0 = -3.0;
  s.alpha.offset = 2.0;
  const auto tr = simulateScalarBarrier(s, 20.0, 0.01);
  EXPECT_FALSE(tr.crossedZero);
  EXPECT_GT(tr.minD, 0.0);
}

TEST(AlphaSignal, IntegralAndDerivative) {
  AlphaSignal a;
  a.offset = 0.3;
  a.terms = {{1.0, 2.0, 0.5}, {0.4, 0.7, 1.0}};
  const double h = 1e-6;
  for (double t : {0.0, 1.3, 5.0}) {
    EXPECT_NEAR(a.derivative(t), (a(t + h) - a(t - h)) / (2 * h), 1e-7);
    EXPECT_NEAR(a(t), (a.integral(t + h) - a.integral(t - h)) / (2 * h), 1e-7);
  }
  EXPECT_DOUBLE_EQ(a.integral(0.0), 0.0);
  EXPECT_DOUBLE_EQ(a.bound(), 1.7);
}

// ---- Lyapunov -------------------------------------------------------------

EdgeObservables obsWith(const Vec3& eTilde, const Vec3& nu) {
  const Vec3 eStar(2, 0, 0);
  return edgeObservables(eStar + eTilde, nu, Vec3::Zero(), Vec3::Zero(), 0.5,
                         {eStar, Vec3::Zero(), Mat3::Zero(), SkewMat3()});
}

TEST(Lyapunov, Examples) {
  const FollowerGains g;
  EXPECT_DOUBLE_EQ(lyapunov(obsWith(Vec3::Zero(), Vec3::Zero()), g).L, 0.0);
  EXPECT_DOUBLE_EQ(lyapunov(obsWith(Vec3::Zero(), Vec3(1, 0, 0)), g).L, 0.5);
  const Vec3 e(1, 1, 1);  // |e~|^2 = 3
  EXPECT_NEAR(lyapunov(obsWith(e, Vec3::Zero()), g).L, 10.0, 1e-12);
  EXPECT_NEAR(lyapunovAt(e, Vec3::Zero(), g), 10.0, 1e-12);
}

TEST(Lyapunov, AnalyticDerivative) {
  FollowerGains g;
  g.kv = 3.0;
  g.ko = 2.0;
  const auto o = obsWith(Vec3(-0.5, 0.2, 0), Vec3(-0.4, 0.3, 0.1));
  const double ddot = o.g.vec().dot(o.nu);
  const double expect = -3.0 * g.hv(o.nuTilde.norm()) * o.nuTilde.squaredNorm() - 2.0 * ddot * ddot / o.d;
  EXPECT_NEAR(lyapunov(o, g).dLdtAnalytic, expect, 1e-14);
  EXPECT_LE(lyapunov(o, g).dLdtAnalytic, 0.0);
}

TEST(Lyapunov, ChecksAlongTwoAgentRuns) {
  std::mt19937_64 rng(77);
  for (int k = 0; k < 5; ++k) {
    const Scenario s = randomTwoAgentScenario(rng);
    const auto rec = run(s.initial, s.formation, s.controller, s.sim);
    if (rec.termination != Termination::Completed) continue;
    const auto c = checkLyapunov(rec, s.formation, s.controller).front();
    EXPECT_LE(c.maxFiniteDifference, 1e-9);
    EXPECT_LE(c.maxAbsMismatch, 5 * c.spacing * c.spacing * c.maxAbsAnalytic);
  }
}

// ---- set points -----------------------------------------------------------

FormationSpec randomChain(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> cd(0.8, 3.0);
  FormationSpec s;
  s.n = n;
  s.r = 0.5;
  s.leader = LeaderTrajectory(LeaderTrajectory::Constant{Vec3(nd(rng), nd(rng), nd(rng))});
  for (int i = 2; i <= n; ++i) s.edges.push_back({cd(rng), UnitVec3(Vec3(nd(rng), nd(rng), nd(rng))), OmegaSignal::zero()});
  return s;
}

TEST(SetPoints, TwoAgentPair) {
  const Scenario sc = preset("two-agent");
  const auto pts = enumerateSetPoints(sc.formation, 2);
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_TRUE(pts[0].stable);
  EXPECT_FALSE(pts[1].stable);
  expectVecNear(pts[0].position, desiredPosition(sc.formation, 2, 0.0), 0.0);
  expectVecNear(pts[1].position, Vec3(-0.5, 0, 0), 1e-15);
}

TEST(SetPoints, CountsAndUniqueStable) {
  std::mt19937_64 rng(21);
  for (int n = 2; n <= 6; ++n) {
    const FormationSpec s = randomChain(rng, n);
    for (int i = 1; i <= n; ++i) {
      const auto pts = enumerateSetPoints(s, i);
      ASSERT_EQ(pts.size(), std::size_t{1} << (i - 1));
      int stable = 0;
      for (const auto& p : pts) {
        stable += p.stable ? 1 : 0;
        if (p.stable) expectVecNear(p.position, desiredPosition(s, i, 0.0), 1e-12);
        EXPECT_EQ(static_cast<int>(p.choices.size()), i - 1);
      }
      EXPECT_EQ(stable, 1);
    }
  }
  EXPECT_THROW(enumerateSetPoints(randomChain(rng, 3), 4), ValidationError);
}

TEST(SetPoints, IndexEncodesUnstableEdges) {
  std::mt19937_64 rng(4);
  const FormationSpec s = randomChain(rng, 4);
  const auto pts = enumerateSetPoints(s, 4);
  for (const auto& p : pts) {
    for (int j = 2; j <= 4; ++j) {
      const bool atBarrier = ((p.index - 1) >> (j - 2)) & 1;
      EXPECT_DOUBLE_EQ(p.choices[static_cast<std::size_t>(j - 2)], atBarrier ? -s.r : s.edge(j).c);
    }
  }
}

// ---- classification -------------------------------------------------------

TEST(Classify, PaperPresetConvergesToDesired) {
  const Scenario s = preset("paper-4agent");
  const auto rec = run(s.initial, s.formation, s.controller, s.sim);
  const auto cls = classifyLimit(rec, s.formation);
  ASSERT_EQ(cls.size(), 3u);
  for (const auto& c : cls) {
    EXPECT_TRUE(c.converged) << c.agent;
    ASSERT_TRUE(c.setPoint.has_value());
    EXPECT_EQ(c.setPoint->index, 1);
  }
}

TEST(Classify, StartingAtDesiredIsImmediatelyDesired) {
  Scenario s = preset("rotating-4agent");
  s.sim.tEnd = 1.0;
  WorldState w;
  for (int i = 1; i <= s.formation.n; ++i) {
    w.agents.push_back({desiredPosition(s.formation, i, 0.0), desiredVelocity(s.formation, i, 0.0)});
  }
  for (const auto& c : classifyLimit(run(w, s.formation, s.controller, s.sim), s.formation)) {
    EXPECT_TRUE(c.converged);
    EXPECT_EQ(c.setPoint->index, 1);
  }
}

TEST(Classify, HeadOnApproachStallsAtBarrier) {
  Scenario s = preset("two-agent");
  applyOverride(s, "p2x=-1.5");
  applyOverride(s, "p2y=0");
  applyOverride(s, "p2z=0");
  applyOverride(s, "v2x=0");
  // d decays exponentially toward 0; stop before it reaches the abort floor.
  applyOverride(s, "t_end=6");
  const auto rec = run(s.initial, s.formation, s.controller, s.sim);
  ASSERT_EQ(rec.termination, Termination::Completed);
  const auto c = classifyLimit(rec, s.formation).front();
  EXPECT_TRUE(!c.converged || c.setPoint->index == 2);
  EXPECT_FALSE(c.converged && c.setPoint->index == 1);
  EXPECT_LT(rec.rows.back().d[0], 0.05 * s.formation.r);
  EXPECT_LT(std::abs(rec.rows.back().p[1].y()) + std::abs(rec.rows.back().p[1].z()), 1e-12);
}

// ---- instability probes ---------------------------------------------------

TEST(Probe, InitialStateGeometry) {
  const Scenario s = preset("paper-4agent");
  ProbeConfig p;
  p.epsilon = 0.0;
  p.delta = 0.01;
  const WorldState w = probeInitialState(s.formation, p);
  const Vec3 e = w.agents[1].p - w.agents[0].p;
  expectVecNear(e, Vec3(-0.505, 0, 0), 1e-15);
  for (int i = 3; i <= 4; ++i) {
    const auto& a = w.agents[static_cast<std::size_t>(i - 1)];
    const auto& b = w.agents[static_cast<std::size_t>(i - 2)];
    expectVecNear(a.p - b.p, desiredEdge(s.formation, i, 0.0).eStar, 1e-15);
  }
  p.epsilon = 0.05;
  p.omegaAxis = Vec3(1, 0, 0);  // parallel to g*: rotation does nothing
  EXPECT_THROW(probeInitialState(s.formation, p), ValidationError);
}

TEST(Probe, PerturbedUnstablePointEscapes) {
  const Scenario s = preset("paper-4agent");
  ProbeConfig p;
  p.epsilon = 0.05;
  p.delta = 0.01;
  p.omegaAxis = Vec3(0, 0, 1);
  const auto res = instabilityProbe(s.formation, s.controller, s.sim, p);
  EXPECT_TRUE(res.escaped);
  EXPECT_EQ(res.termination, Termination::Completed);
  EXPECT_NEAR(res.startD, 0.005, 1e-12);
  EXPECT_LT(res.lEpsilon, res.lUnstable);
  EXPECT_LT(res.lStart, res.lUnstableSameRadius);
  for (const auto& c : res.classes) EXPECT_EQ(c.setPoint->index, 1);
}

TEST(Probe, UnperturbedStaysNearUnstablePoint) {
  Scenario s = preset("paper-4agent");
  ProbeConfig p;
  p.epsilon = 0.0;
  p.delta = 0.01;
  p.horizon = 10.0;
  const auto res = instabilityProbe(s.formation, s.controller, s.sim, p);
  EXPECT_FALSE(res.escaped);
  ASSERT_FALSE(res.classes.empty());
  const auto& c = res.classes.front();
  EXPECT_TRUE(!c.converged || c.setPoint->index == 2);
}

}  // namespace
}  // namespace cbf

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
#include <random>

#include <gtest/gtest.h>

#include "cbf/control.hpp"
#include "cbf/errors.hpp"
#include "cbf/scenario.hpp"

namespace cbf {
namespace {

void expectVecNear(const Vec3& a, const Vec3& b, double tol) {
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), tol) << "got " << a.transpose() << " want " << b.transpose();
}

DesiredEdgeState staticDesired(const Vec3& eStar) { return {eStar, Vec3::Zero(), Mat3::Zero(), SkewMat3()}; }

// Observables with chosen e~ and nu~ for a static desired edge along x.
EdgeObservables obsWith(const Vec3& eTilde, const Vec3& nuTilde, double c = 2.0, double r = 0.5) {
  const Vec3 eStar(c, 0, 0);
  return edgeObservables(eStar + eTilde, nuTilde, Vec3::Zero(), Vec3::Zero(), r, staticDesired(eStar));
}

TEST(EdgeObservables, Receding) {
  const auto o = edgeObservables(Vec3(2, 0, 0), Vec3(1, 0, 0), Vec3::Zero(), Vec3::Zero(), 1.0, staticDesired(Vec3(2, 0, 0)));
  EXPECT_DOUBLE_EQ(o.d, 1.0);
  expectVecNear(o.g, Vec3(1, 0, 0), 0.0);
  EXPECT_DOUBLE_EQ(o.phi, 1.0);
}

TEST(EdgeObservables, TangentialMotionHasNoFlow) {
  const auto o = edgeObservables(Vec3(2, 0, 0), Vec3(0, 1, 0), Vec3::Zero(), Vec3::Zero(), 1.0, staticDesired(Vec3(2, 0, 0)));
  EXPECT_DOUBLE_EQ(o.phi, 0.0);
}

TEST(EdgeObservables, Approaching) {
  const auto o =
      edgeObservables(Vec3(1.5, 0, 0), Vec3(-0.2, 0, 0), Vec3::Zero(), Vec3::Zero(), 1.0, staticDesired(Vec3(2, 0, 0)));
  EXPECT_DOUBLE_EQ(o.d, 0.5);
  EXPECT_NEAR(o.phi, -0.4, 1e-15);
}

TEST(EdgeObservables, RelativeToPredecessor) {
  const auto o = edgeObservables(Vec3(3, 1, 1), Vec3(1, 1, 0), Vec3(1, 1, 1), Vec3(1, 0, 0), 1.0,
                                 staticDesired(Vec3(1, 0, 0)));
  expectVecNear(o.e, Vec3(2, 0, 0), 0.0);
  expectVecNear(o.nu, Vec3(0, 1, 0), 0.0);
  expectVecNear(o.eTilde, Vec3(1, 0, 0), 0.0);
}

TEST(EdgeObservables, NuTildeSubtractsRotation) {
  const Vec3 w(0, 0, 0.5);
  const DesiredEdgeState de{Vec3(2, 0, 0), w.cross(Vec3(2, 0, 0)), Mat3::Zero(), SkewMat3(w)};
  const Vec3 e(1.5, 0.8, -0.3);
  const Vec3 nu(0.1, 0.4, 0.2);
  const auto o = edgeObservables(e, nu, Vec3::Zero(), Vec3::Zero(), 0.5, de);
  expectVecNear(o.nuTilde, nu - w.cross(e), 1e-15);
}

TEST(EdgeObservables, ErrorsAtAndInsideBarrier) {
  const auto de = staticDesired(Vec3(2, 0, 0));
  EXPECT_THROW(edgeObservables(Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), 0.5, de), DegenerateEdge);
  EXPECT_THROW(edgeObservables(Vec3(0.5, 0, 0), Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), 0.5, de), BarrierViolation);
  try {
    edgeObservables(Vec3(0.3, 0, 0), Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), 0.5, de, 3, 1.25);
    FAIL() << "expected BarrierViolation";
  } catch (const BarrierViolation& e) {
    EXPECT_EQ(e.edge(), 3);
    EXPECT_DOUBLE_EQ(e.time(), 1.25);
    EXPECT_NEAR(e.distance(), -0.2, 1e-15);
  }
}

TEST(BarrierFeedback, Examples) {
  const auto zeroFlow = edgeObservables(Vec3(2, 0, 0), Vec3(0, 1, 0), Vec3::Zero(), Vec3::Zero(), 1.0,
                                        staticDesired(Vec3(2, 0, 0)));
  expectVecNear(barrierFeedback(zeroFlow, 7.0), Vec3::Zero(), 0.0);
  const auto approaching = edgeObservables(Vec3(1.5, 0, 0), Vec3(-1, 0, 0), Vec3::Zero(), Vec3::Zero(), 1.0,
                                           staticDesired(Vec3(2, 0, 0)));
  expectVecNear(barrierFeedback(approaching, 7.0), Vec3(14, 0, 0), 1e-14);
  expectVecNear(barrierFeedback(approaching, 14.0), 2.0 * barrierFeedback(approaching, 7.0), 0.0);
}

TEST(BarrierFeedback, ParallelToEdgeAndDissipative) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int k = 0; k < 500; ++k) {
    const Vec3 e = Vec3(n(rng), n(rng), n(rng)).normalized() * (0.6 + std::abs(n(rng)));
    const Vec3 nu(n(rng), n(rng), n(rng));
    const auto o = edgeObservables(e, nu, Vec3::Zero(), Vec3::Zero(), 0.5, staticDesired(Vec3(2, 0, 0)));
    const double ko = 0.1 + std::abs(n(rng)) * 5;
    const Vec3 b = barrierFeedback(o, ko);
    EXPECT_LE(projectOrthogonal(o.g, b).norm(), 1e-12 * std::max(1.0, b.norm()));
    const double ddot = o.g.vec().dot(nu);
    EXPECT_NEAR(b.dot(o.g.vec()) * ddot, -ko * ddot * ddot / o.d, 1e-10 * std::max(1.0, ko * ddot * ddot / o.d));
    EXPECT_LE(b.dot(o.g.vec()) * ddot, 0.0);
  }
}

TEST(HFunction, BoundsOnHalfLine) {
  const HFunction h{1.0};
  for (double s = 0.0; s <= 1e6; s = s * 1.5 + 0.01) {
    EXPECT_GT(h(s), 0.0);
    EXPECT_LE(h(s), h.eta);
    EXPECT_LT(std::abs(h.derivative(s)), h.eta);
  }
  EXPECT_DOUBLE_EQ(h(3.0), 0.5);
  EXPECT_DOUBLE_EQ(h.integral(3.0), 2.0);
  const HFunction h2{2.5};
  EXPECT_DOUBLE_EQ(h2(0.0), 2.5);
}

TEST(NominalCentralized, Examples) {
  const FollowerGains g;  // k_p 10, k_v 7, eta 1
  expectVecNear(nominalCentralized(obsWith(Vec3::Zero(), Vec3::Zero()), g, Vec3::Zero(), Vec3::Zero()), Vec3::Zero(), 0.0);
  expectVecNear(nominalCentralized(obsWith(Vec3(1, 0, 0), Vec3::Zero()), g, Vec3::Zero(), Vec3::Zero()),
                Vec3(-10 / std::sqrt(2.0), 0, 0), 1e-14);
  expectVecNear(nominalCentralized(obsWith(Vec3::Zero(), Vec3(0, 2, 0)), g, Vec3::Zero(), Vec3::Zero()),
                Vec3(0, -14 / std::sqrt(3.0), 0), 1e-14);
}

TEST(NominalCentralized, AddsFeedforwardTerms) {
  const FollowerGains g;
  const auto o = obsWith(Vec3(0.3, -0.2, 0.1), Vec3(0.5, 0, -0.4));
  const Vec3 base = nominalCentralized(o, g, Vec3::Zero(), Vec3::Zero());
  expectVecNear(nominalCentralized(o, g, Vec3(1, 2, 3), Vec3(-1, 0, 4)), base + Vec3(0, 2, 7), 1e-14);
}

TEST(NominalDistributed, HoveringLeaderAndTrackedNeighbor) {
  const FollowerGains g;
  const auto o = obsWith(Vec3(1, 0, 0), Vec3::Zero());
  expectVecNear(nominalDistributed(o, g, Vec3::Zero(), Vec3::Zero()), Vec3(-10 / std::sqrt(2.0), 0, 0), 1e-14);
  const Vec3 uStar(0.2, -0.1, 0.3);
  EXPECT_EQ(nominalDistributed(o, g, Vec3(1, 1, 1), uStar), nominalCentralized(o, g, Vec3(1, 1, 1), uStar));
}

TEST(ControlInput, ZeroBarrierGainGivesNominal) {
  FollowerGains g;
  g.ko = 0.0;
  const auto o = edgeObservables(Vec3(0.8, 0.1, 0), Vec3(-0.5, 0.2, 0), Vec3::Zero(), Vec3::Zero(), 0.5,
                                 staticDesired(Vec3(2, 0, 0)));
  const Vec3 uPrev(0.1, 0.2, 0.3);
  const Vec3 uStar(-0.3, 0, 0.1);
  EXPECT_EQ(controlInput(o, g, NominalVariant::Centralized, Vec3::Zero(), uPrev, uStar),
            nominalCentralized(o, g, Vec3::Zero(), uPrev));
  EXPECT_EQ(controlInput(o, g, NominalVariant::Distributed, Vec3::Zero(), uPrev, uStar),
            nominalDistributed(o, g, Vec3::Zero(), uStar));
}

TEST(ControlInput, EquilibriumCoasts) {
  const FollowerGains g;
  const auto o = obsWith(Vec3::Zero(), Vec3::Zero());
  EXPECT_EQ(o.phi, 0.0);
  const Vec3 uPrev(0.4, -0.7, 1.1);
  expectVecNear(controlInput(o, g, NominalVariant::Centralized, Vec3::Zero(), uPrev, Vec3::Zero()), uPrev, 0.0);
}

TEST(EvaluateClosedLoop, EquilibriumGivesZeroInputs) {
  const Scenario s = preset("paper-4agent");
  std::vector<Vec3> p, v;
  for (int i = 1; i <= s.formation.n; ++i) {
    p.push_back(desiredPosition(s.formation, i, 0.0));
    v.push_back(desiredVelocity(s.formation, i, 0.0));
  }
  for (auto variant : {NominalVariant::Centralized, NominalVariant::Distributed}) {
    ControllerConfig cfg = s.controller;
    cfg.variant = variant;
    for (const auto& u : evaluateClosedLoop(s.formation, cfg, 0.0, p, v).u) expectVecNear(u, Vec3::Zero(), 0.0);
  }
}

TEST(EvaluateClosedLoop, FourAgentPresetAtStartIsPinned) {
  // Agent 2 checked by hand: e = (-2, 0.3, 0), d = 1.52237, phi = -0.12992.
  const Scenario s = preset("paper-4agent");
  const auto p = s.initial.positions();
  const auto v = s.initial.velocities();
  const auto dist = evaluateClosedLoop(s.formation, s.controller, 0.0, p, v);
  const std::vector<Vec3> expectDist = {
      {0, 0, 0},
      {7.4984471932871344, -0.59078150336758861, 0},
      {2.76647924866392, 13.113176380816384, -0.63479964809436884},
      {-2.3632725050150256, 7.4317457482775113, 14.477198443279415},
  };
  ControllerConfig cent = s.controller;
  cent.variant = NominalVariant::Centralized;
  const auto centr = evaluateClosedLoop(s.formation, cent, 0.0, p, v);
  const std::vector<Vec3> expectCent = {
      {0, 0, 0},
      {7.4984471932871344, -0.59078150336758861, 0},
      {10.264926441951054, 12.522394877448795, -0.63479964809436884},
      {7.9016539369360297, 19.954140625726307, 13.842398795185046},
  };
  for (std::size_t i = 0; i < 4; ++i) {
    expectVecNear(dist.u[i], expectDist[i], 1e-12);
    expectVecNear(centr.u[i], expectCent[i], 1e-12);
    EXPECT_TRUE(allFinite(dist.u[i]));
  }
  EXPECT_NEAR(dist.edges[0].d, 1.5223748416156684, 1e-14);
  EXPECT_NEAR(dist.edges[0].phi, -0.12992021752261193, 1e-14);
}

TEST(EvaluateClosedLoop, VariantsAgreeWhenUpstreamTracksExactly) {
  const Scenario s = preset("rotating-4agent");
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 0.3);
  for (double t : {0.0, 1.1, 4.2}) {
    std::vector<Vec3> p, v;
    for (int i = 1; i <= s.formation.n; ++i) {
      p.push_back(desiredPosition(s.formation, i, t));
      v.push_back(desiredVelocity(s.formation, i, t));
    }
    p.back() += Vec3(n(rng), n(rng), n(rng));
    v.back() += Vec3(n(rng), n(rng), n(rng));
    ControllerConfig a = s.controller, b = s.controller;
    a.variant = NominalVariant::Distributed;
    b.variant = NominalVariant::Centralized;
    const Vec3 ua = evaluateClosedLoop(s.formation, a, t, p, v).u.back();
    const Vec3 ub = evaluateClosedLoop(s.formation, b, t, p, v).u.back();
    expectVecNear(ua, ub, 1e-10);
  }
}

TEST(ControllerConfig, Problems) {
  ControllerConfig cfg;
  cfg.gains = {FollowerGains{}, FollowerGains{}};
  EXPECT_TRUE(cfg.problems(3).empty());
  EXPECT_FALSE(cfg.problems(4).empty());
  cfg.gains[0].kp = -1.0;
  cfg.gains[1].ko = -0.1;
  EXPECT_GE(cfg.problems(3).size(), 2u);
  cfg.gains[0].kp = 1.0;
  cfg.gains[1].ko = 0.0;
  EXPECT_TRUE(cfg.problems(3).empty());
}

TEST(NominalVariant, StringRoundTrip) {
  for (auto v : {NominalVariant::Centralized, NominalVariant::Distributed}) EXPECT_EQ(nominalVariantFromString(toString(v)), v);
  EXPECT_ANY_THROW(nominalVariantFromString("decentralised"));
}

}  // namespace
}  // namespace cbf

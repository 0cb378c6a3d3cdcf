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

#include "cbf/control.hpp"

#include <fmt/format.h>

#include "cbf/errors.hpp"

namespace cbf {

EdgeObservables edgeObservables(const Vec3& pi, const Vec3& vi, const Vec3& pPrev, const Vec3& vPrev, double r,
                                const DesiredEdgeState& desired, int edge, double t) {
  const Vec3 e = pi - pPrev;
  const double len = e.norm();
  if (!(len >= UnitVec3::kMinNorm)) {
    throw DegenerateEdge(fmt::format("edge {} has length {:.3e}; direction undefined", edge, len));
  }
  const double d = len - r;
  if (!(d > 0.0)) throw BarrierViolation(edge, t, d);
  const UnitVec3 g(e);
  const Vec3 nu = vi - vPrev;
  return EdgeObservables{
      .e = e,
      .nu = nu,
      .d = d,
      .g = g,
      .phi = g.vec().dot(nu) / d,
      .eTilde = e - desired.eStar,
      .nuTilde = nu - desired.omega * e,
  };
}

std::string_view toString(NominalVariant v) {
  return v == NominalVariant::Centralized ? "centralized" : "distributed";
}

NominalVariant nominalVariantFromString(std::string_view s) {
  if (s == "centralized") return NominalVariant::Centralized;
  if (s == "distributed") return NominalVariant::Distributed;
  throw ValidationError({fmt::format("unknown controller variant '{}'", s)});
}

std::vector<std::string> ControllerConfig::problems(int n) const {
  std::vector<std::string> out;
  if (n >= 2 && gains.size() != static_cast<std::size_t>(n - 1)) {
    out.push_back(fmt::format("controller.followers must list n-1 = {} entries (got {})", n - 1, gains.size()));
  }
  for (std::size_t k = 0; k < gains.size(); ++k) {
    const auto& g = gains[k];
    const auto check = [&](double v, const char* name, bool allowZero) {
      if (!std::isfinite(v) || v < 0.0 || (!allowZero && v == 0.0)) {
        out.push_back(fmt::format("controller.followers[{}].{} = {} must be {}", k, name, v,
                                  allowZero ? ">= 0" : "> 0"));
      }
    };
    check(g.kp, "k_p", false);
    check(g.kv, "k_v", false);
    // k_o = 0 is the nominal-only baseline and stays loadable.
    check(g.ko, "k_o", true);
    check(g.hp.eta, "eta_p", false);
    check(g.hv.eta, "eta_v", false);
  }
  return out;
}

Vec3 barrierFeedback(const EdgeObservables& obs, double ko) { return -ko * obs.phi * obs.g.vec(); }

namespace {
Vec3 pdTerms(const EdgeObservables& obs, const FollowerGains& gains) {
  return -gains.kp * gains.hp(obs.eTilde.squaredNorm()) * obs.eTilde - gains.kv * gains.hv(obs.nuTilde.norm()) * obs.nuTilde;
}
}  // namespace

Vec3 nominalCentralized(const EdgeObservables& obs, const FollowerGains& gains, const Vec3& uEStarOfE,
                        const Vec3& uPrev) {
  return pdTerms(obs, gains) + uEStarOfE + uPrev;
}

Vec3 nominalDistributed(const EdgeObservables& obs, const FollowerGains& gains, const Vec3& uEStarOfE,
                        const Vec3& uStarPrev) {
  return pdTerms(obs, gains) + uEStarOfE + uStarPrev;
}

Vec3 controlInput(const EdgeObservables& obs, const FollowerGains& gains, NominalVariant variant,
                  const Vec3& uEStarOfE, const Vec3& uPrev, const Vec3& uStarPrev) {
  const Vec3 nominal = variant == NominalVariant::Centralized ? nominalCentralized(obs, gains, uEStarOfE, uPrev)
                                                              : nominalDistributed(obs, gains, uEStarOfE, uStarPrev);
  return nominal + barrierFeedback(obs, gains.ko);
}

Vec3 leaderInput(const FormationSpec& spec, double t) { return spec.leader.acceleration(t); }

ClosedLoopSample evaluateClosedLoop(const FormationSpec& spec, const ControllerConfig& cfg, double t,
                                    std::span<const Vec3> positions, std::span<const Vec3> velocities) {
  const int n = spec.n;
  ClosedLoopSample out;
  out.u.reserve(n);
  out.edges.reserve(n - 1);
  out.desired.reserve(n - 1);
  out.u.push_back(leaderInput(spec, t));
  Vec3 uStarPrev = out.u.front();
  for (int i = 2; i <= n; ++i) {
    const DesiredEdgeState de = desiredEdge(spec, i, t);
    const EdgeObservables obs = edgeObservables(positions[i - 1], velocities[i - 1], positions[i - 2],
                                                velocities[i - 2], spec.r, de, i, t);
    const Vec3 uEStarOfE = de.uEStarCoeff * obs.e;
    out.u.push_back(controlInput(obs, cfg.follower(i), cfg.variant, uEStarOfE, out.u[i - 2], uStarPrev));
    uStarPrev += de.uEStarCoeff * de.eStar;
    out.edges.push_back(obs);
    out.desired.push_back(de);
  }
  return out;
}

}  // namespace cbf

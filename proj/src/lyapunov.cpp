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

#include "cbf/lyapunov.hpp"

#include "cbf/errors.hpp"

namespace cbf {

double lyapunovAt(const Vec3& eTilde, const Vec3& nuTilde, const FollowerGains& gains) {
  return 0.5 * gains.kp * gains.hp.integral(eTilde.squaredNorm()) + 0.5 * nuTilde.squaredNorm();
}

LyapunovValue lyapunov(const EdgeObservables& obs, const FollowerGains& gains) {
  if (!(obs.d > 0.0)) throw BarrierViolation(0, 0.0, obs.d);
  const double ddot = obs.g.vec().dot(obs.nu);
  const double nuT = obs.nuTilde.norm();
  return LyapunovValue{
      .L = lyapunovAt(obs.eTilde, obs.nuTilde, gains),
      .dLdtAnalytic = -gains.kv * gains.hv(nuT) * nuT * nuT - gains.ko * ddot * ddot / obs.d,
  };
}

}  // namespace cbf

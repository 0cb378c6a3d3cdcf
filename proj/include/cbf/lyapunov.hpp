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

// Lyapunov function of one follower's tracking error.

#pragma once

#include "cbf/control.hpp"

namespace cbf {

struct LyapunovValue {
  double L = 0.0;
  /// -k_v h_v |nu~|^2 - k_o ddot^2 / d along the closed loop.
  double dLdtAnalytic = 0.0;
};

/// L = (k_p / 2) int_0^{|e~|^2} h_p(s) ds + |nu~|^2 / 2, using the closed-form
/// antiderivative of h_p. Throws BarrierViolation when obs.d <= 0.
LyapunovValue lyapunov(const EdgeObservables& obs, const FollowerGains& gains);

/// Potential and kinetic parts only; valid for any (e~, nu~), including the
/// singular set points where d = 0.
double lyapunovAt(const Vec3& eTilde, const Vec3& nuTilde, const FollowerGains& gains);

}  // namespace cbf

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

#include "cbf/geom3.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "cbf/errors.hpp"

namespace cbf {

UnitVec3::UnitVec3(const Vec3& v) {
  const double n = v.norm();
  if (!(n >= kMinNorm) || !std::isfinite(n)) {
    throw DegenerateEdge("cannot build a unit vector from a vector of norm " + std::to_string(n));
  }
  // Leave vectors that are already unit to machine precision untouched so
  // repeated normalization is a fixed point.
  dir_ = std::abs(n - 1.0) <= 4.0 * std::numeric_limits<double>::epsilon() ? v : Vec3(v / n);
}

Mat3 SkewMat3::matrix() const {
  Mat3 m;
  m << 0.0, -axis_.z(), axis_.y(),
       axis_.z(), 0.0, -axis_.x(),
       -axis_.y(), axis_.x(), 0.0;
  return m;
}

double Rot3::orthogonalityError() const {
  const double ortho = (m_.transpose() * m_ - Mat3::Identity()).cwiseAbs().maxCoeff();
  return std::max(ortho, std::abs(m_.determinant() - 1.0));
}

Vec3 projectOrthogonal(const UnitVec3& y, const Vec3& x) {
  const Vec3& u = y.vec();
  return x - u * u.dot(x);
}

SkewMat3 skew(const Vec3& z) { return SkewMat3(z); }

Rot3 expSo3(const SkewMat3& omega, double epsilon) {
  const Vec3 w = omega.axis() * epsilon;
  const double theta = w.norm();
  const Mat3 k = SkewMat3(w).matrix();
  double a;  // sin(theta)/theta
  double b;  // (1 - cos(theta))/theta^2
  if (theta < 1e-6) {
    const double t2 = theta * theta;
    a = 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
    b = 0.5 - t2 / 24.0 + t2 * t2 / 720.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / (theta * theta);
  }
  return Rot3(Mat3::Identity() + a * k + b * k * k);
}

bool allFinite(const Vec3& v) { return v.allFinite(); }

}  // namespace cbf

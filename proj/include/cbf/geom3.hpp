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

// Small 3D toolkit: vectors, unit directions, so(3) generators and rotations.

#pragma once

#include <Eigen/Dense>

namespace cbf {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Direction vector with unit norm. Construction normalizes and refuses
/// vectors shorter than kMinNorm, where the direction is not defined.
class UnitVec3 {
 public:
  static constexpr double kMinNorm = 1e-9;

  explicit UnitVec3(const Vec3& v);
  UnitVec3(double x, double y, double z) : UnitVec3(Vec3(x, y, z)) {}

  const Vec3& vec() const noexcept { return dir_; }
  operator const Vec3&() const noexcept { return dir_; }  // NOLINT
  double operator[](int i) const { return dir_[i]; }

 private:
  Vec3 dir_;
};

/// Skew-symmetric matrix z_x stored through its axis z, so the
/// antisymmetry holds exactly.
class SkewMat3 {
 public:
  SkewMat3() : axis_(Vec3::Zero()) {}
  explicit SkewMat3(const Vec3& axis) : axis_(axis) {}

  const Vec3& axis() const noexcept { return axis_; }
  Mat3 matrix() const;
  Vec3 apply(const Vec3& w) const { return axis_.cross(w); }
  Vec3 operator*(const Vec3& w) const { return apply(w); }
  // z_x z_x w = z (z.w) - |z|^2 w
  Vec3 applySquared(const Vec3& w) const { return axis_ * axis_.dot(w) - axis_.squaredNorm() * w; }
  bool isZero() const { return axis_.isZero(0.0); }

 private:
  Vec3 axis_;
};

class Rot3 {
 public:
  Rot3() : m_(Mat3::Identity()) {}
  // Trusted constructor; callers pass a proper rotation.
  explicit Rot3(const Mat3& m) : m_(m) {}

  const Mat3& matrix() const noexcept { return m_; }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }
  Rot3 operator*(const Rot3& o) const { return Rot3(m_ * o.m_); }
  Rot3 transpose() const { return Rot3(m_.transpose()); }

  /// Largest entry of |R^T R - I| and |det R - 1|.
  double orthogonalityError() const;

 private:
  Mat3 m_;
};

/// (I - y y^T) x
Vec3 projectOrthogonal(const UnitVec3& y, const Vec3& x);

SkewMat3 skew(const Vec3& z);

/// exp(epsilon * omega) by the Rodrigues formula.
Rot3 expSo3(const SkewMat3& omega, double epsilon);

bool allFinite(const Vec3& v);

}  // namespace cbf

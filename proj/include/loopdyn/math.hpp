#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <cmath>
#include <utility>

namespace loopdyn {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Quat = Eigen::Quaterniond;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

inline Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return s;
}

/// Unit quaternion exp(rotvec / 2); exact for any angle.
inline Quat quat_exp(const Vec3& rotvec) {
  const double angle = rotvec.norm();
  if (angle < 1e-300) return Quat::Identity();
  const double half = 0.5 * angle;
  const Vec3 axis = rotvec / angle;
  return Quat(std::cos(half), std::sin(half) * axis.x(), std::sin(half) * axis.y(),
              std::sin(half) * axis.z());
}

inline Quat normalized(const Quat& q) {
  Quat out = q;
  out.normalize();
  return out;
}

/// Deterministic orthonormal complement (t1, t2) of a unit axis: Gram-Schmidt
/// against the coordinate axis least aligned with it, t2 = axis × t1.
inline std::pair<Vec3, Vec3> orthonormal_complement(const Vec3& axis) {
  const Vec3 a = axis.cwiseAbs();
  Vec3 e = Vec3::UnitX();
  if (a.y() < a.x() && a.y() <= a.z()) {
    e = Vec3::UnitY();
  } else if (a.z() < a.x() && a.z() < a.y()) {
    e = Vec3::UnitZ();
  }
  Vec3 t1 = e - e.dot(axis) * axis;
  t1.normalize();
  Vec3 t2 = axis.cross(t1);
  return {t1, t2};
}

inline bool all_finite(const Vec3& v) { return v.allFinite(); }

}  // namespace loopdyn

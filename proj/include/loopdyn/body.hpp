#pragma once

// Rigid bodies in maximal coordinates: every body carries its full 6-DOF
// state and the system mass matrix is block diagonal, one 6x6 block per body.

#include <loopdyn/error.hpp>
#include <loopdyn/math.hpp>

#include <span>
#include <string>
#include <vector>

namespace loopdyn {

struct Pose {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();

  Mat3 rotation() const { return orientation.toRotationMatrix(); }
  Vec3 transform_point(const Vec3& local) const { return position + orientation * local; }
  Vec3 inverse_transform_point(const Vec3& world) const {
    return orientation.conjugate() * (world - position);
  }
  Pose compose(const Pose& rel) const {
    return {transform_point(rel.position), normalized(orientation * rel.orientation)};
  }
  Pose relative_to(const Pose& base) const {
    return {base.inverse_transform_point(position),
            normalized(base.orientation.conjugate() * orientation)};
  }
};

/// World-frame velocities; angular is in world coordinates.
struct Twist {
  Vec3 linear = Vec3::Zero();
  Vec3 angular = Vec3::Zero();

  bool finite() const { return linear.allFinite() && angular.allFinite(); }
};

struct RigidBody {
  std::string id;
  double mass = 1.0;
  Mat3 inertia_body = Mat3::Identity();
  Pose pose;  // pose of the centre of mass frame
  Twist twist;
  bool is_static = false;
};

struct ForceAccumulator {
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();

  void reset() {
    force.setZero();
    torque.setZero();
  }
};

inline Mat3 world_inertia(const RigidBody& body) {
  const Mat3 r = body.pose.rotation();
  Mat3 out = r * body.inertia_body * r.transpose();
  return 0.5 * (out + out.transpose());
}

inline void validate_mass_properties(const RigidBody& body) {
  if (body.is_static) return;
  if (!(body.mass > 0.0) || !std::isfinite(body.mass)) {
    throw Error(ErrorKind::ZeroMassBody, "body '" + body.id + "' has non-positive mass");
  }
  const Mat3 sym = 0.5 * (body.inertia_body + body.inertia_body.transpose());
  if ((sym - body.inertia_body).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + sym.norm())) {
    throw Error(ErrorKind::ZeroMassBody, "body '" + body.id + "' has a non-symmetric inertia");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(sym, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 0.0)) {
    throw Error(ErrorKind::ZeroMassBody, "body '" + body.id + "' inertia is not positive definite");
  }
}

/// Block-diagonal system mass matrix. Each block is diag(m I3, I_world);
/// static bodies get a zero inverse block (infinite mass).
class MassOperator {
 public:
  MassOperator() = default;

  explicit MassOperator(std::span<const RigidBody> bodies) {
    mass_.reserve(bodies.size());
    for (const auto& b : bodies) {
      validate_mass_properties(b);
      if (b.is_static) {
        mass_.push_back(0.0);
        inertia_.push_back(Mat3::Zero());
        inv_mass_.push_back(0.0);
        inv_inertia_.push_back(Mat3::Zero());
        continue;
      }
      const Mat3 iw = world_inertia(b);
      mass_.push_back(b.mass);
      inertia_.push_back(iw);
      inv_mass_.push_back(1.0 / b.mass);
      Mat3 inv = iw.inverse();
      inv_inertia_.push_back(0.5 * (inv + inv.transpose()));
    }
  }

  std::size_t body_count() const { return mass_.size(); }
  std::size_t size() const { return 6 * mass_.size(); }

  double inverse_mass(std::size_t i) const { return inv_mass_[i]; }
  const Mat3& inverse_inertia(std::size_t i) const { return inv_inertia_[i]; }
  const Mat3& inertia(std::size_t i) const { return inertia_[i]; }

  Eigen::Matrix<double, 6, 6> block(std::size_t i) const {
    Eigen::Matrix<double, 6, 6> m = Eigen::Matrix<double, 6, 6>::Zero();
    m.topLeftCorner<3, 3>() = mass_[i] * Mat3::Identity();
    m.bottomRightCorner<3, 3>() = inertia_[i];
    return m;
  }

  Vec6 apply_block(std::size_t i, const Vec6& x) const {
    Vec6 out;
    out.head<3>() = mass_[i] * x.head<3>();
    out.tail<3>() = inertia_[i] * x.tail<3>();
    return out;
  }

  Vec6 apply_inverse_block(std::size_t i, const Vec6& x) const {
    Vec6 out;
    out.head<3>() = inv_mass_[i] * x.head<3>();
    out.tail<3>() = inv_inertia_[i] * x.tail<3>();
    return out;
  }

  VecX apply(const VecX& x) const {
    VecX out(x.size());
    for (std::size_t i = 0; i < body_count(); ++i) {
      out.segment<6>(6 * i) = apply_block(i, x.segment<6>(6 * i));
    }
    return out;
  }

  VecX apply_inverse(const VecX& x) const {
    VecX out(x.size());
    for (std::size_t i = 0; i < body_count(); ++i) {
      out.segment<6>(6 * i) = apply_inverse_block(i, x.segment<6>(6 * i));
    }
    return out;
  }

 private:
  std::vector<double> mass_;
  std::vector<Mat3> inertia_;
  std::vector<double> inv_mass_;
  std::vector<Mat3> inv_inertia_;
};

inline MassOperator assemble_mass_matrix(std::span<const RigidBody> bodies) {
  return MassOperator(bodies);
}

/// Torque equivalent of one implicit body-frame step of the gyroscopic term
/// I dω/dt = -ω × Iω (single Newton iteration on the backward-Euler residual).
inline Vec3 gyroscopic_torque(const RigidBody& body, double dt) {
  if (body.is_static) return Vec3::Zero();
  const Mat3 r = body.pose.rotation();
  const Mat3& inertia = body.inertia_body;
  const Vec3 w = r.transpose() * body.twist.angular;
  const Vec3 residual = dt * w.cross(inertia * w);
  const Mat3 jac = inertia + dt * (skew(w) * inertia - skew(inertia * w));
  const Vec3 w_next = w - jac.lu().solve(residual);
  return r * (inertia * (w_next - w)) / dt;
}

/// Semi-implicit Euler: velocities first from forces and constraint impulses,
/// then poses from the new velocities. Orientation uses the exact exponential map.
inline void integrate_semi_implicit(std::span<RigidBody> bodies,
                                    std::span<const ForceAccumulator> accumulators,
                                    std::span<const Vec6> impulses, double dt) {
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    RigidBody& b = bodies[i];
    if (b.is_static) continue;
    Vec3 lin_imp = dt * accumulators[i].force;
    Vec3 ang_imp = dt * accumulators[i].torque;
    if (!impulses.empty()) {
      lin_imp += impulses[i].head<3>();
      ang_imp += impulses[i].tail<3>();
    }
    const Mat3 inv_iw = world_inertia(b).inverse();
    b.twist.linear += lin_imp / b.mass;
    b.twist.angular += inv_iw * ang_imp;

    b.pose.position += dt * b.twist.linear;
    b.pose.orientation = normalized(quat_exp(dt * b.twist.angular) * b.pose.orientation);

    if (!b.twist.finite() || !b.pose.position.allFinite() || !b.pose.orientation.coeffs().allFinite()) {
      throw Error(ErrorKind::NonFiniteState, "body '" + b.id + "' state became non-finite");
    }
  }
}

struct Energy {
  double kinetic = 0.0;
  double potential = 0.0;
  double total() const { return kinetic + potential; }
};

inline Energy system_energy(std::span<const RigidBody> bodies, const Vec3& gravity) {
  Energy e;
  for (const auto& b : bodies) {
    if (b.is_static) continue;
    e.kinetic += 0.5 * b.mass * b.twist.linear.squaredNorm();
    e.kinetic += 0.5 * b.twist.angular.dot(world_inertia(b) * b.twist.angular);
    e.potential -= b.mass * gravity.dot(b.pose.position);
  }
  return e;
}

}  // namespace loopdyn

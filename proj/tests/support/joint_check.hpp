#pragma once

// Random joint configurations and the finite-difference Jacobian check,
// shared by the unit suite and the acceptance binary.

#include <loopdyn/loopdyn.hpp>

#include <random>

namespace loopdyn::testing {

inline constexpr JointKind kKinds[] = {JointKind::Revolute, JointKind::Prismatic, JointKind::Spherical,
                                       JointKind::Fixed};

inline Vec3 random_vec(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  const double x = u(rng), y = u(rng), z = u(rng);
  return {x, y, z};
}

inline Quat random_quat(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  const double w = n(rng), x = n(rng), y = n(rng), z = n(rng);
  return Quat(w, x, y, z).normalized();
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  Vec3 v;
  do {
    v = random_vec(rng);
  } while (v.norm() < 0.1);
  return v.normalized();
}

inline RigidBody free_body(const std::string& id, double mass = 1.0) {
  RigidBody b;
  b.id = id;
  b.mass = mass;
  return b;
}

struct JointPair {
  std::vector<RigidBody> bodies;
  Joint joint;
  BodyIndex index;
};

// Two bodies (or body + world) near an assembled joint, with a small random
// gap and misalignment so every row has a non-trivial error.
inline JointPair random_pair(std::mt19937_64& rng, JointKind kind, bool world_parent, double gap = 0.05,
                             double twist = 0.1) {
  JointPair p;
  RigidBody a = free_body("a", 1.5);
  a.inertia_body = Vec3(0.2, 0.3, 0.4).asDiagonal();
  a.pose = {random_vec(rng), random_quat(rng)};
  RigidBody b = free_body("b", 0.7);
  b.inertia_body = Vec3(0.1, 0.25, 0.15).asDiagonal();
  if (world_parent) a.pose = Pose{};

  Joint& j = p.joint;
  j.id = "j";
  j.kind = kind;
  j.parent = world_parent ? std::string(kWorld) : "a";
  j.child = "b";
  j.axis = random_unit(rng);
  j.anchor_parent = {random_vec(rng, 0.5), random_quat(rng)};
  j.anchor_child = {random_vec(rng, 0.5), random_quat(rng)};

  // Place b so its frame lands on the parent frame, then disturb it.
  const Pose frame = a.pose.compose(j.anchor_parent);
  const Quat qb = frame.orientation * j.anchor_child.orientation.conjugate();
  b.pose.orientation = normalized(quat_exp(random_vec(rng, twist)) * qb);
  b.pose.position = frame.position - b.pose.orientation * j.anchor_child.position + random_vec(rng, gap);
  b.twist = {random_vec(rng), random_vec(rng)};

  if (!world_parent) p.bodies.push_back(a);
  p.bodies.push_back(b);
  p.index = make_body_index(p.bodies);
  return p;
}

inline std::vector<double> row_errors(const JointPair& p) {
  std::vector<double> out;
  for (const auto& r : joint_rows(p.joint, p.bodies, p.index, 1e-3, {})) out.push_back(r.error);
  return out;
}

// Worst |J - dC/dq| over `trials` random configurations of `kind`: each body
// is moved along each twist direction and the row errors are differenced
// centrally with step h.
inline double jacobian_error(std::mt19937_64& rng, JointKind kind, int trials, double h = 1e-6) {
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    const JointPair p = random_pair(rng, kind, trial % 5 == 0);
    const auto rows = joint_rows(p.joint, p.bodies, p.index, 1e-3, {});
    for (std::size_t bi = 0; bi < p.bodies.size(); ++bi) {
      for (int d = 0; d < 6; ++d) {
        auto moved = [&](double s) {
          JointPair q = p;
          RigidBody& b = q.bodies[bi];
          const Vec3 e = s * Vec3::Unit(d % 3);
          if (d < 3) {
            b.pose.position += e;
          } else {
            b.pose.orientation = normalized(quat_exp(e) * b.pose.orientation);
          }
          return row_errors(q);
        };
        const auto plus = moved(h), minus = moved(-h);
        for (std::size_t r = 0; r < rows.size(); ++r) {
          const int body = static_cast<int>(bi);
          double analytic = 0.0;
          if (rows[r].body_a == body) analytic += rows[r].jac_a[d];
          if (rows[r].body_b == body) analytic += rows[r].jac_b[d];
          const double numeric = (plus[r] - minus[r]) / (2.0 * h);
          worst = std::max(worst, std::abs(analytic - numeric));
        }
      }
    }
  }
  return worst;
}

}  // namespace loopdyn::testing

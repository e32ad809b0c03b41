#include "fixtures.hpp"

#include <numbers>

namespace loopdyn {
namespace {

using testing::free_body;

std::vector<ForceAccumulator> gravity_forces(const std::vector<RigidBody>& bodies, const Vec3& g) {
  std::vector<ForceAccumulator> acc(bodies.size());
  for (std::size_t i = 0; i < bodies.size(); ++i) acc[i].force = bodies[i].mass * g;
  return acc;
}

TEST(Math, QuatExpMatchesAxisAngle) {
  const Vec3 axis = Vec3(1, 2, -0.5).normalized();
  for (double angle : {0.0, 1e-8, 0.3, 2.0, 3.1, 6.0}) {
    const Quat q = quat_exp(angle * axis);
    const Quat ref(Eigen::AngleAxisd(angle, axis));
    EXPECT_NEAR(q.angularDistance(ref), 0.0, 1e-12) << angle;
    EXPECT_NEAR(q.norm(), 1.0, 1e-15);
  }
}

TEST(Math, OrthonormalComplementIsDeterministicAndOrthonormal) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const Vec3 a = testing::random_unit(rng);
    const auto [t1, t2] = orthonormal_complement(a);
    EXPECT_NEAR(t1.norm(), 1.0, 1e-14);
    EXPECT_NEAR(t2.norm(), 1.0, 1e-14);
    EXPECT_NEAR(t1.dot(a), 0.0, 1e-14);
    EXPECT_NEAR(t2.dot(a), 0.0, 1e-14);
    EXPECT_NEAR(t1.dot(t2), 0.0, 1e-14);
    const auto again = orthonormal_complement(a);
    EXPECT_EQ(again.first, t1);
    EXPECT_EQ(again.second, t2);
  }
}

TEST(WorldInertia, IdentityOrientation) {
  RigidBody b = free_body("b");
  b.inertia_body = Vec3(1, 2, 3).asDiagonal();
  EXPECT_TRUE(world_inertia(b).isApprox(b.inertia_body, 1e-15));
}

TEST(WorldInertia, QuarterTurnAboutZSwapsXY) {
  RigidBody b = free_body("b");
  b.inertia_body = Vec3(1, 2, 3).asDiagonal();
  b.pose.orientation = Quat(Eigen::AngleAxisd(std::numbers::pi / 2, Vec3::UnitZ()));
  const Mat3 expected = Vec3(2, 1, 3).asDiagonal();
  EXPECT_LT((world_inertia(b) - expected).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(WorldInertia, IsotropicTensorIsInvariant) {
  std::mt19937_64 rng(5);
  RigidBody b = free_body("b");
  b.inertia_body = 2.5 * Mat3::Identity();
  for (int i = 0; i < 20; ++i) {
    b.pose.orientation = testing::random_quat(rng);
    EXPECT_LT((world_inertia(b) - b.inertia_body).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(MassOperator, SingleBodyBlock) {
  std::vector<RigidBody> bodies{free_body("b", 2.0)};
  const MassOperator m = assemble_mass_matrix(bodies);
  ASSERT_EQ(m.size(), 6u);
  Eigen::Matrix<double, 6, 1> d;
  d << 2, 2, 2, 1, 1, 1;
  const Eigen::Matrix<double, 6, 6> block = d.asDiagonal();
  EXPECT_EQ(m.block(0), block);
  Vec6 x = Vec6::Zero();
  x[0] = 2.0;
  Vec6 expected = Vec6::Zero();
  expected[0] = 1.0;
  EXPECT_EQ(m.apply_inverse_block(0, x), expected);
}

TEST(MassOperator, TwoIdenticalBodiesGiveEqualBlocks) {
  std::vector<RigidBody> bodies{free_body("a", 3.0), free_body("b", 3.0)};
  const MassOperator m = assemble_mass_matrix(bodies);
  EXPECT_EQ(m.size(), 12u);
  EXPECT_EQ(m.block(0), m.block(1));
}

TEST(MassOperator, InverseComposedWithApplyIsIdentity) {
  std::mt19937_64 rng(11);
  std::vector<RigidBody> bodies;
  for (int i = 0; i < 4; ++i) {
    RigidBody b = free_body("b" + std::to_string(i), 0.5 + i);
    const Vec3 d(1.0 + i, 2.0, 0.5 + 0.25 * i);
    b.inertia_body = d.asDiagonal();
    b.pose.orientation = testing::random_quat(rng);
    bodies.push_back(b);
  }
  const MassOperator m(bodies);
  for (int k = 0; k < 50; ++k) {
    const VecX x = VecX::Random(24);
    EXPECT_LT((m.apply_inverse(m.apply(x)) - x).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(MassOperator, RejectsNonPositiveMass) {
  std::vector<RigidBody> bodies{free_body("b", 0.0)};
  try {
    MassOperator m(bodies);
    FAIL() << "expected ZeroMassBody";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ZeroMassBody);
  }
}

TEST(Integrate, OneGravityStep) {
  std::vector<RigidBody> bodies{free_body("b")};
  const Vec3 g(0, 0, -9.81);
  integrate_semi_implicit(bodies, gravity_forces(bodies, g), {}, 1e-3);
  EXPECT_NEAR(bodies[0].twist.linear.z(), -9.81e-3, 1e-17);
  EXPECT_NEAR(bodies[0].pose.position.z(), -9.81e-6, 1e-20);
}

TEST(Integrate, ConstantVelocityDrift) {
  std::vector<RigidBody> bodies{free_body("b")};
  bodies[0].twist.linear = Vec3(1, 0, 0);
  integrate_semi_implicit(bodies, std::vector<ForceAccumulator>(1), {}, 1e-2);
  EXPECT_EQ(bodies[0].pose.position, Vec3(1e-2, 0, 0));
  EXPECT_EQ(bodies[0].twist.linear, Vec3(1, 0, 0));
}

TEST(Integrate, ExactRotationStep) {
  std::vector<RigidBody> bodies{free_body("b")};
  bodies[0].twist.angular = Vec3(0, 0, 1);
  integrate_semi_implicit(bodies, std::vector<ForceAccumulator>(1), {}, 1e-3);
  const Quat ref(Eigen::AngleAxisd(1e-3, Vec3::UnitZ()));
  EXPECT_LT((bodies[0].pose.orientation.coeffs() - ref.coeffs()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Integrate, BallisticMatchesRecurrenceExactly) {
  std::vector<RigidBody> bodies{free_body("b", 1.7)};
  bodies[0].twist.linear = Vec3(0.3, -0.2, 4.0);
  const Vec3 g(0, 0, -9.81);
  const double dt = 1e-3;
  Vec3 x = Vec3::Zero(), v = bodies[0].twist.linear;
  for (int i = 0; i < 5000; ++i) {
    integrate_semi_implicit(bodies, gravity_forces(bodies, g), {}, dt);
    v += (dt * (1.7 * g)) / 1.7;
    x += dt * v;
  }
  EXPECT_EQ(bodies[0].pose.position, x);
  EXPECT_EQ(bodies[0].twist.linear, v);
}

TEST(Integrate, TorqueFreeIsotropicSpinIsConstant) {
  std::vector<RigidBody> bodies{free_body("b")};
  bodies[0].inertia_body = 0.4 * Mat3::Identity();
  const Vec3 w(0.7, -1.3, 2.1);
  bodies[0].twist.angular = w;
  const std::vector<ForceAccumulator> none(1);
  for (int i = 0; i < 20000; ++i) integrate_semi_implicit(bodies, none, {}, 1e-3);
  EXPECT_LT((bodies[0].twist.angular - w).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Integrate, QuaternionNormHeldOverLongRun) {
  std::vector<RigidBody> bodies{free_body("b")};
  bodies[0].inertia_body = Vec3(1, 2, 3).asDiagonal();
  bodies[0].twist.angular = Vec3(3.0, -1.0, 0.5);
  const std::vector<ForceAccumulator> none(1);
  double worst = 0.0;
  for (int i = 0; i < 100000; ++i) {
    integrate_semi_implicit(bodies, none, {}, 1e-3);
    worst = std::max(worst, std::abs(bodies[0].pose.orientation.norm() - 1.0));
  }
  EXPECT_LE(worst, 1e-9);
}

TEST(Integrate, NonFiniteStateIsReported) {
  std::vector<RigidBody> bodies{free_body("b")};
  std::vector<ForceAccumulator> acc(1);
  acc[0].force = Vec3(std::numeric_limits<double>::infinity(), 0, 0);
  try {
    integrate_semi_implicit(bodies, acc, {}, 1e-3);
    FAIL() << "expected NonFiniteState";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonFiniteState);
  }
}

TEST(Energy, Examples) {
  const Vec3 g(0, 0, -9.81);
  std::vector<RigidBody> rest{free_body("b")};
  EXPECT_EQ(system_energy(rest, g).kinetic, 0.0);
  EXPECT_EQ(system_energy(rest, g).potential, 0.0);

  std::vector<RigidBody> moving{free_body("b", 2.0)};
  moving[0].twist.linear = Vec3(1, 0, 0);
  EXPECT_DOUBLE_EQ(system_energy(moving, g).kinetic, 1.0);

  std::vector<RigidBody> raised{free_body("b")};
  raised[0].pose.position = Vec3(0, 0, 1);
  EXPECT_DOUBLE_EQ(system_energy(raised, g).potential, 9.81);
}

TEST(Gyroscopic, ImplicitTorqueKeepsSpinBounded) {
  std::vector<RigidBody> bodies{free_body("b")};
  bodies[0].inertia_body = Vec3(1, 2, 3).asDiagonal();
  bodies[0].twist.angular = Vec3(0.1, 5.0, 0.1);
  const double e0 = system_energy(bodies, Vec3::Zero()).kinetic;
  std::vector<ForceAccumulator> acc(1);
  for (int i = 0; i < 5000; ++i) {
    acc[0].torque = gyroscopic_torque(bodies[0], 1e-3);
    integrate_semi_implicit(bodies, acc, {}, 1e-3);
  }
  const double e1 = system_energy(bodies, Vec3::Zero()).kinetic;
  EXPECT_LE(e1, e0 * (1.0 + 1e-6));
  EXPECT_GT(e1, 0.5 * e0);
}

}  // namespace
}  // namespace loopdyn

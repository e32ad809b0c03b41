#include "fixtures.hpp"

#include <numbers>

namespace loopdyn {
namespace {

SolverConfig mode_config(SolverMode mode) {
  SolverConfig c;
  c.mode = mode;
  return c;
}

TEST(Simulation, PendulumReactionEqualsWeight) {
  for (SolverMode mode : {SolverMode::PgsCfm, SolverMode::EliminateDirect}) {
    Simulation sim(testing::pendulum(), mode_config(mode));
    double worst = 0.0;
    for (int i = 1; i <= 1000; ++i) {
      const StepRecord r = sim.step();
      if (i >= 10) worst = std::max(worst, std::abs(r.forces[0].force.z() - 9.81));
    }
    EXPECT_LE(worst, 1e-6) << to_string(mode);
  }
}

TEST(Simulation, NewtonThirdLawOnEveryRecord) {
  for (SolverMode mode : {SolverMode::PgsCfm, SolverMode::EliminateDirect}) {
    Simulation sim(testing::four_bar(), mode_config(mode));
    for (int i = 0; i < 500; ++i) {
      const StepRecord r = sim.step();
      for (const auto& f : r.forces) {
        EXPECT_LE((f.force + f.parent_force).norm(), 1e-9 * f.force.norm() + 1e-300);
        // Both torques are taken about the child frame origin; they cancel
        // up to the (Baumgarte-sized) joint gap times the force.
        EXPECT_LE((f.torque + f.parent_torque).norm(), 1e-6 * (f.force.norm() + f.torque.norm()));
      }
    }
  }
}

TEST(Simulation, TreeScenesAgreeAcrossModes) {
  for (const json& doc : {pendulum_document(), double_pendulum_document()}) {
    SceneModel s = testing::load(chained_to_world(doc));
    // Start away from equilibrium so the forces vary.
    s.bodies[0].twist.angular = Vec3(0, 1.5, 0);
    s.bodies[0].twist.linear = Vec3(0, 1.5, 0).cross(s.bodies[0].pose.position);
    SolverConfig pgs;
    pgs.cfm_default = 1e-10;
    pgs.iterations = 200;
    SolverConfig direct = pgs;
    direct.mode = SolverMode::EliminateDirect;
    Simulation a(s, pgs), b(s, direct);
    double worst = 0.0;
    for (int i = 0; i < 500; ++i) {
      const StepRecord ra = a.step(), rb = b.step();
      for (std::size_t j = 0; j < ra.forces.size(); ++j) {
        const double scale = std::max(rb.forces[j].force.norm(), 1e-12);
        worst = std::max(worst, (ra.forces[j].force - rb.forces[j].force).norm() / scale);
      }
    }
    EXPECT_LE(worst, 1e-6) << doc["name"];
  }
}

TEST(Simulation, FourBarStaysAssembledUnderBothModes) {
  for (SolverMode mode : {SolverMode::PgsCfm, SolverMode::EliminateDirect}) {
    Simulation sim(testing::four_bar(), mode_config(mode));
    double peak = 0.0;
    for (int i = 0; i < 10000; ++i) peak = std::max(peak, sim.step().violation.max_position);
    EXPECT_LT(peak, 1e-6) << to_string(mode);
  }
}

// Semi-implicit Euler on the released four-bar: energy wanders but does not
// drift by more than 1% of the swing energy per period at dt = 1e-4.
TEST(Simulation, FourBarEnergyDriftPerPeriod) {
  SolverConfig cfg;
  cfg.dt = 1e-4;
  Simulation sim(testing::four_bar({0.6, 0.5, 20.0}), cfg);
  const double e0 = system_energy(sim.scene().bodies, sim.scene().gravity).total();
  // Small-angle period of the parallelogram: links swing like a pendulum
  // whose equivalent length follows from the mass distribution.
  double swing = 0.0, drift = 0.0;
  std::vector<double> crossings;
  double last = sim.coordinates()[0];
  for (int i = 0; i < 40000; ++i) {
    const StepRecord r = sim.step();
    swing = std::max(swing, r.energy.kinetic);
    drift = std::max(drift, std::abs(r.energy.total() - e0));
    const double c = r.coordinates[0];
    if ((last < 0.0) != (c < 0.0)) crossings.push_back(r.time);
    last = c;
  }
  ASSERT_GE(crossings.size(), 3u);
  const double period = 2.0 * (crossings.back() - crossings.front()) / static_cast<double>(crossings.size() - 1);
  const double periods = 4.0 / period;
  EXPECT_LT(drift / swing / periods, 0.01) << "drift " << drift << " swing " << swing << " period " << period;
}

TEST(Simulation, MotorHeldFourBarStaysAtRest) {
  for (SolverMode mode : {SolverMode::EliminateDirect, SolverMode::PgsCfm}) {
    SceneModel s = testing::four_bar();
    s.joints[s.joint_index("ground_crank")].motor = MotorParams{MotorMode::VelocityDrive, 0.0, 1e3};
    SolverConfig cfg = mode_config(mode);
    // The first step starts cold; reaching the holding impulses through the
    // loop takes PGS about a thousand sweeps. Later steps stay at the fixed point.
    cfg.iterations = 1000;
    cfg.cfm_default = 1e-12;
    Simulation sim(s, cfg);
    double peak = 0.0;
    for (int i = 0; i < 2000; ++i) {
      const StepRecord r = sim.step();
      for (const auto& t : r.twists) peak = std::max(peak, t.linear.norm());
    }
    EXPECT_LT(peak, 1e-9) << to_string(mode);
  }
}

TEST(Simulation, RecordsAreBitIdenticalAcrossRuns) {
  auto run = [] {
    Simulation sim(testing::four_bar(), SolverConfig{});
    std::vector<StepRecord> out;
    for (int i = 0; i < 300; ++i) out.push_back(sim.step());
    return out;
  };
  const auto a = run(), b = run();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].time, b[i].time);
    EXPECT_EQ(a[i].coordinates, b[i].coordinates);
    EXPECT_EQ(a[i].energy.total(), b[i].energy.total());
    EXPECT_EQ(a[i].violation.max_position, b[i].violation.max_position);
    for (std::size_t j = 0; j < a[i].forces.size(); ++j) {
      EXPECT_EQ(a[i].forces[j].force, b[i].forces[j].force);
      EXPECT_EQ(a[i].forces[j].torque, b[i].forces[j].torque);
    }
  }
}

TEST(Simulation, TimeAdvancesByDt) {
  SolverConfig cfg;
  cfg.dt = 2.5e-3;
  Simulation sim(testing::pendulum(), cfg);
  double prev = 0.0;
  for (long i = 1; i <= 400; ++i) {
    const StepRecord r = sim.step();
    EXPECT_EQ(r.step, i);
    EXPECT_GT(r.time, prev);
    EXPECT_NEAR(r.time - prev, 2.5e-3, 1e-15);
    prev = r.time;
  }
}

TEST(Simulation, RejectsBadConfig) {
  SolverConfig cfg;
  cfg.dt = 0.0;
  try {
    Simulation sim(testing::pendulum(), cfg);
    FAIL() << "expected ConfigError";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
  }
}

TEST(Simulation, ActuationScheduleDrivesMotor) {
  SceneModel s = testing::pendulum();
  s.gravity = Vec3::Zero();
  s.joints[0].motor = MotorParams{MotorMode::VelocityDrive, 0.0, 1e3};
  s.actuation = {{"pivot", {{0.0, 0.0}, {0.1, 1.0}}}};
  SolverConfig cfg;
  cfg.mode = SolverMode::EliminateDirect;
  Simulation sim(s, cfg);
  for (int i = 0; i < 200; ++i) sim.step();
  // Past the ramp the hinge turns at the scheduled 1 rad/s.
  EXPECT_NEAR(std::abs(sim.scene().bodies[0].twist.angular.y()), 1.0, 1e-9);
}

TEST(ConsistentInitialization, ProjectsSmallChainedError) {
  PerturbationSpec p;
  p.magnitude = 1e-3;
  p.seed = 7;
  const PerturbedDocument d = perturb_document(four_bar_document(), p);
  const LoadedScene loaded = load_scene(d.document);
  ASSERT_GT(loaded.report.max_closure_residual, 1e-4);
  Simulation sim(loaded.scene, SolverConfig{});
  // The four-bar closes for any consistent set of link lengths up to a
  // planar rotation, so projection succeeds.
  const InitializationReport rep = consistent_initialization(sim, 1e-4);
  EXPECT_LE(rep.residual_position, 1e-4);
  EXPECT_LE(sim.violation().max_position, 1e-4);
}

TEST(ConsistentInitialization, CraneChainedMillimetreErrorIsInconsistent) {
  PerturbationSpec p;
  p.magnitude = 1e-3;
  p.seed = 7;
  const PerturbedDocument d = perturb_document(crane_analog_document(), p);
  Simulation sim(load_scene(d.document).scene, SolverConfig{});
  try {
    consistent_initialization(sim, 1e-4);
    FAIL() << "expected InconsistentInitialConditions";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InconsistentInitialConditions);
  }
}

TEST(ConsistentInitialization, AssembledSceneIsUntouched) {
  Simulation sim(testing::four_bar(), SolverConfig{});
  const auto before = sim.scene().bodies;
  const InitializationReport rep = consistent_initialization(sim, 1e-9);
  EXPECT_LT(rep.residual_position, 1e-12);
  for (std::size_t i = 0; i < before.size(); ++i) {
    EXPECT_LT((sim.scene().bodies[i].pose.position - before[i].pose.position).norm(), 1e-12);
  }
}

}  // namespace
}  // namespace loopdyn

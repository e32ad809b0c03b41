#include "fixtures.hpp"

namespace loopdyn {
namespace {

json minimal_world() {
  return json::parse(R"({
    "version": 1, "convention": "world_frame", "name": "one",
    "bodies": [{"id": "box", "mass": 2.0, "position": [0, 0, 1]}]
  })");
}

ErrorKind kind_of(const std::function<void()>& f, std::string* message = nullptr) {
  try {
    f();
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::ConfigError;
}

// Semantic equality of two documents: same keys and structure, numbers within tol.
void expect_same_document(const json& a, const json& b, double tol, const std::string& path = "") {
  if (a.is_number() && b.is_number()) {
    EXPECT_NEAR(a.get<double>(), b.get<double>(), tol) << path;
    return;
  }
  ASSERT_EQ(a.type(), b.type()) << path;
  if (a.is_object()) {
    ASSERT_EQ(a.size(), b.size()) << path;
    for (const auto& [k, v] : a.items()) {
      ASSERT_TRUE(b.contains(k)) << path << "/" << k;
      expect_same_document(v, b[k], tol, path + "/" + k);
    }
  } else if (a.is_array()) {
    ASSERT_EQ(a.size(), b.size()) << path;
    for (std::size_t i = 0; i < a.size(); ++i) expect_same_document(a[i], b[i], tol, path + "/" + std::to_string(i));
  } else {
    EXPECT_EQ(a, b) << path;
  }
}

TEST(SceneIo, MinimalDocument) {
  const LoadedScene s = load_scene(minimal_world());
  ASSERT_EQ(s.scene.bodies.size(), 1u);
  EXPECT_TRUE(s.scene.joints.empty());
  EXPECT_EQ(s.scene.bodies[0].mass, 2.0);
  EXPECT_EQ(s.scene.bodies[0].pose.position, Vec3(0, 0, 1));
  EXPECT_EQ(s.scene.gravity, Vec3(0, 0, -9.81));
}

TEST(SceneIo, UnknownJointKindNamesTheField) {
  json doc = minimal_world();
  doc["joints"] = json::array({{{"id", "j"}, {"kind", "helical"}, {"child", "box"}, {"frame", {{"position", {0, 0, 0}}}}}});
  std::string msg;
  EXPECT_EQ(kind_of([&] { load_scene(doc); }, &msg), ErrorKind::SchemaError);
  EXPECT_NE(msg.find("/joints/0/kind"), std::string::npos) << msg;
}

TEST(SceneIo, HeaderIsValidated) {
  json doc = minimal_world();
  doc["version"] = 2;
  EXPECT_EQ(kind_of([&] { load_scene(doc); }), ErrorKind::SchemaError);
  doc = minimal_world();
  doc["convention"] = "body_frame";
  EXPECT_EQ(kind_of([&] { load_scene(doc); }), ErrorKind::SchemaError);
  doc = minimal_world();
  doc.erase("convention");
  EXPECT_EQ(kind_of([&] { load_scene(doc); }), ErrorKind::SchemaError);
}

TEST(SceneIo, BadBodiesAreSchemaErrors) {
  json doc = minimal_world();
  doc["bodies"].push_back(doc["bodies"][0]);
  EXPECT_EQ(kind_of([&] { load_scene(doc); }), ErrorKind::SchemaError);  // duplicate id
  doc = minimal_world();
  doc["bodies"][0]["mass"] = 0.0;
  EXPECT_EQ(kind_of([&] { load_scene(doc); }), ErrorKind::SchemaError);
  doc = minimal_world();
  doc["bodies"][0]["position"] = {0, 1};
  EXPECT_EQ(kind_of([&] { load_scene(doc); }), ErrorKind::SchemaError);
  doc = minimal_world();
  doc["bodies"][0].erase("mass");
  EXPECT_EQ(kind_of([&] { load_scene(doc); }), ErrorKind::SchemaError);
}

TEST(SceneIo, DanglingReference) {
  json doc = minimal_world();
  doc["joints"] = json::array({{{"id", "j"}, {"kind", "revolute"}, {"parent", "ghost"}, {"child", "box"},
                                {"frame", {{"position", {0, 0, 0}}}}}});
  EXPECT_EQ(kind_of([&] { load_scene(doc); }), ErrorKind::DanglingReference);

  json chained = four_bar_document();
  chained["joints"][1]["parent"] = "ghost";
  EXPECT_EQ(kind_of([&] { load_scene(chained); }), ErrorKind::DanglingReference);

  json act = chained_to_world(crane_analog_document());
  act["actuation"][0]["joint"] = "ghost";
  EXPECT_EQ(kind_of([&] { load_scene(act); }), ErrorKind::DanglingReference);
}

TEST(SceneIo, ChainOrderError) {
  json doc = four_bar_document();
  std::swap(doc["bodies"][0], doc["bodies"][1]);  // coupler before its predecessor
  EXPECT_EQ(kind_of([&] { load_scene(doc); }), ErrorKind::ChainOrderError);
}

TEST(SceneIo, ActuationNeedsAMotorAndSortedSchedule) {
  json doc = chained_to_world(crane_analog_document());
  json bad = doc;
  bad["actuation"][0]["schedule"] = {{0.5, 0.0}, {0.1, 1.0}};
  EXPECT_EQ(kind_of([&] { load_scene(bad); }), ErrorKind::SchemaError);
  bad = doc;
  for (auto& j : bad["joints"]) {
    if (j["id"] == bad["actuation"][0]["joint"]) j.erase("motor");
  }
  EXPECT_EQ(kind_of([&] { load_scene(bad); }), ErrorKind::SchemaError);
}

TEST(SceneIo, MotorOnSphericalIsRejected) {
  json doc = chained_to_world(pendulum_document());
  doc["joints"][0]["kind"] = "spherical";
  doc["joints"][0]["motor"] = {{"mode", "velocity_drive"}, {"target", 0.0}, {"max_force", 1.0}};
  EXPECT_EQ(kind_of([&] { load_scene(doc); }), ErrorKind::SchemaError);
}

TEST(SceneIo, RoundTripIsExact) {
  for (const auto& name : generator_names()) {
    for (Convention c : {Convention::WorldFrame, Convention::ChainedFrame}) {
      const json doc = generate_document(name, c);
      const json first = serialize(load_scene(doc).scene);
      const json second = serialize(load_scene(first).scene);
      expect_same_document(first, second, 1e-15, name);
    }
  }
}

TEST(SceneIo, SerializeReproducesExplicitDocument) {
  const json doc = json::parse(R"({
    "version": 1, "convention": "world_frame", "name": "pair",
    "gravity": [0, 0, -9.81],
    "bodies": [
      {"id": "a", "mass": 1.5, "inertia": [[0.1, 0, 0], [0, 0.2, 0], [0, 0, 0.3]],
       "position": [0.1, 0.2, 0.3], "orientation": [1, 0, 0, 0],
       "linear_velocity": [0, 0, 0], "angular_velocity": [0, 0.5, 0]},
      {"id": "b", "mass": 0.25, "inertia": [[0.01, 0, 0], [0, 0.02, 0], [0, 0, 0.03]],
       "position": [1.1, 0.2, 0.3], "orientation": [1, 0, 0, 0],
       "linear_velocity": [0.5, 0, 0], "angular_velocity": [0, 0, 0]}
    ],
    "joints": [
      {"id": "hinge", "kind": "revolute", "parent": "a", "child": "b",
       "anchor_parent": {"position": [0.5, 0, 0], "orientation": [1, 0, 0, 0]},
       "anchor_child": {"position": [-0.5, 0, 0], "orientation": [1, 0, 0, 0]},
       "axis": [0, 1, 0], "damping": 0.125,
       "motor": {"mode": "position_drive", "target": 0.5, "max_force": 10, "kp": 4, "kd": 2}}
    ],
    "actuation": [{"joint": "hinge", "schedule": [[0, 0], [1, 0.5]]}]
  })");
  expect_same_document(serialize(load_scene(doc).scene), doc, 1e-15);
}

TEST(SceneIo, ConventionsAgree) {
  for (const auto& name : generator_names()) {
    const json chained = generate_document(name, Convention::ChainedFrame);
    const SceneModel a = load_scene(chained).scene;
    const SceneModel b = load_scene(chained_to_world(chained)).scene;
    ASSERT_EQ(a.bodies.size(), b.bodies.size());
    for (std::size_t i = 0; i < a.bodies.size(); ++i) {
      EXPECT_LT((a.bodies[i].pose.position - b.bodies[i].pose.position).norm(), 1e-12) << name;
      EXPECT_LT(a.bodies[i].pose.orientation.angularDistance(b.bodies[i].pose.orientation), 1e-12) << name;
    }
    const ViolationReport va = measure_violation(a.joints, a.bodies, make_body_index(a.bodies));
    const ViolationReport vb = measure_violation(b.joints, b.bodies, make_body_index(b.bodies));
    EXPECT_NEAR(va.max_position, vb.max_position, 1e-12) << name;
  }
}

TEST(SceneIo, ExactChainsClose) {
  for (const auto& name : generator_names()) {
    EXPECT_LT(load_scene(generate_document(name, Convention::ChainedFrame)).report.max_closure_residual, 1e-12)
        << name;
  }
}

TEST(SceneIo, TangentialErrorAccumulatesLinearly) {
  PerturbationSpec p;
  p.magnitude = 1e-3;
  p.distribution = Distribution::FixedOffset;
  const PerturbedDocument d = perturb_document(straight_chain_document(4), p);
  const LoadedScene s = load_scene(d.document);
  EXPECT_NEAR(s.report.max_closure_residual, 4e-3, 1e-12);
  EXPECT_EQ(s.report.closure.back().joint, "closure");
}

TEST(SceneIo, ClosureResidualBoundedByLinksTimesError) {
  for (int n = 1; n <= 12; ++n) {
    for (double eps : {1e-6, 1e-4, 1e-3}) {
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        PerturbationSpec p;
        p.magnitude = eps;
        p.seed = seed;
        const PerturbedDocument d = perturb_document(straight_chain_document(n), p);
        const double r = load_scene(d.document).report.max_closure_residual;
        EXPECT_LE(r, n * eps * (1.0 + 1e-6)) << n << " links, eps " << eps;
      }
    }
  }
}

// World-frame joint locations are absolute, so moving a body shifts its mass
// relative to its joints but never opens a joint.
TEST(SceneIo, WorldFrameBodyErrorKeepsJointsClosed) {
  const json world = chained_to_world(straight_chain_document(10));
  const LoadedScene exact = load_scene(world);
  EXPECT_EQ(exact.report.max_closure_residual, 0.0);
  PerturbationSpec p;
  p.magnitude = 1e-3;
  p.seed = 3;
  p.target = PerturbTarget::BodyPositions;
  const PerturbedDocument d = perturb_document(world, p);
  const SceneModel s = load_scene(d.document).scene;
  const ViolationReport v = measure_violation(s.joints, s.bodies, make_body_index(s.bodies));
  EXPECT_LT(v.max_position, 1e-12);
  double moved = 0.0;
  for (std::size_t i = 0; i < s.bodies.size(); ++i) {
    const Vec3 delta = s.bodies[i].pose.position - exact.scene.bodies[i].pose.position;
    EXPECT_LE(delta.cwiseAbs().maxCoeff(), 1e-3 + 1e-15);
    moved = std::max(moved, delta.norm());
  }
  EXPECT_GT(moved, 0.0);
}

TEST(SceneIo, ReadsFilesAndReportsParseErrors) {
  const fs::path dir = fs::temp_directory_path() / "loopdyn_scene_io_test";
  fs::create_directories(dir);
  write_text(dir / "ok.json", minimal_world().dump());
  write_text(dir / "broken.json", "{ \"version\": 1, ");
  EXPECT_EQ(load_scene(read_json_file((dir / "ok.json").string())).scene.bodies.size(), 1u);
  EXPECT_EQ(kind_of([&] { read_json_file((dir / "broken.json").string()); }), ErrorKind::SchemaError);
  EXPECT_EQ(kind_of([&] { read_json_file((dir / "absent.json").string()); }), ErrorKind::ConfigError);
}

TEST(SceneIo, ShippedScenesLoad) {
  for (const auto& entry : fs::directory_iterator(fs::path(LOOPDYN_SCENARIO_DIR) / "scenes")) {
    const LoadedScene s = load_scene(read_json_file(entry.path().string()));
    EXPECT_FALSE(s.scene.bodies.empty()) << entry.path();
    EXPECT_LT(s.report.max_closure_residual, 1e-12) << entry.path();
  }
}

// ---- graph ---------------------------------------------------------------

TEST(Graph, DoublePendulum) {
  const GraphReport r = analyze_graph(testing::double_pendulum());
  EXPECT_EQ(r.independent_loop_count, 0);
  EXPECT_EQ(r.gruebler_mobility, 2);
  EXPECT_TRUE(r.loops.empty());
}

TEST(Graph, FourBar) {
  const GraphReport r = analyze_graph(testing::four_bar());
  EXPECT_EQ(r.independent_loop_count, 1);
  EXPECT_EQ(r.gruebler_mobility, -2);
  ASSERT_EQ(r.loops.size(), 1u);
  EXPECT_EQ(r.loops[0].size(), 4u);
}

TEST(Graph, CraneAnalog) {
  const SceneModel s = testing::load(chained_to_world(crane_analog_document()));
  const GraphReport r = analyze_graph(s);
  EXPECT_EQ(r.body_count, 21);
  EXPECT_EQ(r.joint_count, 27);
  EXPECT_EQ(r.independent_loop_count, 9);
  EXPECT_EQ(r.independent_loop_count, r.joint_count - r.vertex_count + r.component_count);
  EXPECT_EQ(static_cast<int>(r.loops.size()), 9);
  int revolute = 0, prismatic = 0;
  for (const auto& j : s.joints) {
    revolute += j.kind == JointKind::Revolute;
    prismatic += j.kind == JointKind::Prismatic;
  }
  EXPECT_EQ(revolute, 25);
  EXPECT_EQ(prismatic, 2);
  EXPECT_NE(s.joint_index(kCraneCriticalJoint), -1);
}

TEST(Graph, LoopReportIsStable) {
  const SceneModel s = testing::load(chained_to_world(crane_analog_document()));
  EXPECT_EQ(to_json(analyze_graph(s)).dump(), to_json(analyze_graph(s)).dump());
}

int union_find_components(int n, const std::vector<GraphEdge>& edges) {
  std::vector<int> parent(n);
  for (int i = 0; i < n; ++i) parent[i] = i;
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  int comps = n;
  for (const auto& e : edges) {
    const int a = find(e.u), b = find(e.v);
    if (a != b) {
      parent[a] = b;
      --comps;
    }
  }
  return comps;
}

int gf2_rank(std::vector<std::vector<char>> rows) {
  int rank = 0;
  const std::size_t width = rows.empty() ? 0 : rows[0].size();
  for (std::size_t col = 0; col < width; ++col) {
    std::size_t pivot = rank;
    while (pivot < rows.size() && !rows[pivot][col]) ++pivot;
    if (pivot == rows.size()) continue;
    std::swap(rows[pivot], rows[rank]);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r != static_cast<std::size_t>(rank) && rows[r][col]) {
        for (std::size_t k = 0; k < width; ++k) rows[r][k] ^= rows[rank][k];
      }
    }
    ++rank;
  }
  return rank;
}

TEST(Graph, RandomMultigraphsMatchUnionFind) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 12);
    const int m = static_cast<int>(rng() % 25);
    std::vector<GraphEdge> edges;
    for (int e = 0; e < m; ++e) {
      edges.push_back({static_cast<int>(rng() % n), static_cast<int>(rng() % n)});
    }
    const CycleSpace cs = cycle_space(n, edges);
    const int c = union_find_components(n, edges);
    EXPECT_EQ(cs.components, c);
    EXPECT_EQ(cs.dimension, m - n + c);
    ASSERT_EQ(static_cast<int>(cs.basis.size()), cs.dimension);
    // Each basis member is a cycle (every vertex has even degree) and the
    // members are independent over GF(2).
    std::vector<std::vector<char>> rows;
    for (const auto& cycle : cs.basis) {
      std::vector<int> degree(n, 0);
      std::vector<char> row(m, 0);
      for (int e : cycle) {
        ++degree[edges[e].u];
        ++degree[edges[e].v];
        row[e] ^= 1;
      }
      for (int d : degree) EXPECT_EQ(d % 2, 0);
      rows.push_back(row);
    }
    EXPECT_EQ(gf2_rank(rows), cs.dimension);
  }
}

// ---- perturbation --------------------------------------------------------

TEST(Perturb, ZeroMagnitudeIsIdentity) {
  const SceneModel s = testing::four_bar();
  PerturbationSpec p;
  p.seed = 99;
  const PerturbedScene out = perturb(s, p);
  EXPECT_TRUE(out.offsets.empty());
  EXPECT_EQ(serialize(out.scene), serialize(s));
  EXPECT_EQ(perturb_document(four_bar_document(), p).document, four_bar_document());
}

TEST(Perturb, FixedOffsetOnOneAnchorIsExact) {
  const SceneModel s = testing::four_bar();
  PerturbationSpec p;
  p.magnitude = 1e-3;
  p.distribution = Distribution::FixedOffset;
  p.target = PerturbTarget::Anchors;
  p.names = {"coupler_rocker"};
  p.direction = Vec3(1, 2, -2);
  const PerturbedScene out = perturb(s, p);
  ASSERT_EQ(out.offsets.size(), 1u);
  const ViolationReport v = measure_violation(out.scene.joints, out.scene.bodies, make_body_index(out.scene.bodies));
  for (std::size_t i = 0; i < v.joints.size(); ++i) {
    if (out.scene.joints[i].id == "coupler_rocker") {
      EXPECT_NEAR(v.joints[i].position_error, 1e-3, 1e-15);
    } else {
      EXPECT_LT(v.joints[i].position_error, 1e-15);
    }
  }
}

TEST(Perturb, SameSeedSameScene) {
  const SceneModel s = testing::load(chained_to_world(crane_analog_document()));
  PerturbationSpec p;
  p.magnitude = 1e-3;
  p.seed = 1234;
  EXPECT_EQ(serialize(perturb(s, p).scene), serialize(perturb(s, p).scene));
  EXPECT_EQ(perturb_document(crane_analog_document(), p).document,
            perturb_document(crane_analog_document(), p).document);
  const json first = serialize(perturb(s, p).scene);
  p.seed = 1235;
  EXPECT_NE(serialize(perturb(s, p).scene), first);
}

TEST(Perturb, PerAxisOffsetsStayWithinMagnitude) {
  const SceneModel s = testing::load(chained_to_world(crane_analog_document()));
  PerturbationSpec p;
  p.magnitude = 1e-3;
  p.seed = 5;
  const PerturbedScene out = perturb(s, p);
  for (const auto& o : out.offsets) EXPECT_LE(o.offset.cwiseAbs().maxCoeff(), 1e-3);
  for (std::size_t i = 0; i < s.bodies.size(); ++i) {
    if (s.bodies[i].is_static) {
      EXPECT_EQ(out.scene.bodies[i].pose.position, s.bodies[i].pose.position);
    }
  }
}

TEST(Perturb, RejectsNegativeMagnitude) {
  PerturbationSpec p;
  p.magnitude = -1.0;
  EXPECT_EQ(kind_of([&] { perturb(testing::four_bar(), p); }), ErrorKind::ConfigError);
  p.magnitude = 1e-3;
  p.target = PerturbTarget::LinkVectors;
  EXPECT_EQ(kind_of([&] { perturb(testing::four_bar(), p); }), ErrorKind::ConfigError);
}

TEST(Perturb, UniformDrawsAreReproducible) {
  SymmetricUniform a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    const double x = a();
    EXPECT_EQ(x, b());
    EXPECT_GE(x, -1.0);
    EXPECT_LT(x, 1.0);
  }
}

}  // namespace
}  // namespace loopdyn

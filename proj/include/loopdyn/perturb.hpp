#pragma once

// Seeded initial-position perturbations, applied either to a loaded scene or
// to a scene document before loading (so the loader's convention decides how
// the error propagates).

#include <loopdyn/scene_io.hpp>
#include <loopdyn/scene_model.hpp>

#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace loopdyn {

enum class Distribution { PerAxisUniform, FixedOffset };
enum class PerturbTarget { Anchors, BodyPositions, LinkVectors };

inline std::string_view to_string(Distribution d) {
  return d == Distribution::PerAxisUniform ? "per_axis_uniform" : "fixed_offset";
}

inline std::string_view to_string(PerturbTarget t) {
  switch (t) {
    case PerturbTarget::Anchors: return "anchors";
    case PerturbTarget::BodyPositions: return "body_positions";
    case PerturbTarget::LinkVectors: return "link_vectors";
  }
  return "anchors";
}

struct PerturbationSpec {
  double magnitude = 0.0;  // m
  Distribution distribution = Distribution::PerAxisUniform;
  std::uint64_t seed = 0;
  PerturbTarget target = PerturbTarget::BodyPositions;
  std::vector<std::string> names;  // joint or body ids; empty = all
  Vec3 direction = Vec3::UnitX();  // fixed_offset direction (normalized on use)
};

struct AppliedOffset {
  std::string target;  // body id, joint id, or "body/frame"
  Vec3 offset = Vec3::Zero();
};

struct PerturbedScene {
  SceneModel scene;
  std::vector<AppliedOffset> offsets;
};

/// Uniform draws on [-1, 1] from the top 53 bits; identical on every platform,
/// unlike std::uniform_real_distribution.
class SymmetricUniform {
 public:
  explicit SymmetricUniform(std::uint64_t seed) : rng_(seed) {}
  double operator()() {
    const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    return 2.0 * u - 1.0;
  }

 private:
  std::mt19937_64 rng_;
};

namespace perturb_detail {

inline void check(const PerturbationSpec& spec) {
  if (!std::isfinite(spec.magnitude) || spec.magnitude < 0.0) {
    throw Error(ErrorKind::ConfigError, "perturbation magnitude must be finite and >= 0");
  }
}

inline bool selected(const PerturbationSpec& spec, const std::string& id) {
  return spec.names.empty() || std::find(spec.names.begin(), spec.names.end(), id) != spec.names.end();
}

inline Vec3 draw(const PerturbationSpec& spec, SymmetricUniform& u) {
  if (spec.distribution == Distribution::FixedOffset) {
    return spec.magnitude * spec.direction.normalized();
  }
  const double x = u(), y = u(), z = u();
  return spec.magnitude * Vec3(x, y, z);
}

// Scalar offset along a vector's own direction.
inline double draw_tangential(const PerturbationSpec& spec, SymmetricUniform& u) {
  return spec.distribution == Distribution::FixedOffset ? spec.magnitude : spec.magnitude * u();
}

}  // namespace perturb_detail

/// Perturbs a loaded scene. Anchors: the child-side anchor point moves by a
/// world-frame offset, so the joint opens by exactly that offset. Body
/// positions: the body moves and keeps its anchors, carrying them along.
inline PerturbedScene perturb(const SceneModel& scene, const PerturbationSpec& spec) {
  perturb_detail::check(spec);
  PerturbedScene out{scene, {}};
  if (spec.magnitude == 0.0) return out;
  SymmetricUniform u(spec.seed);
  if (spec.target == PerturbTarget::Anchors) {
    const BodyIndex index = make_body_index(out.scene.bodies);
    for (auto& j : out.scene.joints) {
      if (!perturb_detail::selected(spec, j.id)) continue;
      const Vec3 d = perturb_detail::draw(spec, u);
      const int child = resolve_body(index, j.child);
      const Mat3 r = child == kWorldIndex ? Mat3::Identity() : out.scene.bodies[child].pose.rotation();
      j.anchor_child.position += r.transpose() * d;
      out.offsets.push_back({j.id, d});
    }
  } else if (spec.target == PerturbTarget::BodyPositions) {
    for (auto& b : out.scene.bodies) {
      if (b.is_static || !perturb_detail::selected(spec, b.id)) continue;
      const Vec3 d = perturb_detail::draw(spec, u);
      b.pose.position += d;
      out.offsets.push_back({b.id, d});
    }
  } else {
    throw Error(ErrorKind::ConfigError, "link_vectors perturbation applies to chained_frame documents");
  }
  return out;
}

struct PerturbedDocument {
  json document;
  std::vector<AppliedOffset> offsets;
};

/// Perturbs a scene document before loading.
///  * world_frame: body positions (anchors are then resolved from the
///    perturbed poses, so the error stays local to each body).
///  * chained_frame: every link vector (r_ab and extra frames) is stretched
///    along its own direction, which is how measurement error enters a
///    chained model; the loader then accumulates it along the chain.
inline PerturbedDocument perturb_document(const json& doc, const PerturbationSpec& spec) {
  perturb_detail::check(spec);
  PerturbedDocument out{doc, {}};
  if (spec.magnitude == 0.0) return out;
  SymmetricUniform u(spec.seed);
  const std::string conv = doc.value("convention", std::string{});
  json& bodies = out.document["bodies"];
  for (auto& b : bodies) {
    const std::string id = b.value("id", std::string{});
    if (!perturb_detail::selected(spec, id)) continue;
    if (conv == "chained_frame") {
      auto stretch = [&](json& v, const std::string& name) {
        Vec3 r = io::vec3(v, "/bodies/" + id + "/" + name);
        const double n = r.norm();
        if (n == 0.0) return;
        const Vec3 d = perturb_detail::draw_tangential(spec, u) * r / n;
        r += d;
        v = io::to_json(r);
        out.offsets.push_back({id + "/" + name, d});
      };
      if (b.contains("r_ab")) stretch(b["r_ab"], "r_ab");
      if (b.contains("frames")) {
        for (auto& [name, v] : b["frames"].items()) stretch(v, name);
      }
    } else {
      if (b.value("static", false)) continue;
      Vec3 p = io::vec3(b["position"], "/bodies/" + id + "/position");
      const Vec3 d = perturb_detail::draw(spec, u);
      p += d;
      b["position"] = io::to_json(p);
      out.offsets.push_back({id, d});
    }
  }
  return out;
}

inline json to_json(const std::vector<AppliedOffset>& offsets) {
  json arr = json::array();
  for (const auto& o : offsets) arr.push_back({{"target", o.target}, {"offset", io::to_json(o.offset)}});
  return arr;
}

}  // namespace loopdyn

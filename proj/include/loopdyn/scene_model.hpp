#pragma once

#include <loopdyn/body.hpp>
#include <loopdyn/joint.hpp>

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

namespace loopdyn {

enum class Convention { WorldFrame, ChainedFrame };

inline std::string_view to_string(Convention c) {
  return c == Convention::WorldFrame ? "world_frame" : "chained_frame";
}

/// Piecewise-linear schedule of (time, target) samples for one motorized joint.
struct Actuation {
  std::string joint;
  std::vector<std::pair<double, double>> schedule;

  double value_at(double t) const {
    if (schedule.empty()) return 0.0;
    if (t <= schedule.front().first) return schedule.front().second;
    if (t >= schedule.back().first) return schedule.back().second;
    auto hi = std::upper_bound(schedule.begin(), schedule.end(), t,
                               [](double x, const auto& p) { return x < p.first; });
    auto lo = hi - 1;
    const double span = hi->first - lo->first;
    if (span <= 0.0) return hi->second;
    const double s = (t - lo->first) / span;
    return lo->second + s * (hi->second - lo->second);
  }
};

struct SceneModel {
  std::string name;
  std::vector<RigidBody> bodies;
  std::vector<Joint> joints;
  Vec3 gravity{0.0, 0.0, -9.81};
  std::vector<Actuation> actuation;
  Convention convention = Convention::WorldFrame;

  int joint_index(const std::string& id) const {
    for (std::size_t i = 0; i < joints.size(); ++i) {
      if (joints[i].id == id) return static_cast<int>(i);
    }
    return -1;
  }

  int body_index(const std::string& id) const {
    for (std::size_t i = 0; i < bodies.size(); ++i) {
      if (bodies[i].id == id) return static_cast<int>(i);
    }
    return -1;
  }
};

}  // namespace loopdyn

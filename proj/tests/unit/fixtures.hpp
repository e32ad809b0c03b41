#pragma once

#include <loopdyn/loopdyn.hpp>

#include <gtest/gtest.h>

#include "../support/joint_check.hpp"

#include <random>

namespace loopdyn::testing {

inline SceneModel load(const json& doc) { return load_scene(doc).scene; }

inline SceneModel pendulum() { return load(chained_to_world(pendulum_document())); }
inline SceneModel double_pendulum() { return load(chained_to_world(double_pendulum_document())); }
inline SceneModel four_bar(const FourBarParams& p = {}) { return load(chained_to_world(four_bar_document(p))); }

}  // namespace loopdyn::testing

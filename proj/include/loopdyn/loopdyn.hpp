#pragma once

// Umbrella header.

#include <loopdyn/math.hpp>
#include <loopdyn/error.hpp>
#include <loopdyn/body.hpp>
#include <loopdyn/joint.hpp>
#include <loopdyn/solver.hpp>
#include <loopdyn/scene_model.hpp>
#include <loopdyn/simulation.hpp>
#include <loopdyn/scene_io.hpp>
#include <loopdyn/graph.hpp>
#include <loopdyn/perturb.hpp>
#include <loopdyn/scenarios.hpp>
#include <loopdyn/bench.hpp>

#pragma once

#include <cstddef>
#include <vector>

#include "ogf/conic.hpp"
#include "ogf/model.hpp"

namespace ogf {

/// Linearization data for one Weymouth record. Pressures are stored against the
/// file endpoints (from, to); `orientation` picks the high-pressure side:
/// +1 means from-node is high and F >= 0, -1 means to-node is high and F <= 0.
struct LinearizationEntry {
  double pressure_from = 0.0;
  double pressure_to = 0.0;
  double flow = 0.0;  // F0 >= 0, magnitude along the orientation
  int orientation = 1;
  bool low_confidence = false;

  double pressure_high() const { return orientation > 0 ? pressure_from : pressure_to; }
  double pressure_low() const { return orientation > 0 ? pressure_to : pressure_from; }
};

/// One entry per Weymouth record of the instance, in record order.
struct LinearizationPoint {
  std::vector<LinearizationEntry> entries;
};

struct Subproblem {
  ConicProgram program;
  std::size_t original_variables = 0;  // instance variables occupy [0, original_variables)
  std::vector<std::size_t> slack;      // s per Weymouth record
  std::vector<std::size_t> epigraph;   // u >= pi_high^2 per Weymouth record
};

/// Convex subproblem for one penalty iteration: instance objective plus
/// tau * sum(s), the instance's linear rows and bounds, and per pipeline
///   ||(pi_low, sigma F / C)|| <= pi_high,  sigma F >= 0,
///   u >= pi_high^2,
///   u - (2 pi_low0 pi_low - pi_low0^2) - (2 F0 sigma F - F0^2) / C^2 <= s,  s >= 0.
Subproblem assemble_subproblem(const ProblemInstance& instance, const LinearizationPoint& point, double tau);

/// Value of the linearized right-hand side (2 pi_low0 pi_low - pi_low0^2) +
/// (2 F0 f - F0^2) / C^2 at (pi_low, f), with f the oriented flow.
double linearized_lower_bound(const LinearizationEntry& entry, double coefficient, double pi_low, double flow);

}  // namespace ogf

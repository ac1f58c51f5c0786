#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "ogf/network.hpp"

namespace ogf {

/// Parameters of a randomly generated meshed network: a random tree plus
/// `loops` extra pipelines, `compressors` tree edges near the cheap source
/// turned into compressors, and `sources` supply nodes (the first at the root).
struct SyntheticSpec {
  std::string name;
  int nodes = 7;
  int sources = 2;
  int compressors = 1;
  int loops = 1;
  std::uint64_t seed = 1;
  double cost_scale = 1.0;        // multiplies every unit cost
  double pressure_floor = 0.8;    // pi_min as a fraction of the operating pressure
  double pressure_ceiling = 1.2;  // pi_max as a fraction (the root keeps 1.0)
};

/// Builds a network whose base case has a known Weymouth-consistent operating
/// point. Flows are fixed first from nodal balance, then pressures are set
/// along the tree and pipeline coefficients are derived from both. Draws that
/// produce inconsistent loop directions are rejected and redrawn.
GasNetwork generate_network(const SyntheticSpec& spec);

/// Two nodes, one pipeline, one source.
GasNetwork tiny_t1();

/// T1 followed by a compressor feeding a third node.
GasNetwork tiny_t2();

GasNetwork synthetic_net7();
GasNetwork synthetic_net20();

/// `t1`, `t2`, `net7`, `net20`, or a path to a network document.
GasNetwork resolve_network(std::string_view name_or_path);

}  // namespace ogf

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ogf/conic.hpp"
#include "ogf/model.hpp"
#include "ogf/subproblem.hpp"

namespace ogf {

/// Largest absolute linear residual accepted from an inexact subproblem solve.
inline constexpr double kLinearResidualLimit = 1e-6;

struct CcpConfig {
  double zeta0 = 1e-3;
  double tau1 = 1.0;
  double tau_max = 1000.0;
  double kappa = 2.0;
  int max_iterations = 50;
  double flow_floor = kDefaultFlowFloor;
  double solver_tolerance = 1e-9;

  /// Throws ValidationError when a parameter is out of range.
  void validate() const;

  /// Penalty weight of 1-based iteration i: min(kappa^(i-1) tau1, tau_max).
  double tau_at(int iteration) const;
};

/// Reads parameter overrides (`zeta0`, `tau1`, `tau_max`, `kappa`,
/// `max_iterations`, `flow_floor`, `solver_tolerance`) from a JSON object.
CcpConfig parse_ccp_config(std::string_view json_text, CcpConfig base = {});
std::string ccp_config_to_json(const CcpConfig& config);

enum class CcpStatus { converged, iteration_limit, subproblem_failed };

const char* to_string(CcpStatus status);

struct IterationRecord {
  double tau = 0.0;
  double xi = 0.0;
  double objective = 0.0;  // instance cost at the iterate
  double penalty = 0.0;    // tau * sum(s)
  double max_slack = 0.0;
  int solver_iterations = 0;
};

struct CcpResult {
  CcpStatus status = CcpStatus::iteration_limit;
  SolutionVector solution;
  int iterations = 0;  // subproblem solves attempted
  double final_xi = 0.0;
  double max_linear_residual = 0.0;
  std::vector<IterationRecord> trace;
  std::vector<bool> direction_suspect;  // per Weymouth record
  int failed_iteration = 0;             // 1-based, set when status is subproblem_failed
  std::string failure;
};

std::string ccp_result_to_json(const ProblemInstance& instance, const CcpResult& result);

/// Pressure prediction per slot and node index: profile[t][g].
using PressureProfile = std::vector<std::vector<double>>;

/// Clamps predicted pressures into bounds, orients each pipeline toward the
/// higher predicted pressure and sets F0 = C sqrt(pi_high^2 - pi_low^2). Ties
/// orient from the endpoint listed first in the node table and are flagged
/// low-confidence.
LinearizationPoint warm_start_from_pressures(const ProblemInstance& instance, const PressureProfile& predicted);

/// Uniform pressures within bounds, file orientation, F0 from the Weymouth
/// relation with negative discriminants mapped to zero.
LinearizationPoint cold_start(const ProblemInstance& instance, std::uint64_t seed);

/// Penalty convex-concave iterations from `start`.
CcpResult run_ccp(const ProblemInstance& instance, const LinearizationPoint& start, const CcpConfig& config = {});

/// Converged pressures of a solution as a profile[t][g].
PressureProfile pressures_of(const ProblemInstance& instance, const SolutionVector& x);

}  // namespace ogf

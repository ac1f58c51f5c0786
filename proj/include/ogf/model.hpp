#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ogf/linear.hpp"
#include "ogf/network.hpp"

namespace ogf {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class VariableKind {
  source_output,           // G_s
  pipe_flow,               // F_mn
  pipe_inflow,             // q^in_mn
  pipe_outflow,            // q^out_mn
  linepack,                // M_mn
  pressure,                // pi_g
  compressor_flow,         // F_C,ij
  compressor_consumption,  // W_ij
};

struct Variable {
  VariableKind kind;
  std::size_t element;  // index into the network's source/pipeline/node/compressor list
  int slot;             // 0-based time slot
  std::string name;
  double lower = -kInfinity;
  double upper = kInfinity;
};

enum class RowSense { equal, less_equal };

/// Which model equation a row came from; used by tests and residual reports.
enum class RowFamily {
  compressor_ratio,     // pi_i <= pi_j <= R pi_i
  compressor_usage,     // W = gamma F_C
  nodal_balance,        // steady balance or balance with q_in / q_out
  average_flow,         // F = (q_in + q_out) / 2
  linepack_pressure,    // M = H (pi_m + pi_n) / 2
  linepack_dynamics,    // M_t = M_{t-1} + q_in - q_out
  linepack_terminal,    // sum M_T = sum M_0
};

struct LinearRow {
  std::vector<LinearTerm> terms;
  RowSense sense = RowSense::equal;
  double rhs = 0.0;
  RowFamily family = RowFamily::nodal_balance;
  std::string label;

  double activity(std::span<const double> x) const {
    double sum = 0.0;
    for (const LinearTerm& t : terms) sum += t.coef * x[t.var];
    return sum;
  }
};

/// One nonconvex Weymouth equality F|F| = C^2 (pi_from^2 - pi_to^2).
struct WeymouthRecord {
  std::size_t pipeline;
  int slot;
  std::size_t flow;
  std::size_t pressure_from;
  std::size_t pressure_to;
  double coefficient;
  double pi_max_from;
};

/// Assembled optimal gas flow problem: variable index space, linear rows,
/// Weymouth records and the cost vector. Immutable once built.
class ProblemInstance {
 public:
  const GasNetwork& network() const noexcept { return network_; }
  const Scenario& scenario() const noexcept { return scenario_; }
  int horizon() const noexcept { return horizon_; }
  bool quasi_dynamic() const noexcept { return quasi_dynamic_; }

  std::size_t variable_count() const noexcept { return variables_.size(); }
  const std::vector<Variable>& variables() const noexcept { return variables_; }
  const std::vector<double>& objective() const noexcept { return objective_; }
  const std::vector<LinearRow>& rows() const noexcept { return rows_; }
  const std::vector<WeymouthRecord>& weymouth() const noexcept { return weymouth_; }

  std::size_t source_output(std::size_t s, int t = 0) const { return at(source_output_, s, t); }
  std::size_t pipe_flow(std::size_t p, int t = 0) const { return at(pipe_flow_, p, t); }
  std::size_t pipe_inflow(std::size_t p, int t = 0) const { return at(pipe_inflow_, p, t); }
  std::size_t pipe_outflow(std::size_t p, int t = 0) const { return at(pipe_outflow_, p, t); }
  std::size_t linepack(std::size_t p, int t = 0) const { return at(linepack_, p, t); }
  std::size_t pressure(std::size_t g, int t = 0) const { return at(pressure_, g, t); }
  std::size_t compressor_flow(std::size_t c, int t = 0) const { return at(compressor_flow_, c, t); }
  std::size_t compressor_consumption(std::size_t c, int t = 0) const { return at(compressor_use_, c, t); }

  /// Initial linepack M_{mn,0} per pipeline (quasi-dynamic only).
  const std::vector<double>& initial_linepack() const noexcept { return initial_linepack_; }

  double objective_value(std::span<const double> x) const;

 private:
  friend ProblemInstance build_steady_state(const GasNetwork&, const Scenario&);
  friend ProblemInstance build_quasi_dynamic(const GasNetwork&, const Scenario&);
  friend class InstanceBuilder;

  ProblemInstance(const GasNetwork& network, Scenario scenario, bool quasi_dynamic);

  using IndexTable = std::vector<std::vector<std::size_t>>;  // [slot][element]
  static std::size_t at(const IndexTable& table, std::size_t element, int t);

  GasNetwork network_;
  Scenario scenario_;
  int horizon_;
  bool quasi_dynamic_;

  std::vector<Variable> variables_;
  std::vector<double> objective_;
  std::vector<LinearRow> rows_;
  std::vector<WeymouthRecord> weymouth_;
  std::vector<double> initial_linepack_;

  IndexTable source_output_, pipe_flow_, pipe_inflow_, pipe_outflow_, linepack_, pressure_, compressor_flow_,
      compressor_use_;
};

/// Single-period model: cost, bounds, compressor rows, nodal balance and one
/// Weymouth record per pipeline. Requires a steady-state scenario.
ProblemInstance build_steady_state(const GasNetwork& network, const Scenario& scenario);

/// Multi-period model with linepack. Requires horizon >= 2 and an initial
/// linepack value for every pipeline.
ProblemInstance build_quasi_dynamic(const GasNetwork& network, const Scenario& scenario);

/// Dispatches on scenario horizon.
ProblemInstance build_instance(const GasNetwork& network, const Scenario& scenario);

struct SolutionVector {
  std::vector<double> values;
  double objective = 0.0;
};

struct ResidualEntry {
  std::string label;
  double residual;
};

struct FeasibilityReport {
  double max_weymouth_violation = 0.0;  // xi
  double max_linear_residual = 0.0;
  std::vector<double> weymouth_violation;  // per Weymouth record
  std::vector<ResidualEntry> residuals;    // every row and bound, in instance order
};

inline constexpr double kDefaultFlowFloor = 1e-6;

/// Per-record Weymouth violation: |C sqrt|pi_m^2 - pi_n^2| / |F| - 1| above the
/// flow floor (1 + ratio when flow and pressure drop disagree in sign); below
/// it, |F|F| - C^2 (pi_m^2 - pi_n^2)| / (C^2 pi_max,m^2).
double weymouth_violation(const WeymouthRecord& record, std::span<const double> x,
                          double flow_floor = kDefaultFlowFloor);

FeasibilityReport evaluate_solution(const ProblemInstance& instance, const SolutionVector& x,
                                    double flow_floor = kDefaultFlowFloor);

std::string solution_to_csv(const ProblemInstance& instance, const SolutionVector& x);
std::string solution_to_json(const ProblemInstance& instance, const SolutionVector& x);
std::string report_to_json(const FeasibilityReport& report);

}  // namespace ogf

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ogf/ann.hpp"
#include "ogf/ccp.hpp"
#include "ogf/model.hpp"
#include "ogf/network.hpp"

namespace ogf {

/// Runs fn(i) for i in [0, count) on `workers` threads. Results must be
/// written by index so the outcome does not depend on scheduling. The first
/// exception thrown by any task is rethrown after all workers stop.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

struct PresolveConfig {
  int restarts = 3;  // cold starts per scenario
  std::uint64_t seed = 1;
  int workers = 1;
  CcpConfig ccp;
};

struct PresolveOutcome {
  bool converged = false;
  CcpResult best;  // lowest objective among converged restarts
  int converged_restarts = 0;
};

/// Seed of cold restart `restart`. Shared by all scenarios: the optimal
/// pressures are not unique, and a common start keeps the presolved targets a
/// smooth function of the loads.
std::uint64_t cold_seed(std::uint64_t seed, int restart);

/// Per-scenario cold start seed, used where independent starts are wanted
/// (benchmark and single solves).
std::uint64_t scenario_cold_seed(std::uint64_t seed, int scenario_id, int restart);

/// Multi-start cold CCP keeping the cheapest converged run.
PresolveOutcome presolve(const ProblemInstance& instance, const PresolveConfig& config);

/// Fills missing initial linepack on multi-period scenarios with the values
/// implied by a presolved nominal (all loads at base) steady state.
void fill_initial_linepack(const GasNetwork& network, std::vector<Scenario>& scenarios, const PresolveConfig& config);

/// Presolves every scenario; rows keep scenario order, failures are dropped
/// and counted. Throws Error when no scenario converges.
Dataset build_training_set(const GasNetwork& network, const std::vector<Scenario>& scenarios,
                           const PresolveConfig& config);

struct RefineResult {
  CcpResult result;
  int rounds = 0;  // warm restarts whose result was accepted
};

/// Repeats CCP warm-started from the incumbent's own pressures while each
/// round lowers the objective by more than `relative_tolerance`. A converged
/// CCP run stops as soon as xi < zeta0, which can leave it well short of a
/// stationary point; this walks it the rest of the way. Failed rounds end the
/// loop and keep the incumbent.
RefineResult refine_by_warm_restarts(const ProblemInstance& instance, CcpResult start, const CcpConfig& config,
                                     int max_rounds = 500, double relative_tolerance = 1e-7);

struct OracleResult {
  double objective = 0.0;
  std::vector<double> pressures;  // per node
  std::vector<double> source_outputs;
  std::vector<double> pipe_flows;
  std::vector<double> compressor_flows;
  double resolution = 0.0;
  std::size_t evaluations = 0;
};

/// Grid search over the free pressures (the slack-source node and the far side
/// of every compressor) and the non-slack source outputs of a tree network
/// with at most three such degrees of freedom; flows follow from balance and
/// the remaining pressures from the Weymouth relation. Throws Error when the
/// network is not a small tree or no grid point is feasible.
OracleResult brute_force_oracle(const GasNetwork& network, const Scenario& scenario, double resolution = 1e-3);

/// True when the network is a tree with few enough degrees of freedom for the oracle.
bool oracle_supported(const GasNetwork& network);

/// Oracle point as a full solution vector of a steady-state instance.
SolutionVector oracle_solution(const ProblemInstance& instance, const OracleResult& oracle);

enum class Method { cold_ccp, warm_ccp, oracle };

const char* to_string(Method method);
Method parse_method(std::string_view text);

struct BenchmarkConfig {
  std::vector<Method> methods{Method::cold_ccp, Method::warm_ccp};
  CcpConfig ccp;
  std::uint64_t seed = 1;  // cold-start seeds derive from it
  int baseline_restarts = 3;  // extra cold restarts defining the best-known objective
  int workers = 1;
  double oracle_resolution = 1e-3;
};

struct MethodRun {
  Method method = Method::cold_ccp;
  std::string status;  // CcpStatus text, "optimal" for the oracle, or "error"
  bool converged = false;
  int iterations = 0;
  double objective = 0.0;
  double xi = 0.0;  // recomputed by evaluate_solution
  double max_linear_residual = 0.0;
  double wall_seconds = 0.0;
  double gap = 0.0;  // relative to the baseline objective
  std::string message;
};

struct ScenarioRecord {
  int scenario_id = 0;
  std::string baseline;  // "oracle" or "best-known"
  double baseline_objective = 0.0;
  std::vector<MethodRun> runs;  // one per configured method, same order
};

struct MethodSummary {
  Method method = Method::cold_ccp;
  int runs = 0;
  int converged = 0;
  double mean_wall_seconds = 0.0;
  double mean_iterations = 0.0;
  double mean_gap = 0.0;  // over converged runs
  double mean_xi = 0.0;   // over converged runs
  double max_xi = 0.0;
};

struct BenchmarkReport {
  std::string network;
  int horizon = 1;
  BenchmarkConfig config;
  std::vector<ScenarioRecord> scenarios;
  std::vector<MethodSummary> summary;
};

/// Solves every scenario with each method. `model` is required for warm-ccp.
/// Numbers other than wall time are independent of `workers`.
BenchmarkReport run_benchmark(const GasNetwork& network, const std::vector<Scenario>& scenarios,
                              const BenchmarkConfig& config, const PressureModel* model = nullptr);

/// JSON report; `include_timing = false` zeroes wall times for byte-stable output.
std::string report_to_json(const BenchmarkReport& report, bool include_timing = true);
std::string report_to_csv(const BenchmarkReport& report, bool include_timing = true);

}  // namespace ogf

#include "ogf/ccp.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "ogf/error.hpp"
#include "ogf/random.hpp"

namespace ogf {

void CcpConfig::validate() const {
  if (!(zeta0 > 0.0)) throw ValidationError("zeta0", "stop threshold must be positive");
  if (!(tau1 > 0.0)) throw ValidationError("tau1", "initial penalty must be positive");
  if (!(kappa > 1.0)) throw ValidationError("kappa", "penalty growth factor must exceed 1");
  if (!(tau_max >= tau1)) throw ValidationError("tau_max", "penalty cap must be at least the initial penalty");
  if (max_iterations < 1) throw ValidationError("max_iterations", "at least one iteration is required");
  if (!(flow_floor > 0.0)) throw ValidationError("flow_floor", "flow floor must be positive");
  if (!(solver_tolerance > 0.0)) throw ValidationError("solver_tolerance", "solver tolerance must be positive");
}

double CcpConfig::tau_at(int iteration) const {
  return std::min(tau1 * std::pow(kappa, iteration - 1), tau_max);
}

CcpConfig parse_ccp_config(std::string_view json_text, CcpConfig base) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("config: expected a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!value.is_number()) throw ParseError("config: '" + key + "' must be a number");
    if (key == "zeta0") {
      base.zeta0 = value.get<double>();
    } else if (key == "tau1") {
      base.tau1 = value.get<double>();
    } else if (key == "tau_max") {
      base.tau_max = value.get<double>();
    } else if (key == "kappa") {
      base.kappa = value.get<double>();
    } else if (key == "max_iterations") {
      base.max_iterations = value.get<int>();
    } else if (key == "flow_floor") {
      base.flow_floor = value.get<double>();
    } else if (key == "solver_tolerance") {
      base.solver_tolerance = value.get<double>();
    } else {
      throw ParseError("config: unknown key '" + key + "'");
    }
  }
  base.validate();
  return base;
}

std::string ccp_config_to_json(const CcpConfig& c) {
  nlohmann::ordered_json doc{{"zeta0", c.zeta0},
                             {"tau1", c.tau1},
                             {"tau_max", c.tau_max},
                             {"kappa", c.kappa},
                             {"max_iterations", c.max_iterations},
                             {"flow_floor", c.flow_floor},
                             {"solver_tolerance", c.solver_tolerance}};
  return doc.dump();
}

const char* to_string(CcpStatus status) {
  switch (status) {
    case CcpStatus::converged: return "converged";
    case CcpStatus::iteration_limit: return "iteration-limit";
    case CcpStatus::subproblem_failed: return "subproblem-failed";
  }
  return "unknown";
}

std::string ccp_result_to_json(const ProblemInstance& instance, const CcpResult& r) {
  nlohmann::ordered_json doc;
  doc["status"] = to_string(r.status);
  doc["iterations"] = r.iterations;
  doc["objective"] = r.solution.objective;
  doc["xi"] = r.final_xi;
  doc["max_linear_residual"] = r.max_linear_residual;
  if (r.status == CcpStatus::subproblem_failed) {
    doc["failed_iteration"] = r.failed_iteration;
    doc["failure"] = r.failure;
  }
  nlohmann::ordered_json trace = nlohmann::ordered_json::array();
  for (const IterationRecord& it : r.trace) {
    trace.push_back({{"tau", it.tau},
                     {"xi", it.xi},
                     {"objective", it.objective},
                     {"penalty", it.penalty},
                     {"max_slack", it.max_slack},
                     {"solver_iterations", it.solver_iterations}});
  }
  doc["trace"] = std::move(trace);
  nlohmann::ordered_json suspects = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < r.direction_suspect.size(); ++k) {
    if (r.direction_suspect[k]) {
      const WeymouthRecord& rec = instance.weymouth()[k];
      suspects.push_back({{"pipeline", instance.network().pipelines()[rec.pipeline].id}, {"slot", rec.slot + 1}});
    }
  }
  doc["direction_suspect"] = std::move(suspects);
  if (!r.solution.values.empty()) {
    nlohmann::ordered_json values = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < r.solution.values.size(); ++i) {
      values[instance.variables()[i].name] = r.solution.values[i];
    }
    doc["solution"] = std::move(values);
  }
  return doc.dump(2) + "\n";
}

namespace {

double weymouth_flow(double coefficient, double high, double low) {
  return coefficient * std::sqrt(std::max(high * high - low * low, 0.0));
}

}  // namespace

LinearizationPoint warm_start_from_pressures(const ProblemInstance& instance, const PressureProfile& predicted) {
  const GasNetwork& net = instance.network();
  if (predicted.size() != static_cast<std::size_t>(instance.horizon())) {
    throw DimensionError("pressure prediction covers " + std::to_string(predicted.size()) + " slots, instance has " +
                         std::to_string(instance.horizon()));
  }
  PressureProfile clamped = predicted;
  for (auto& slot : clamped) {
    if (slot.size() != net.node_count()) throw DimensionError("pressure prediction does not cover every node");
    for (std::size_t g = 0; g < slot.size(); ++g) {
      if (!std::isfinite(slot[g])) throw ValidationError(net.nodes()[g].id, "non-finite pressure prediction");
      slot[g] = std::clamp(slot[g], net.nodes()[g].pi_min, net.nodes()[g].pi_max);
    }
  }
  LinearizationPoint point;
  for (const WeymouthRecord& rec : instance.weymouth()) {
    const std::size_t m = net.pipeline_from(rec.pipeline);
    const std::size_t n = net.pipeline_to(rec.pipeline);
    const auto& slot = clamped[static_cast<std::size_t>(rec.slot)];
    LinearizationEntry e;
    e.pressure_from = slot[m];
    e.pressure_to = slot[n];
    if (slot[m] > slot[n]) {
      e.orientation = 1;
    } else if (slot[n] > slot[m]) {
      e.orientation = -1;
    } else {
      e.orientation = m < n ? 1 : -1;
      e.low_confidence = true;
    }
    e.flow = weymouth_flow(rec.coefficient, e.pressure_high(), e.pressure_low());
    point.entries.push_back(e);
  }
  return point;
}

LinearizationPoint cold_start(const ProblemInstance& instance, std::uint64_t seed) {
  const GasNetwork& net = instance.network();
  Rng rng(seed);
  PressureProfile sampled(static_cast<std::size_t>(instance.horizon()));
  for (auto& slot : sampled) {
    for (const NodeSpec& node : net.nodes()) slot.push_back(uniform(rng, node.pi_min, node.pi_max));
  }
  LinearizationPoint point;
  for (const WeymouthRecord& rec : instance.weymouth()) {
    const auto& slot = sampled[static_cast<std::size_t>(rec.slot)];
    LinearizationEntry e;
    e.pressure_from = slot[net.pipeline_from(rec.pipeline)];
    e.pressure_to = slot[net.pipeline_to(rec.pipeline)];
    e.orientation = 1;
    e.flow = weymouth_flow(rec.coefficient, e.pressure_from, e.pressure_to);
    point.entries.push_back(e);
  }
  return point;
}

PressureProfile pressures_of(const ProblemInstance& instance, const SolutionVector& x) {
  PressureProfile out(static_cast<std::size_t>(instance.horizon()));
  for (int t = 0; t < instance.horizon(); ++t) {
    for (std::size_t g = 0; g < instance.network().node_count(); ++g) {
      out[static_cast<std::size_t>(t)].push_back(x.values.at(instance.pressure(g, t)));
    }
  }
  return out;
}

CcpResult run_ccp(const ProblemInstance& instance, const LinearizationPoint& start, const CcpConfig& config) {
  config.validate();
  if (start.entries.size() != instance.weymouth().size()) {
    throw DimensionError("linearization point does not cover every pipeline");
  }
  SolverSettings settings;
  settings.tolerance = config.solver_tolerance;

  CcpResult result;
  LinearizationPoint point = start;
  const std::size_t n = instance.variable_count();
  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    const double tau = config.tau_at(iter);
    const Subproblem sub = assemble_subproblem(instance, point, tau);
    const ConicSolution sol = solve(sub.program, settings);
    result.iterations = iter;
    if (sol.status != SolveStatus::optimal && sol.status != SolveStatus::inaccurate) {
      result.status = CcpStatus::subproblem_failed;
      result.failed_iteration = iter;
      result.failure = std::string("subproblem ") + to_string(sol.status);
      return result;
    }

    SolutionVector x;
    x.values.assign(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(n));
    x.objective = instance.objective_value(x.values);
    const FeasibilityReport report = evaluate_solution(instance, x, config.flow_floor);

    IterationRecord rec;
    rec.tau = tau;
    rec.xi = report.max_weymouth_violation;
    rec.objective = x.objective;
    for (std::size_t s : sub.slack) {
      rec.penalty += tau * sol.x[s];
      rec.max_slack = std::max(rec.max_slack, sol.x[s]);
    }
    rec.solver_iterations = sol.iterations;
    result.trace.push_back(rec);
    result.solution = x;
    result.final_xi = report.max_weymouth_violation;
    result.max_linear_residual = report.max_linear_residual;

    if (sol.status == SolveStatus::inaccurate && report.max_linear_residual >= kLinearResidualLimit) {
      result.status = CcpStatus::subproblem_failed;
      result.failed_iteration = iter;
      result.failure = "subproblem inaccurate beyond linear residual limit";
      return result;
    }
    if (report.max_weymouth_violation < config.zeta0) {
      result.status = CcpStatus::converged;
      break;
    }
    for (std::size_t k = 0; k < point.entries.size(); ++k) {
      const WeymouthRecord& w = instance.weymouth()[k];
      LinearizationEntry& e = point.entries[k];
      e.pressure_from = x.values[w.pressure_from];
      e.pressure_to = x.values[w.pressure_to];
      e.flow = weymouth_flow(w.coefficient, e.pressure_high(), e.pressure_low());
    }
  }

  result.direction_suspect.assign(instance.weymouth().size(), false);
  if (result.status == CcpStatus::converged) {
    for (std::size_t k = 0; k < instance.weymouth().size(); ++k) {
      const WeymouthRecord& w = instance.weymouth()[k];
      const LinearizationEntry& e = point.entries[k];
      const double f = std::abs(result.solution.values[w.flow]);
      const double hi = result.solution.values[e.orientation > 0 ? w.pressure_from : w.pressure_to];
      const double lo = result.solution.values[e.orientation > 0 ? w.pressure_to : w.pressure_from];
      const double f_max = instance.variables()[w.flow].upper;
      if (f <= std::max(config.flow_floor, 1e-6 * f_max) && hi - lo > 1e-4 * std::max(hi, 1.0)) {
        result.direction_suspect[k] = true;
      }
    }
  }
  return result;
}

}  // namespace ogf

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "ogf/error.hpp"
#include "ogf/pipeline.hpp"
#include "ogf/text.hpp"

namespace ogf {

const char* to_string(Method method) {
  switch (method) {
    case Method::cold_ccp:
      return "cold-ccp";
    case Method::warm_ccp:
      return "warm-ccp";
    case Method::oracle:
      return "oracle";
  }
  return "unknown";
}

Method parse_method(std::string_view text) {
  for (Method m : {Method::cold_ccp, Method::warm_ccp, Method::oracle}) {
    if (text == to_string(m)) return m;
  }
  throw ValidationError("method", "unknown method '" + std::string(text) + "' (cold-ccp, warm-ccp, oracle)");
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void record_ccp(MethodRun& run, const ProblemInstance& instance, const CcpResult& result, const CcpConfig& config) {
  run.status = to_string(result.status);
  run.converged = result.status == CcpStatus::converged;
  run.iterations = result.iterations;
  run.message = result.failure;
  if (result.solution.values.size() != instance.variable_count()) return;
  const FeasibilityReport report = evaluate_solution(instance, result.solution, config.flow_floor);
  run.objective = instance.objective_value(result.solution.values);
  run.xi = report.max_weymouth_violation;
  run.max_linear_residual = report.max_linear_residual;
}

struct ScenarioWork {
  ScenarioRecord record;
  std::optional<double> oracle_objective;
  std::optional<double> best_known;
};

ScenarioWork run_scenario(const GasNetwork& network, const Scenario& scenario, const BenchmarkConfig& config,
                          const PressureModel* model, bool tiny) {
  ScenarioWork work;
  work.record.scenario_id = scenario.id;
  const ProblemInstance instance = build_instance(network, scenario);
  std::optional<OracleResult> oracle;
  std::string oracle_error;
  if (tiny) {
    try {
      oracle = brute_force_oracle(network, scenario, config.oracle_resolution);
    } catch (const Error& e) {
      oracle_error = e.what();
    }
  }

  auto note_best = [&](const MethodRun& run) {
    if (run.converged && (!work.best_known || run.objective < *work.best_known)) work.best_known = run.objective;
  };

  for (Method method : config.methods) {
    MethodRun run;
    run.method = method;
    const auto start = Clock::now();
    try {
      if (method == Method::oracle) {
        if (!tiny) throw Error("network too large for the grid oracle");
        if (!oracle) throw Error(oracle_error);
        const SolutionVector x = oracle_solution(instance, *oracle);
        const FeasibilityReport report = evaluate_solution(instance, x, config.ccp.flow_floor);
        run.status = "optimal";
        run.converged = true;
        run.objective = oracle->objective;
        run.xi = report.max_weymouth_violation;
        run.max_linear_residual = report.max_linear_residual;
      } else {
        LinearizationPoint start_point;
        if (method == Method::warm_ccp) {
          if (model == nullptr) throw Error("warm-ccp requires a trained model");
          start_point = warm_start_from_pressures(instance, model->predict_profile(scenario));
        } else {
          start_point = cold_start(instance, scenario_cold_seed(config.seed, scenario.id, 0));
        }
        record_ccp(run, instance, run_ccp(instance, start_point, config.ccp), config.ccp);
        note_best(run);
      }
    } catch (const Error& e) {
      run.status = "error";
      run.converged = false;
      run.message = e.what();
    }
    run.wall_seconds = seconds_since(start);
    work.record.runs.push_back(std::move(run));
  }

  if (oracle) {
    work.oracle_objective = oracle->objective;
  } else {
    // Restart 0 is the cold-ccp run itself; the baseline adds restarts 1..k.
    for (int k = 1; k <= config.baseline_restarts; ++k) {
      MethodRun extra;
      try {
        record_ccp(extra, instance,
                   run_ccp(instance, cold_start(instance, scenario_cold_seed(config.seed, scenario.id, k)), config.ccp),
                   config.ccp);
      } catch (const Error&) {
        continue;
      }
      note_best(extra);
    }
  }
  return work;
}

}  // namespace

BenchmarkReport run_benchmark(const GasNetwork& network, const std::vector<Scenario>& scenarios,
                              const BenchmarkConfig& config, const PressureModel* model) {
  config.ccp.validate();
  if (config.methods.empty()) throw ValidationError("methods", "no benchmark methods selected");
  if (scenarios.empty()) throw ValidationError("scenarios", "no scenarios to benchmark");
  if (config.baseline_restarts < 0) throw ValidationError("baseline_restarts", "must be >= 0");
  const bool wants_warm = std::find(config.methods.begin(), config.methods.end(), Method::warm_ccp) != config.methods.end();
  if (wants_warm && model == nullptr) throw Error("warm-ccp requires a trained model file");
  const int horizon = scenarios.front().horizon();
  if (model != nullptr && (model->nodes() != static_cast<int>(network.node_count()) || model->horizon() != horizon)) {
    throw DimensionError("model shape does not match the network and scenario horizon");
  }
  const bool tiny = horizon == 1 && oracle_supported(network);

  std::vector<ScenarioWork> work(scenarios.size());
  parallel_for(scenarios.size(), config.workers,
               [&](std::size_t i) { work[i] = run_scenario(network, scenarios[i], config, model, tiny); });

  BenchmarkReport report;
  report.network = network.name();
  report.horizon = horizon;
  report.config = config;
  for (ScenarioWork& w : work) {
    ScenarioRecord& rec = w.record;
    if (w.oracle_objective) {
      rec.baseline = "oracle";
      rec.baseline_objective = *w.oracle_objective;
    } else if (w.best_known) {
      rec.baseline = "best-known";
      rec.baseline_objective = *w.best_known;
    } else {
      rec.baseline = "none";
    }
    for (MethodRun& run : rec.runs) {
      if (run.converged && rec.baseline != "none") {
        run.gap = (run.objective - rec.baseline_objective) / std::max(std::abs(rec.baseline_objective), 1e-12);
      }
    }
    report.scenarios.push_back(std::move(rec));
  }

  for (std::size_t m = 0; m < config.methods.size(); ++m) {
    MethodSummary s;
    s.method = config.methods[m];
    double wall = 0.0;
    double iterations = 0.0;
    for (const ScenarioRecord& rec : report.scenarios) {
      const MethodRun& run = rec.runs[m];
      ++s.runs;
      wall += run.wall_seconds;
      iterations += run.iterations;
      if (!run.converged) continue;
      ++s.converged;
      s.mean_gap += run.gap;
      s.mean_xi += run.xi;
      s.max_xi = std::max(s.max_xi, run.xi);
    }
    s.mean_wall_seconds = wall / s.runs;
    s.mean_iterations = iterations / s.runs;
    if (s.converged > 0) {
      s.mean_gap /= s.converged;
      s.mean_xi /= s.converged;
    }
    report.summary.push_back(s);
  }
  return report;
}

std::string report_to_json(const BenchmarkReport& report, bool include_timing) {
  using Json = nlohmann::ordered_json;
  auto timing = [&](double v) { return include_timing ? v : 0.0; };
  Json methods = Json::array();
  for (Method m : report.config.methods) methods.push_back(to_string(m));
  Json doc;
  doc["network"] = report.network;
  doc["horizon"] = report.horizon;
  doc["config"] = {{"methods", methods},
                   {"seed", report.config.seed},
                   {"baseline_restarts", report.config.baseline_restarts},
                   {"oracle_resolution", report.config.oracle_resolution},
                   {"ccp", Json::parse(ccp_config_to_json(report.config.ccp))}};
  Json summary = Json::array();
  for (const MethodSummary& s : report.summary) {
    summary.push_back({{"method", to_string(s.method)},
                       {"runs", s.runs},
                       {"converged", s.converged},
                       {"mean_wall_seconds", timing(s.mean_wall_seconds)},
                       {"mean_iterations", s.mean_iterations},
                       {"mean_gap", s.mean_gap},
                       {"mean_xi", s.mean_xi},
                       {"max_xi", s.max_xi}});
  }
  doc["summary"] = summary;
  Json rows = Json::array();
  for (const ScenarioRecord& rec : report.scenarios) {
    Json runs = Json::array();
    for (const MethodRun& run : rec.runs) {
      runs.push_back({{"method", to_string(run.method)},
                      {"status", run.status},
                      {"converged", run.converged},
                      {"iterations", run.iterations},
                      {"objective", run.objective},
                      {"xi", run.xi},
                      {"max_linear_residual", run.max_linear_residual},
                      {"wall_seconds", timing(run.wall_seconds)},
                      {"gap", run.gap},
                      {"message", run.message}});
    }
    rows.push_back({{"scenario_id", rec.scenario_id},
                    {"baseline", rec.baseline},
                    {"baseline_objective", rec.baseline_objective},
                    {"runs", runs}});
  }
  doc["scenarios"] = rows;
  return doc.dump(2) + "\n";
}

std::string report_to_csv(const BenchmarkReport& report, bool include_timing) {
  std::ostringstream out;
  out << "scenario_id,method,status,converged,iterations,objective,xi,max_linear_residual,wall_seconds,gap,baseline\n";
  for (const ScenarioRecord& rec : report.scenarios) {
    for (const MethodRun& run : rec.runs) {
      out << rec.scenario_id << ',' << to_string(run.method) << ',' << run.status << ',' << (run.converged ? 1 : 0)
          << ',' << run.iterations << ',' << format_double(run.objective) << ',' << format_double(run.xi) << ','
          << format_double(run.max_linear_residual) << ','
          << format_double(include_timing ? run.wall_seconds : 0.0) << ',' << format_double(run.gap) << ','
          << rec.baseline << '\n';
    }
  }
  return out.str();
}

}  // namespace ogf

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "ogf/error.hpp"
#include "ogf/pipeline.hpp"
#include "ogf/random.hpp"

namespace ogf {

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  if (workers < 1) throw ValidationError("workers", "worker count must be >= 1");
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    while (!failed.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
  for (std::thread& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::uint64_t cold_seed(std::uint64_t seed, int restart) {
  return derive_seed(seed, static_cast<std::uint64_t>(restart));
}

std::uint64_t scenario_cold_seed(std::uint64_t seed, int scenario_id, int restart) {
  return derive_seed(cold_seed(seed, restart), static_cast<std::uint64_t>(scenario_id));
}

PresolveOutcome presolve(const ProblemInstance& instance, const PresolveConfig& config) {
  if (config.restarts < 1) throw ValidationError("restarts", "presolve needs at least one restart");
  PresolveOutcome out;
  for (int k = 0; k < config.restarts; ++k) {
    CcpResult r = run_ccp(instance, cold_start(instance, cold_seed(config.seed, k)), config.ccp);
    if (r.status != CcpStatus::converged) continue;
    ++out.converged_restarts;
    // Strict comparison keeps the earliest restart on ties.
    if (!out.converged || r.solution.objective < out.best.solution.objective) {
      out.best = std::move(r);
      out.converged = true;
    }
  }
  return out;
}

RefineResult refine_by_warm_restarts(const ProblemInstance& instance, CcpResult start, const CcpConfig& config,
                                     int max_rounds, double relative_tolerance) {
  if (start.status != CcpStatus::converged) throw Error("refinement needs a converged starting run");
  RefineResult out{std::move(start), 0};
  for (int round = 0; round < max_rounds; ++round) {
    CcpResult next = run_ccp(instance, warm_start_from_pressures(instance, pressures_of(instance, out.result.solution)), config);
    if (next.status != CcpStatus::converged) break;
    const double gain = out.result.solution.objective - next.solution.objective;
    if (gain <= relative_tolerance * std::abs(out.result.solution.objective)) break;
    out.result = std::move(next);
    ++out.rounds;
  }
  return out;
}

void fill_initial_linepack(const GasNetwork& network, std::vector<Scenario>& scenarios, const PresolveConfig& config) {
  const bool needed = std::any_of(scenarios.begin(), scenarios.end(), [&](const Scenario& s) {
    return s.horizon() >= 2 && s.initial_linepack.size() < network.pipelines().size();
  });
  if (!needed) return;
  const ProblemInstance nominal = build_steady_state(network, nominal_scenario(network, 1, 0));
  const PresolveOutcome base = presolve(nominal, config);
  if (!base.converged) throw Error("nominal steady state did not converge; cannot derive initial linepack");
  const auto& x = base.best.solution.values;
  for (Scenario& s : scenarios) {
    if (s.horizon() < 2) continue;
    for (std::size_t p = 0; p < network.pipelines().size(); ++p) {
      const PipelineSpec& pipe = network.pipelines()[p];
      if (s.initial_linepack.count(pipe.id)) continue;
      const double pm = x[nominal.pressure(network.pipeline_from(p))];
      const double pn = x[nominal.pressure(network.pipeline_to(p))];
      s.initial_linepack[pipe.id] = pipe.linepack_coefficient * 0.5 * (pm + pn);
    }
  }
}

Dataset build_training_set(const GasNetwork& network, const std::vector<Scenario>& scenarios,
                           const PresolveConfig& config) {
  if (scenarios.empty()) throw ValidationError("scenarios", "no scenarios to presolve");
  const int horizon = scenarios.front().horizon();
  for (const Scenario& s : scenarios) {
    if (s.horizon() != horizon) throw DimensionError("all training scenarios must share one horizon");
  }
  std::vector<PresolveOutcome> outcomes(scenarios.size());
  parallel_for(scenarios.size(), config.workers, [&](std::size_t i) {
    outcomes[i] = presolve(build_instance(network, scenarios[i]), config);
  });

  Dataset data;
  data.nodes = static_cast<int>(network.node_count());
  data.horizon = horizon;
  const auto width = static_cast<Eigen::Index>(data.nodes) * horizon;
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].converged) {
      kept.push_back(i);
    } else {
      ++data.dropped;
    }
  }
  if (kept.empty()) throw Error("presolve failed for every scenario");
  data.inputs.resize(static_cast<Eigen::Index>(kept.size()), width);
  data.targets.resize(static_cast<Eigen::Index>(kept.size()), width);
  for (std::size_t r = 0; r < kept.size(); ++r) {
    const Scenario& s = scenarios[kept[r]];
    const ProblemInstance instance = build_instance(network, s);
    const PressureProfile p = pressures_of(instance, outcomes[kept[r]].best.solution);
    const auto row = static_cast<Eigen::Index>(r);
    data.inputs.row(row) = flatten_loads(s).transpose();
    for (int t = 0; t < horizon; ++t) {
      for (int g = 0; g < data.nodes; ++g) {
        data.targets(row, static_cast<Eigen::Index>(t) * data.nodes + g) =
            p[static_cast<std::size_t>(t)][static_cast<std::size_t>(g)];
      }
    }
    data.scenario_ids.push_back(s.id);
    data.objectives.push_back(outcomes[kept[r]].best.solution.objective);
  }
  return data;
}

}  // namespace ogf

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ogf/ann.hpp"
#include "ogf/ccp.hpp"
#include "ogf/conic.hpp"
#include "ogf/pipeline.hpp"
#include "ogf/random.hpp"
#include "ogf/subproblem.hpp"
#include "ogf/synthetic.hpp"
#include "ogf/text.hpp"

namespace fs = std::filesystem;
using namespace ogf;

namespace {

constexpr std::uint64_t kSampleSeed = 11;
constexpr std::uint64_t kSplitSeed = 3;
constexpr std::uint64_t kBenchSeed = 99;

struct Outcome {
  bool pass = true;
  std::string detail;
};

void report(int number, const char* title, const Outcome& o) {
  std::cout << "criterion " << number << " (" << title << "): " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail
            << std::endl;
}

std::string num(double v, int precision = 4) {
  std::ostringstream out;
  out.precision(precision);
  out << v;
  return out.str();
}

double elapsed(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

struct Trained {
  PressureModel model;
  double mae = 0.0;
  double dummy_mae = 0.0;
  std::size_t rows = 0;
  int dropped = 0;
};

Trained train_on(const GasNetwork& net, int scenarios) {
  PresolveConfig pc;
  pc.restarts = 1;
  Dataset d = build_training_set(net, sample_scenarios(net, scenarios, 0.1, 1, kSampleSeed), pc);
  split_dataset(d, 0.2, kSplitSeed);
  Trained t;
  t.model = fit_pressure_model(d, {}, TrainConfig{}).model;
  t.mae = evaluate_mae([&](const Eigen::VectorXd& x) { return t.model.predict(x); }, d).average;
  t.dummy_mae = evaluate_mae(dummy_mean_predictor(net), d).average;
  t.rows = d.size();
  t.dropped = d.dropped;
  return t;
}

const MethodSummary& summary_of(const BenchmarkReport& r, Method m) {
  for (const MethodSummary& s : r.summary) {
    if (s.method == m) return s;
  }
  throw Error("method missing from report");
}

// ---- criterion 1 -----------------------------------------------------------

Outcome feasibility(const std::vector<const BenchmarkReport*>& reports) {
  int checked = 0;
  int bad = 0;
  double worst_xi = 0.0;
  double worst_lin = 0.0;
  for (const BenchmarkReport* r : reports) {
    for (const ScenarioRecord& s : r->scenarios) {
      for (const MethodRun& run : s.runs) {
        if (run.method == Method::oracle || !run.converged) continue;
        ++checked;
        worst_xi = std::max(worst_xi, run.xi);
        worst_lin = std::max(worst_lin, run.max_linear_residual);
        if (!(run.xi < 1e-3) || !(run.max_linear_residual < 1e-6)) ++bad;
      }
    }
  }
  return {checked >= 200 && bad == 0, std::to_string(checked) + " converged runs, " + std::to_string(bad) +
                                          " violating; max xi " + num(worst_xi) + ", max linear residual " +
                                          num(worst_lin)};
}

// ---- criterion 2 -----------------------------------------------------------

Outcome oracle_optimality(std::vector<BenchmarkReport>& keep) {
  Outcome o;
  for (const GasNetwork& net : {tiny_t1(), tiny_t2()}) {
    const Trained t = train_on(net, 200);
    BenchmarkConfig c;
    c.methods = {Method::cold_ccp, Method::warm_ccp, Method::oracle};
    c.seed = kBenchSeed;
    const BenchmarkReport r = run_benchmark(net, sample_scenarios(net, 20, 0.1, 1, kBenchSeed), c, &t.model);
    double worst = 0.0;
    int missing = 0;
    for (const ScenarioRecord& s : r.scenarios) {
      if (s.baseline != "oracle") ++missing;
      for (const MethodRun& run : s.runs) {
        if (run.method == Method::oracle) continue;
        if (!run.converged) ++missing;
        worst = std::max(worst, std::abs(run.gap));
      }
    }
    const bool ok = missing == 0 && worst <= 5e-3;
    o.pass = o.pass && ok;
    o.detail += net.name() + ": max |gap| " + num(worst) + (missing ? ", " + std::to_string(missing) + " missing" : "") +
                "; ";
    keep.push_back(r);
  }
  return o;
}

// ---- criteria 3 and 4 ------------------------------------------------------

struct NetworkRun {
  Trained trained;
  BenchmarkReport bench;
};

NetworkRun warm_vs_cold(const GasNetwork& net) {
  NetworkRun nr;
  nr.trained = train_on(net, 500);
  BenchmarkConfig c;
  c.methods = {Method::cold_ccp, Method::warm_ccp};
  c.seed = kBenchSeed;
  c.baseline_restarts = 0;
  nr.bench = run_benchmark(net, sample_scenarios(net, 50, 0.1, 1, kBenchSeed), c, &nr.trained.model);
  return nr;
}

Outcome warm_advantage(const NetworkRun& net20, const NetworkRun& net7) {
  const MethodSummary& c20 = summary_of(net20.bench, Method::cold_ccp);
  const MethodSummary& w20 = summary_of(net20.bench, Method::warm_ccp);
  const MethodSummary& w7 = summary_of(net7.bench, Method::warm_ccp);
  const MethodSummary& c7 = summary_of(net7.bench, Method::cold_ccp);
  const bool ok = w20.mean_iterations <= 3.0 && w20.mean_iterations < c20.mean_iterations && w7.mean_iterations <= 1.5;
  return {ok, "net20 warm " + num(w20.mean_iterations) + " vs cold " + num(c20.mean_iterations) + " iterations (" +
                  std::to_string(w20.converged) + "/" + std::to_string(c20.converged) + " converged); net7 warm " +
                  num(w7.mean_iterations) + " vs cold " + num(c7.mean_iterations)};
}

Outcome predictor_quality(const NetworkRun& net20, const NetworkRun& net7) {
  Outcome o;
  for (const auto& [name, nr] : {std::pair<const char*, const NetworkRun*>{"net20", &net20}, {"net7", &net7}}) {
    const Trained& t = nr->trained;
    const double ratio = t.mae / t.dummy_mae;
    o.pass = o.pass && ratio <= 0.5 && t.rows + static_cast<std::size_t>(t.dropped) >= 500;
    o.detail += std::string(name) + ": MAE " + num(t.mae) + " vs dummy " + num(t.dummy_mae) + " (ratio " +
                num(ratio, 3) + ", " + std::to_string(t.rows) + " rows); ";
  }
  return o;
}

// ---- criterion 5 -----------------------------------------------------------

Outcome quasi_dynamic() {
  const GasNetwork net = synthetic_net20();
  constexpr int kSlots = 6;
  const CcpConfig ccp;
  PresolveConfig pc;
  const ProblemInstance ss = build_steady_state(net, nominal_scenario(net));
  const PresolveOutcome pre = presolve(ss, pc);
  if (!pre.converged) return {false, "steady-state presolve did not converge"};
  const CcpResult polished = refine_by_warm_restarts(ss, pre.best, ccp).result;
  const std::vector<double> pi = pressures_of(ss, polished.solution)[0];

  Scenario s = nominal_scenario(net, kSlots);
  for (std::size_t p = 0; p < net.pipelines().size(); ++p) {
    const PipelineSpec& pipe = net.pipelines()[p];
    s.initial_linepack[pipe.id] = pipe.linepack_coefficient * 0.5 * (pi[net.pipeline_from(p)] + pi[net.pipeline_to(p)]);
  }
  const ProblemInstance qd = build_quasi_dynamic(net, s);
  const CcpResult r = run_ccp(qd, warm_start_from_pressures(qd, PressureProfile(kSlots, pi)), ccp);
  if (r.status != CcpStatus::converged) return {false, std::string("quasi-dynamic run ") + to_string(r.status)};
  const std::vector<double>& x = r.solution.values;

  double m0 = 0.0;
  double mt = 0.0;
  double telescoping = 0.0;
  for (std::size_t p = 0; p < net.pipelines().size(); ++p) {
    const double start = qd.initial_linepack()[p];
    m0 += start;
    mt += x[qd.linepack(p, kSlots - 1)];
    double net_inflow = 0.0;
    for (int t = 0; t < kSlots; ++t) net_inflow += x[qd.pipe_inflow(p, t)] - x[qd.pipe_outflow(p, t)];
    telescoping = std::max(telescoping, std::abs(x[qd.linepack(p, kSlots - 1)] - start - net_inflow) /
                                            std::max(1.0, std::abs(start)));
  }
  const double terminal = std::abs(mt - m0) / std::abs(m0);
  const double objective = std::abs(r.solution.objective - kSlots * polished.solution.objective) /
                           std::abs(kSlots * polished.solution.objective);
  const FeasibilityReport rep = evaluate_solution(qd, r.solution);
  const bool ok = terminal <= 1e-6 && telescoping <= 1e-8 && objective <= 1e-4 && rep.max_weymouth_violation < 1e-3 &&
                  rep.max_linear_residual < 1e-6;
  return {ok, "terminal linepack rel " + num(terminal, 3) + ", telescoping " + num(telescoping, 3) +
                  ", objective vs 6 x steady state rel " + num(objective, 3) + ", xi " +
                  num(rep.max_weymouth_violation, 3)};
}

// ---- criterion 6 -----------------------------------------------------------

double gradient_check() {
  Mlp m = Mlp::random({4, 7, 5, 3}, 17);
  for (Layer& l : m.layers()) l.bias.setConstant(0.05);
  Rng rng(2);
  Eigen::VectorXd x(4), t(3);
  for (Eigen::Index i = 0; i < 4; ++i) x(i) = uniform(rng, -1.0, 1.0);
  for (Eigen::Index i = 0; i < 3; ++i) t(i) = uniform(rng, -1.0, 1.0);
  const Gradients g = backward(m, x, t);
  const double h = 1e-6;
  double worst = 0.0;
  auto probe = [&](double& param, double analytic) {
    const double saved = param;
    param = saved + h;
    const double up = sample_loss(m, x, t);
    param = saved - h;
    const double down = sample_loss(m, x, t);
    param = saved;
    const double fd = (up - down) / (2 * h);
    worst = std::max(worst, std::abs(fd - analytic) / std::max(1e-3, std::abs(fd) + std::abs(analytic)));
  };
  for (std::size_t l = 0; l < m.layers().size(); ++l) {
    for (Eigen::Index i = 0; i < m.layers()[l].weights.size(); ++i) {
      probe(m.layers()[l].weights.data()[i], g[l].weights.data()[i]);
    }
    for (Eigen::Index i = 0; i < m.layers()[l].bias.size(); ++i) probe(m.layers()[l].bias(i), g[l].bias(i));
  }
  return worst;
}

double rmsprop_error() {
  std::vector<Layer> params{{Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1)}};
  const Gradients grads{{Eigen::MatrixXd::Constant(1, 1, 1.0), Eigen::VectorXd::Zero(1)}};
  RmspropState state{{Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1)}};
  TrainConfig c;
  c.eta = 0.01;
  c.decay = 0.9;
  c.epsilon = 1e-8;
  rmsprop_step(params, grads, state, c);
  return std::max(std::abs(state[0].weights(0, 0) - 0.1),
                  std::abs(params[0].weights(0, 0) - (-0.01 / std::sqrt(0.1 + 1e-8))));
}

double tangency_residual() {
  Rng rng(21);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    LinearizationEntry e;
    e.orientation = k % 2 ? 1 : -1;
    e.pressure_from = uniform(rng, 1.0, 100.0);
    e.pressure_to = uniform(rng, 1.0, 100.0);
    e.flow = uniform(rng, 0.0, 50.0);
    const double c = uniform(rng, 0.1, 5.0);
    const double lo = e.pressure_low();
    const double exact = lo * lo + e.flow * e.flow / (c * c);
    worst = std::max(worst, std::abs(linearized_lower_bound(e, c, lo, e.flow) - exact) / exact);
  }
  return worst;
}

// Ten random LPs with full KKT checks and ten ball-constrained linear programs
// with closed-form optima.
std::pair<double, int> toy_kkt() {
  double worst = 0.0;
  int failures = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed);
    ConicProgram p;
    Eigen::VectorXd c(3);
    for (int i = 0; i < 3; ++i) {
      c(i) = uniform(rng, -1.0, 1.0);
      p.add_variable("x", -kInfinity, kInfinity, c(i));
    }
    Eigen::MatrixXd g(9, 3);
    Eigen::VectorXd h(9);
    g.setZero();
    for (int i = 0; i < 3; ++i) {
      g(2 * i, i) = 1.0;
      g(2 * i + 1, i) = -1.0;
      h(2 * i) = h(2 * i + 1) = 2.0;
    }
    for (int k = 6; k < 9; ++k) {
      for (int i = 0; i < 3; ++i) g(k, i) = uniform(rng, -1.0, 1.0);
      h(k) = uniform(rng, 0.5, 1.5);
    }
    for (int k = 0; k < 9; ++k) {
      p.add_inequality({{0, g(k, 0)}, {1, g(k, 1)}, {2, g(k, 2)}}, h(k));
    }
    const ConicSolution sol = solve(p);
    if (sol.status != SolveStatus::optimal) {
      ++failures;
      continue;
    }
    const Eigen::Map<const Eigen::VectorXd> x(sol.x.data(), 3);
    const Eigen::Map<const Eigen::VectorXd> z(sol.inequality_duals.data(), 9);
    worst = std::max({worst, (c + g.transpose() * z).lpNorm<Eigen::Infinity>(), (g * x - h).maxCoeff(),
                      -z.minCoeff(), (z.array() * (h - g * x).array()).abs().maxCoeff()});
  }
  Rng rng(99);
  for (int k = 0; k < 10; ++k) {
    ConicProgram p;
    Eigen::Vector3d c, a;
    for (int i = 0; i < 3; ++i) {
      c(i) = uniform(rng, -2.0, 2.0);
      a(i) = uniform(rng, -1.0, 1.0);
      p.add_variable("x", -kInfinity, kInfinity, c(i));
    }
    const double r = uniform(rng, 0.5, 2.0);
    std::vector<AffineExpr> members{{{}, r}};
    for (std::size_t i = 0; i < 3; ++i) members.push_back({{{i, 1.0}}, -a(static_cast<Eigen::Index>(i))});
    p.add_cone(members);
    const ConicSolution sol = solve(p);
    if (sol.status != SolveStatus::optimal ||
        std::abs(sol.objective - (c.dot(a) - r * c.norm())) > 1e-6 * (1.0 + std::abs(sol.objective))) {
      ++failures;
      continue;
    }
    worst = std::max({worst, sol.primal_residual, sol.dual_residual, sol.relative_gap, p.max_violation(sol.x)});
  }
  return {worst, failures};
}

Outcome kernels() {
  const double grad = gradient_check();
  const double rms = rmsprop_error();
  const double tan = tangency_residual();
  const auto [kkt, failures] = toy_kkt();
  const bool ok = grad < 1e-4 && rms <= 1e-10 && tan < 1e-10 && kkt <= 1e-8 && failures == 0;
  return {ok, "gradient rel err " + num(grad, 3) + ", rmsprop err " + num(rms, 3) + ", tangency " + num(tan, 3) +
                  ", toy KKT max " + num(kkt, 3) + " (" + std::to_string(failures) + " of 20 failed)"};
}

// ---- criterion 7 -----------------------------------------------------------

struct Shell {
  int code = -1;
  std::string out;
};

Shell shell(const std::string& args) {
  const std::string cmd = std::string(OGF_CLI) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return {};
  Shell s;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) s.out.append(buf.data(), n);
  const int status = pclose(pipe);
  s.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return s;
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "ogf_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string d = dir.string();
  Outcome o;
  auto check = [&](const std::string& label, const std::string& args) {
    std::vector<Shell> runs;
    for (const char* workers : {"1", "1", "4", "4"}) runs.push_back(shell("--workers " + std::string(workers) + " " + args));
    bool same = runs[0].code == 0 && !runs[0].out.empty();
    for (const Shell& s : runs) same = same && s.code == runs[0].code && s.out == runs[0].out;
    o.pass = o.pass && same;
    o.detail += label + (same ? " identical" : " DIFFERS") + "; ";
  };
  check("sample", "sample --network net7 --count 60 --seed 5");
  if (shell("sample --network net7 --count 60 --seed 5 --out " + d + "/s.csv").code != 0 ||
      shell("presolve --network net7 --scenarios " + d + "/s.csv --restarts 1 --out " + d + "/d.csv").code != 0 ||
      shell("train --dataset " + d + "/d.csv --epochs 60 --seed 4 --out " + d + "/m.txt").code != 0) {
    return {false, "could not prepare CLI inputs"};
  }
  check("train", "train --dataset " + d + "/d.csv --epochs 60 --seed 4");
  check("solve", "solve --network net7 --scenario " + d + "/s.csv --scenario-id 7 --warm " + d + "/m.txt");
  check("bench", "bench --network net7 --scenarios " + d + "/s.csv --model " + d +
                     "/m.txt --methods cold-ccp,warm-ccp --baseline-restarts 1 --no-timing --seed 5");
  fs::remove_all(dir);
  return o;
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::pair<int, std::pair<Outcome, const char*>>> results;
  auto guarded = [&](int number, const char* title, const std::function<Outcome()>& fn) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    while (!o.detail.empty() && (o.detail.back() == ' ' || o.detail.back() == ';')) o.detail.pop_back();
    o.detail += " [" + num(elapsed(t0), 3) + " s]";
    results.push_back({number, {o, title}});
  };

  std::vector<BenchmarkReport> tiny;
  NetworkRun net20;
  NetworkRun net7;
  bool benches_ok = true;
  const auto setup = std::chrono::steady_clock::now();
  try {
    net20 = warm_vs_cold(synthetic_net20());
    net7 = warm_vs_cold(synthetic_net7());
  } catch (const std::exception& e) {
    benches_ok = false;
    std::cout << "benchmark setup failed: " << e.what() << std::endl;
  }
  std::cout << "presolve, training and benchmarks on net20/net7: " << num(elapsed(setup), 3) << " s" << std::endl;

  guarded(2, "oracle optimality on T1/T2", [&] { return oracle_optimality(tiny); });
  guarded(1, "feasibility of converged runs", [&] {
    if (!benches_ok) return Outcome{false, "benchmarks unavailable"};
    std::vector<const BenchmarkReport*> all{&net20.bench, &net7.bench};
    for (const BenchmarkReport& r : tiny) all.push_back(&r);
    return feasibility(all);
  });
  guarded(3, "warm-start advantage", [&] {
    return benches_ok ? warm_advantage(net20, net7) : Outcome{false, "benchmarks unavailable"};
  });
  guarded(4, "predictor quality", [&] {
    return benches_ok ? predictor_quality(net20, net7) : Outcome{false, "benchmarks unavailable"};
  });
  guarded(5, "quasi-dynamic consistency", quasi_dynamic);
  guarded(6, "numerical kernels", kernels);
  guarded(7, "determinism", determinism);

  std::sort(results.begin(), results.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  int failed = 0;
  for (const auto& [n, entry] : results) {
    report(n, entry.second, entry.first);
    failed += entry.first.pass ? 0 : 1;
  }
  std::cout << failed << " of " << results.size() << " criteria failed (" << num(elapsed(start), 4) << " s total)"
            << std::endl;
  return failed == 0 ? 0 : 1;
}

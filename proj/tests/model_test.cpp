#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "ogf/error.hpp"
#include "ogf/model.hpp"
#include "ogf/random.hpp"
#include "ogf/synthetic.hpp"

using namespace ogf;

namespace {

GasNetwork t1_with_linepack() {
  return GasNetwork("T1H", {{"1", 1.0, 10.0, 0.0}, {"2", 1.0, 10.0, 3.0}}, {{"12", "1", "2", 1.0, 10.0, 1.0}}, {},
                    {{"s1", "1", 1.0, 0.0, 10.0}});
}

const LinearRow& row_named(const ProblemInstance& inst, const std::string& label) {
  for (const LinearRow& r : inst.rows()) {
    if (r.label == label) return r;
  }
  throw Error("no row " + label);
}

// Coefficient map var -> coef of one row.
std::map<std::size_t, double> coefs(const LinearRow& r) {
  std::map<std::size_t, double> out;
  for (const LinearTerm& t : r.terms) out[t.var] += t.coef;
  return out;
}

SolutionVector t1_point(const ProblemInstance& inst, double flow) {
  SolutionVector x;
  x.values.assign(inst.variable_count(), 0.0);
  x.values[inst.source_output(0)] = 3.0;
  x.values[inst.pipe_flow(0)] = flow;
  x.values[inst.pressure(0)] = std::sqrt(10.0);
  x.values[inst.pressure(1)] = 1.0;
  x.objective = inst.objective_value(x.values);
  return x;
}

}  // namespace

TEST(Model, SteadyStateT1Structure) {
  const ProblemInstance inst = build_steady_state(tiny_t1(), nominal_scenario(tiny_t1()));
  EXPECT_EQ(inst.variable_count(), 4u);
  EXPECT_FALSE(inst.quasi_dynamic());
  const auto node1 = coefs(row_named(inst, "balance[1]"));
  EXPECT_EQ(node1.at(inst.source_output(0)), 1.0);
  EXPECT_EQ(node1.at(inst.pipe_flow(0)), -1.0);
  EXPECT_EQ(row_named(inst, "balance[1]").rhs, 0.0);
  const auto node2 = coefs(row_named(inst, "balance[2]"));
  EXPECT_EQ(node2.size(), 1u);
  EXPECT_EQ(node2.at(inst.pipe_flow(0)), 1.0);
  EXPECT_EQ(row_named(inst, "balance[2]").rhs, 3.0);
  ASSERT_EQ(inst.weymouth().size(), 1u);
  EXPECT_EQ(inst.objective()[inst.source_output(0)], 1.0);
  for (const Variable& v : inst.variables()) {
    EXPECT_NE(v.kind, VariableKind::linepack);
    EXPECT_NE(v.kind, VariableKind::pipe_inflow);
  }
}

TEST(Model, CompressorBalanceTerms) {
  const GasNetwork net = tiny_t2();
  const ProblemInstance inst = build_steady_state(net, nominal_scenario(net));
  const auto node2 = coefs(row_named(inst, "balance[2]"));
  EXPECT_EQ(node2.at(inst.compressor_flow(0)), -1.0);
  EXPECT_EQ(node2.at(inst.compressor_consumption(0)), -1.0);
  const auto node3 = coefs(row_named(inst, "balance[3]"));
  EXPECT_EQ(node3.at(inst.compressor_flow(0)), 1.0);
  EXPECT_EQ(node3.count(inst.compressor_consumption(0)), 0u);
  const auto usage = coefs(row_named(inst, "usage[c23]"));
  EXPECT_EQ(usage.at(inst.compressor_consumption(0)), 1.0);
  EXPECT_DOUBLE_EQ(usage.at(inst.compressor_flow(0)), -0.01);
}

TEST(Model, LoadScalesWithMultiplier) {
  Scenario s = nominal_scenario(tiny_t1());
  s.lambda[0][1] = 1.1;
  const ProblemInstance inst = build_steady_state(tiny_t1(), s);
  EXPECT_NEAR(row_named(inst, "balance[2]").rhs, 3.3, 1e-15);
}

TEST(Model, HorizonMismatchErrors) {
  EXPECT_THROW(build_steady_state(tiny_t1(), nominal_scenario(tiny_t1(), 2)), ValidationError);
  Scenario one = nominal_scenario(t1_with_linepack(), 1);
  EXPECT_THROW(build_quasi_dynamic(t1_with_linepack(), one), ValidationError);
  EXPECT_THROW(build_quasi_dynamic(t1_with_linepack(), nominal_scenario(t1_with_linepack(), 2)), ValidationError);
}

TEST(Model, QuasiDynamicVariableCount) {
  Scenario s = nominal_scenario(t1_with_linepack(), 2);
  s.initial_linepack["12"] = 5.0;
  const ProblemInstance inst = build_quasi_dynamic(t1_with_linepack(), s);
  EXPECT_EQ(inst.variable_count(), 14u);
  EXPECT_TRUE(inst.quasi_dynamic());
  EXPECT_EQ(inst.weymouth().size(), 2u);
}

TEST(Model, TerminalRowMatchesInitialTotal) {
  const GasNetwork net = synthetic_net7();
  Scenario s = nominal_scenario(net, 3);
  double total = 0.0;
  for (std::size_t p = 0; p < net.pipelines().size(); ++p) {
    s.initial_linepack[net.pipelines()[p].id] = 10.0 + static_cast<double>(p);
    total += 10.0 + static_cast<double>(p);
  }
  const ProblemInstance inst = build_quasi_dynamic(net, s);
  const LinearRow& terminal = row_named(inst, "terminal_linepack");
  EXPECT_EQ(terminal.family, RowFamily::linepack_terminal);
  EXPECT_DOUBLE_EQ(terminal.rhs, total);
  const auto c = coefs(terminal);
  EXPECT_EQ(c.size(), net.pipelines().size());
  for (std::size_t p = 0; p < net.pipelines().size(); ++p) EXPECT_EQ(c.at(inst.linepack(p, 2)), 1.0);
}

TEST(Model, DynamicsTelescope) {
  const GasNetwork net = synthetic_net7();
  Scenario s = nominal_scenario(net, 4);
  for (std::size_t p = 0; p < net.pipelines().size(); ++p) s.initial_linepack[net.pipelines()[p].id] = 7.0 + p;
  const ProblemInstance inst = build_quasi_dynamic(net, s);
  for (std::size_t p = 0; p < net.pipelines().size(); ++p) {
    std::map<std::size_t, double> sum;
    double rhs = 0.0;
    for (int t = 0; t < 4; ++t) {
      const LinearRow& r = row_named(inst, "dynamics[" + net.pipelines()[p].id + ",t" + std::to_string(t + 1) + "]");
      for (const auto& [var, coef] : coefs(r)) sum[var] += coef;
      rhs += r.rhs;
    }
    // Sum over t: M_T - sum_t (q_in - q_out) = M_0.
    EXPECT_DOUBLE_EQ(rhs, 7.0 + p);
    for (const auto& [var, coef] : sum) {
      const Variable& v = inst.variables()[var];
      if (v.kind == VariableKind::linepack) {
        EXPECT_EQ(coef, v.slot == 3 ? 1.0 : 0.0) << v.name;
      } else if (v.kind == VariableKind::pipe_inflow) {
        EXPECT_EQ(coef, -1.0);
      } else {
        EXPECT_EQ(v.kind, VariableKind::pipe_outflow);
        EXPECT_EQ(coef, 1.0);
      }
    }
  }
}

TEST(Model, EvaluateExactWeymouthPoint) {
  const ProblemInstance inst = build_steady_state(tiny_t1(), nominal_scenario(tiny_t1()));
  const FeasibilityReport r = evaluate_solution(inst, t1_point(inst, 3.0));
  EXPECT_NEAR(r.max_weymouth_violation, 0.0, 1e-15);
  EXPECT_NEAR(r.max_linear_residual, 0.0, 1e-15);
  for (const ResidualEntry& e : r.residuals) EXPECT_GE(e.residual, 0.0);
}

TEST(Model, EvaluateFlowMismatch) {
  const ProblemInstance inst = build_steady_state(tiny_t1(), nominal_scenario(tiny_t1()));
  const FeasibilityReport r = evaluate_solution(inst, t1_point(inst, 2.0));
  EXPECT_NEAR(r.max_weymouth_violation, 0.5, 1e-14);
  EXPECT_NEAR(r.max_linear_residual, 1.0, 1e-14);  // balance at both nodes off by 1
}

TEST(Model, ZeroFlowEqualPressuresHasNoViolation) {
  const WeymouthRecord rec{0, 0, 0, 1, 2, 1.5, 10.0};
  const std::vector<double> x{0.0, 4.0, 4.0};
  EXPECT_EQ(weymouth_violation(rec, x), 0.0);
  const std::vector<double> tiny{1e-8, 4.0, 4.0};
  EXPECT_LT(weymouth_violation(rec, tiny), 1e-15);
}

TEST(Model, ViolationIsScaleInvariant) {
  Rng rng(11);
  const WeymouthRecord rec{0, 0, 0, 1, 2, 0.7, 10.0};
  for (int k = 0; k < 100; ++k) {
    const std::vector<double> x{uniform(rng, 0.1, 5.0), uniform(rng, 2.0, 8.0), uniform(rng, 1.0, 8.0)};
    const double a = uniform(rng, 0.2, 5.0);
    const std::vector<double> y{a * x[0], a * x[1], a * x[2]};
    EXPECT_NEAR(weymouth_violation(rec, x), weymouth_violation(rec, y), 1e-12);
  }
}

TEST(Model, BalanceResidualsSumToNetSupply) {
  // For any x, summing steady-state balance residuals over nodes leaves
  // total output - compressor use - total load (flows cancel).
  const GasNetwork net = synthetic_net20();
  const ProblemInstance inst = build_steady_state(net, nominal_scenario(net));
  Rng rng(3);
  std::vector<double> x(inst.variable_count());
  for (double& v : x) v = uniform(rng, -5.0, 5.0);
  double sum = 0.0;
  for (const LinearRow& r : inst.rows()) {
    if (r.family == RowFamily::nodal_balance) sum += r.activity(x) - r.rhs;
  }
  double expected = 0.0;
  for (std::size_t s = 0; s < net.sources().size(); ++s) expected += x[inst.source_output(s)];
  for (std::size_t c = 0; c < net.compressors().size(); ++c) expected -= x[inst.compressor_consumption(c)];
  for (const NodeSpec& n : net.nodes()) expected -= n.base_load;
  EXPECT_NEAR(sum, expected, 1e-9);
}

TEST(Model, ReplicatedSteadyPointIsQuasiDynamicFeasible) {
  const GasNetwork net = t1_with_linepack();
  const ProblemInstance ss = build_steady_state(net, nominal_scenario(net));
  const SolutionVector xs = t1_point(ss, 3.0);
  Scenario s = nominal_scenario(net, 3);
  const double m = 1.0 * 0.5 * (std::sqrt(10.0) + 1.0);
  s.initial_linepack["12"] = m;
  const ProblemInstance qd = build_quasi_dynamic(net, s);
  SolutionVector x;
  x.values.assign(qd.variable_count(), 0.0);
  for (int t = 0; t < 3; ++t) {
    x.values[qd.source_output(0, t)] = 3.0;
    x.values[qd.pipe_flow(0, t)] = 3.0;
    x.values[qd.pipe_inflow(0, t)] = 3.0;
    x.values[qd.pipe_outflow(0, t)] = 3.0;
    x.values[qd.linepack(0, t)] = m;
    x.values[qd.pressure(0, t)] = std::sqrt(10.0);
    x.values[qd.pressure(1, t)] = 1.0;
  }
  const FeasibilityReport a = evaluate_solution(ss, xs);
  const FeasibilityReport b = evaluate_solution(qd, x);
  EXPECT_NEAR(b.max_weymouth_violation, a.max_weymouth_violation, 1e-15);
  EXPECT_NEAR(b.max_linear_residual, a.max_linear_residual, 1e-15);
  EXPECT_DOUBLE_EQ(qd.objective_value(x.values), 3.0 * ss.objective_value(xs.values));
}

TEST(Model, DimensionMismatch) {
  const ProblemInstance inst = build_steady_state(tiny_t1(), nominal_scenario(tiny_t1()));
  EXPECT_THROW(evaluate_solution(inst, SolutionVector{{1.0}, 0.0}), DimensionError);
}

TEST(Model, SolutionSerializers) {
  const ProblemInstance inst = build_steady_state(tiny_t1(), nominal_scenario(tiny_t1()));
  const SolutionVector x = t1_point(inst, 3.0);
  const std::string csv = solution_to_csv(inst, x);
  EXPECT_EQ(csv.rfind("variable,value\n", 0), 0u);
  EXPECT_NE(csv.find("objective,3\n"), std::string::npos);
  EXPECT_NE(solution_to_json(inst, x).find("\"objective\": 3.0"), std::string::npos);
  EXPECT_NE(report_to_json(evaluate_solution(inst, x)).find("max_weymouth_violation"), std::string::npos);
}

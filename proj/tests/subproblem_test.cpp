#include <gtest/gtest.h>

#include <cmath>

#include "ogf/ccp.hpp"
#include "ogf/error.hpp"
#include "ogf/random.hpp"
#include "ogf/subproblem.hpp"
#include "ogf/synthetic.hpp"

using namespace ogf;

namespace {

double concave_side(double pi_low, double flow, double c) { return pi_low * pi_low + flow * flow / (c * c); }

}  // namespace

TEST(Subproblem, LinearizationIsTangent) {
  Rng rng(5);
  for (int k = 0; k < 200; ++k) {
    LinearizationEntry e;
    e.orientation = k % 2 == 0 ? 1 : -1;
    e.pressure_from = uniform(rng, 1.0, 10.0);
    e.pressure_to = uniform(rng, 1.0, 10.0);
    e.flow = uniform(rng, 0.0, 20.0);
    const double c = uniform(rng, 0.1, 5.0);
    const double lo0 = e.pressure_low();
    const double scale = concave_side(lo0, e.flow, c);
    EXPECT_LT(std::abs(linearized_lower_bound(e, c, lo0, e.flow) - scale) / scale, 1e-10);
    // Slopes: central differences are exact for the quadratic up to rounding.
    const double h = 1e-3;
    const double d_pi = (concave_side(lo0 + h, e.flow, c) - concave_side(lo0 - h, e.flow, c)) / (2 * h);
    const double l_pi = (linearized_lower_bound(e, c, lo0 + h, e.flow) - linearized_lower_bound(e, c, lo0 - h, e.flow)) /
                        (2 * h);
    EXPECT_NEAR(l_pi, d_pi, 1e-8 * std::max(1.0, std::abs(d_pi)));
    const double d_f = (concave_side(lo0, e.flow + h, c) - concave_side(lo0, e.flow - h, c)) / (2 * h);
    const double l_f = (linearized_lower_bound(e, c, lo0, e.flow + h) - linearized_lower_bound(e, c, lo0, e.flow - h)) /
                       (2 * h);
    EXPECT_NEAR(l_f, d_f, 1e-8 * std::max(1.0, std::abs(d_f)));
  }
}

TEST(Subproblem, LinearizationUnderestimatesEverywhere) {
  // The affine bound never exceeds pi_low^2 + F^2 / C^2, so any Weymouth-feasible
  // point satisfies the relaxed constraint with zero slack.
  Rng rng(8);
  for (int k = 0; k < 500; ++k) {
    LinearizationEntry e;
    e.pressure_from = uniform(rng, 1.0, 10.0);
    e.pressure_to = uniform(rng, 1.0, 10.0);
    e.flow = uniform(rng, 0.0, 10.0);
    const double c = uniform(rng, 0.2, 3.0);
    const double hi = uniform(rng, 2.0, 10.0);
    const double lo = uniform(rng, 1.0, hi);
    const double f = c * std::sqrt(hi * hi - lo * lo);
    EXPECT_LE(linearized_lower_bound(e, c, lo, f), hi * hi + 1e-9);
    EXPECT_LE(linearized_lower_bound(e, c, lo, f), concave_side(lo, f, c) + 1e-9);
  }
}

TEST(Subproblem, ZeroFlowPointDropsFlowTerm) {
  LinearizationEntry e{3.0, 2.0, 0.0, 1, false};
  EXPECT_DOUBLE_EQ(linearized_lower_bound(e, 1.5, 2.0, 0.0), linearized_lower_bound(e, 1.5, 2.0, 7.0));
  EXPECT_DOUBLE_EQ(linearized_lower_bound(e, 1.5, 2.0, 0.0), 4.0);
}

TEST(Subproblem, StructureMatchesInstance) {
  const GasNetwork net = synthetic_net7();
  const ProblemInstance inst = build_steady_state(net, nominal_scenario(net));
  const Subproblem sub = assemble_subproblem(inst, cold_start(inst, 1), 2.0);
  const std::size_t pipes = inst.weymouth().size();
  EXPECT_EQ(sub.original_variables, inst.variable_count());
  EXPECT_EQ(sub.program.variable_count(), inst.variable_count() + 2 * pipes);
  EXPECT_EQ(sub.program.cones().size(), 2 * pipes);
  EXPECT_EQ(sub.slack.size(), pipes);
  for (std::size_t s : sub.slack) EXPECT_EQ(sub.program.cost()[s], 2.0);
}

TEST(Subproblem, T1ExactPointSolvesToLoad) {
  const ProblemInstance inst = build_steady_state(tiny_t1(), nominal_scenario(tiny_t1()));
  const LinearizationPoint point = warm_start_from_pressures(inst, {{std::sqrt(10.0), 1.0}});
  const Subproblem sub = assemble_subproblem(inst, point, 1.0);
  const ConicSolution sol = solve(sub.program);
  // The relaxed cone is tight at the optimum, so the solver may stop at its
  // reduced tolerance.
  ASSERT_TRUE(sol.status == SolveStatus::optimal || sol.status == SolveStatus::inaccurate);
  EXPECT_NEAR(sol.x[inst.source_output(0)], 3.0, 1e-6);
  EXPECT_NEAR(sol.x[sub.slack[0]], 0.0, 1e-5);
  EXPECT_NEAR(sol.objective, 3.0, 1e-5);
}

TEST(Subproblem, LargerPenaltyNeverIncreasesSlack) {
  const GasNetwork net = synthetic_net7();
  const ProblemInstance inst = build_steady_state(net, nominal_scenario(net));
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const LinearizationPoint point = cold_start(inst, seed);
    auto total_slack = [&](double tau) {
      const Subproblem sub = assemble_subproblem(inst, point, tau);
      const ConicSolution sol = solve(sub.program);
      EXPECT_TRUE(sol.status == SolveStatus::optimal || sol.status == SolveStatus::inaccurate);
      double sum = 0.0;
      for (std::size_t s : sub.slack) sum += sol.x[s];
      return sum;
    };
    const double loose = total_slack(1.0);
    EXPECT_LE(total_slack(1000.0), loose + 1e-6 * (1.0 + loose)) << seed;
  }
}

TEST(Subproblem, RejectsBadInputs) {
  const ProblemInstance inst = build_steady_state(tiny_t1(), nominal_scenario(tiny_t1()));
  const LinearizationPoint point = cold_start(inst, 1);
  EXPECT_THROW(assemble_subproblem(inst, point, 0.0), ValidationError);
  EXPECT_THROW(assemble_subproblem(inst, LinearizationPoint{}, 1.0), DimensionError);
  LinearizationPoint bad = point;
  bad.entries[0].orientation = 0;
  EXPECT_THROW(assemble_subproblem(inst, bad, 1.0), ValidationError);
  bad = point;
  bad.entries[0].flow = -1.0;
  EXPECT_THROW(assemble_subproblem(inst, bad, 1.0), ValidationError);
}

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "ogf/conic.hpp"
#include "ogf/error.hpp"
#include "ogf/model.hpp"
#include "ogf/random.hpp"

using namespace ogf;

namespace {

constexpr int kDim = 3;

struct ToyLp {
  ConicProgram program;
  Eigen::MatrixXd g;  // inequality rows G x <= h
  Eigen::VectorXd h;
  Eigen::VectorXd c;
};

// Free variables; box and random cuts all expressed as rows so that the
// returned row duals carry the full KKT system.
ToyLp random_lp(std::uint64_t seed) {
  Rng rng(seed);
  ToyLp lp;
  lp.c = Eigen::VectorXd(kDim);
  for (int i = 0; i < kDim; ++i) {
    lp.c(i) = uniform(rng, -1.0, 1.0);
    lp.program.add_variable("x" + std::to_string(i), -kInfinity, kInfinity, lp.c(i));
  }
  std::vector<std::pair<Eigen::VectorXd, double>> rows;
  for (int i = 0; i < kDim; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(kDim);
    e(i) = 1.0;
    rows.push_back({e, 2.0});
    rows.push_back({-e, 2.0});
  }
  for (int k = 0; k < 3; ++k) {
    Eigen::VectorXd a(kDim);
    for (int i = 0; i < kDim; ++i) a(i) = uniform(rng, -1.0, 1.0);
    rows.push_back({a, uniform(rng, 0.5, 1.5)});
  }
  lp.g = Eigen::MatrixXd(rows.size(), kDim);
  lp.h = Eigen::VectorXd(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    lp.g.row(r) = rows[r].first.transpose();
    lp.h(r) = rows[r].second;
    std::vector<LinearTerm> terms;
    for (int i = 0; i < kDim; ++i) terms.push_back({static_cast<std::size_t>(i), rows[r].first(i)});
    lp.program.add_inequality(terms, rows[r].second);
  }
  return lp;
}

// Best feasible vertex over all 3-row active sets.
double vertex_optimum(const ToyLp& lp) {
  double best = kInfinity;
  const int m = static_cast<int>(lp.g.rows());
  for (int a = 0; a < m; ++a) {
    for (int b = a + 1; b < m; ++b) {
      for (int c = b + 1; c < m; ++c) {
        Eigen::Matrix3d mat;
        mat << lp.g.row(a), lp.g.row(b), lp.g.row(c);
        if (std::abs(mat.determinant()) < 1e-10) continue;
        const Eigen::Vector3d v = mat.fullPivLu().solve(Eigen::Vector3d(lp.h(a), lp.h(b), lp.h(c)));
        if (((lp.g * v - lp.h).array() <= 1e-9).all()) best = std::min(best, lp.c.dot(v));
      }
    }
  }
  return best;
}

}  // namespace

TEST(Conic, LpKktResidualsOnToyPrograms) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ToyLp lp = random_lp(seed);
    const ConicSolution sol = solve(lp.program);
    ASSERT_EQ(sol.status, SolveStatus::optimal) << seed;
    const Eigen::Map<const Eigen::VectorXd> x(sol.x.data(), kDim);
    const Eigen::Map<const Eigen::VectorXd> z(sol.inequality_duals.data(), lp.g.rows());
    const double stationarity = (lp.c + lp.g.transpose() * z).lpNorm<Eigen::Infinity>();
    const double primal = std::max(0.0, (lp.g * x - lp.h).maxCoeff());
    const double dual = std::max(0.0, -z.minCoeff());
    const double complementarity = (z.array() * (lp.h - lp.g * x).array()).abs().maxCoeff();
    EXPECT_LE(stationarity, 1e-8) << seed;
    EXPECT_LE(primal, 1e-8) << seed;
    EXPECT_LE(dual, 1e-8) << seed;
    EXPECT_LE(complementarity, 1e-8) << seed;
    EXPECT_NEAR(sol.objective, vertex_optimum(lp), 1e-7) << seed;
  }
}

TEST(Conic, BallProgramsMatchClosedForm) {
  // minimize c'x s.t. ||x - a|| <= r, with x free: optimum c'a - r ||c||.
  Rng rng(99);
  for (int k = 0; k < 10; ++k) {
    ConicProgram p;
    Eigen::Vector3d c;
    Eigen::Vector3d a;
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
    ASSERT_EQ(sol.status, SolveStatus::optimal);
    EXPECT_LE(std::max({sol.primal_residual, sol.dual_residual, sol.relative_gap}), 1e-8);
    const Eigen::Vector3d expected = a - r * c / c.norm();
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(sol.x[i], expected(i), 1e-6);
    EXPECT_NEAR(sol.objective, c.dot(a) - r * c.norm(), 1e-7);
    EXPECT_LE(p.max_violation(sol.x), 1e-8);
  }
}

TEST(Conic, ScalarConeExample) {
  // minimize x s.t. ||1|| <= x.
  ConicProgram p;
  const std::size_t x = p.add_variable("x", -kInfinity, kInfinity, 1.0);
  p.add_cone({AffineExpr{{{x, 1.0}}, 0.0}, AffineExpr{{}, 1.0}});
  const ConicSolution sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::optimal);
  EXPECT_NEAR(sol.x[0], 1.0, 1e-7);
}

TEST(Conic, DetectsInfeasibility) {
  ConicProgram p;
  const std::size_t x = p.add_variable("x", -kInfinity, kInfinity, 1.0);
  p.add_inequality({{x, -1.0}}, -1.0);
  p.add_inequality({{x, 1.0}}, 0.0);
  EXPECT_EQ(solve(p).status, SolveStatus::infeasible);
}

TEST(Conic, DetectsUnboundedness) {
  ConicProgram p;
  const std::size_t x = p.add_variable("x", -kInfinity, kInfinity, 1.0);
  p.add_inequality({{x, 1.0}}, 0.0);
  EXPECT_EQ(solve(p).status, SolveStatus::unbounded);
}

TEST(Conic, BoundsAndEqualities) {
  // minimize x + 2y s.t. x + y = 1, 0 <= x <= 0.75, y >= 0.
  ConicProgram p;
  const std::size_t x = p.add_variable("x", 0.0, 0.75, 1.0);
  const std::size_t y = p.add_variable("y", 0.0, kInfinity, 2.0);
  p.add_equality({{x, 1.0}, {y, 1.0}}, 1.0);
  p.add_objective_constant(0.5);
  const ConicSolution sol = solve(p);
  ASSERT_EQ(sol.status, SolveStatus::optimal);
  EXPECT_NEAR(sol.x[x], 0.75, 1e-7);
  EXPECT_NEAR(sol.x[y], 0.25, 1e-7);
  EXPECT_NEAR(sol.objective, 0.75 + 0.5 + 0.5, 1e-7);
  EXPECT_DOUBLE_EQ(sol.objective, p.objective_value(sol.x));
  ASSERT_EQ(sol.equality_duals.size(), 1u);
  EXPECT_NEAR(sol.equality_duals[0], -2.0, 1e-6);
}

TEST(Conic, ArgminInvariantUnderObjectiveScaling) {
  for (std::uint64_t seed = 20; seed < 25; ++seed) {
    ToyLp lp = random_lp(seed);
    ConicProgram scaled = lp.program;
    for (std::size_t i = 0; i < scaled.variable_count(); ++i) scaled.set_cost(i, 1000.0 * lp.program.cost()[i]);
    const ConicSolution a = solve(lp.program);
    const ConicSolution b = solve(scaled);
    ASSERT_EQ(b.status, SolveStatus::optimal);
    for (int i = 0; i < kDim; ++i) EXPECT_NEAR(a.x[i], b.x[i], 1e-6);
    EXPECT_NEAR(b.objective, 1000.0 * a.objective, 1e-4);
  }
}

TEST(Conic, SolveIsDeterministic) {
  const ToyLp lp = random_lp(3);
  EXPECT_EQ(solve(lp.program).x, solve(lp.program).x);
}

TEST(Conic, RejectsMalformedPrograms) {
  ConicProgram p;
  EXPECT_THROW(p.add_variable("bad", 1.0, 0.0), ValidationError);
  p.add_variable("x", 0.0, 1.0);
  EXPECT_THROW(p.add_equality({{5, 1.0}}, 0.0), DimensionError);
  EXPECT_THROW(p.add_cone({AffineExpr{}}), DimensionError);
  EXPECT_THROW(p.objective_value(std::vector<double>{1.0, 2.0}), DimensionError);
}

TEST(Conic, DebugDumpListsConstraints) {
  ToyLp lp = random_lp(1);
  std::ostringstream out;
  lp.program.write_debug(out);
  const std::string text = out.str();
  EXPECT_GE(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), lp.program.inequalities().size());
}

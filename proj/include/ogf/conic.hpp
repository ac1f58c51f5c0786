#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ogf/linear.hpp"

namespace ogf {

struct AffineExpr {
  std::vector<LinearTerm> terms;
  double constant = 0.0;

  double value(std::span<const double> x) const {
    double sum = constant;
    for (const LinearTerm& t : terms) sum += t.coef * x[t.var];
    return sum;
  }
};

struct ConicRow {
  std::vector<LinearTerm> terms;
  double rhs = 0.0;
  std::string label;

  double activity(std::span<const double> x) const {
    double sum = 0.0;
    for (const LinearTerm& t : terms) sum += t.coef * x[t.var];
    return sum;
  }
};

/// Second-order cone membership ||(members[1], ..., members[k])|| <= members[0].
struct ConeConstraint {
  std::vector<AffineExpr> members;
  std::string label;
};

/// Standard-form conic program: minimize c'x + constant subject to equality
/// rows, `<=` inequality rows, variable bounds and second-order cones over
/// affine expressions.
class ConicProgram {
 public:
  std::size_t add_variable(std::string name, double lower, double upper, double cost = 0.0);
  void add_equality(std::vector<LinearTerm> terms, double rhs, std::string label = {});
  void add_inequality(std::vector<LinearTerm> terms, double rhs, std::string label = {});
  void add_cone(std::vector<AffineExpr> members, std::string label = {});

  void set_cost(std::size_t var, double cost) { cost_.at(var) = cost; }
  void add_objective_constant(double value) { objective_constant_ += value; }

  std::size_t variable_count() const noexcept { return cost_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::vector<double>& cost() const noexcept { return cost_; }
  double objective_constant() const noexcept { return objective_constant_; }
  const std::vector<double>& lower() const noexcept { return lower_; }
  const std::vector<double>& upper() const noexcept { return upper_; }
  const std::vector<ConicRow>& equalities() const noexcept { return equalities_; }
  const std::vector<ConicRow>& inequalities() const noexcept { return inequalities_; }
  const std::vector<ConeConstraint>& cones() const noexcept { return cones_; }

  double objective_value(std::span<const double> x) const;

  /// Largest violation of any row, bound or cone at `x` (cones measured as
  /// max(||tail|| - head, 0)).
  double max_violation(std::span<const double> x) const;

  /// Plain-text dump, one line per constraint.
  void write_debug(std::ostream& out) const;

 private:
  void check_terms(const std::vector<LinearTerm>& terms) const;

  std::vector<std::string> names_;
  std::vector<double> cost_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  double objective_constant_ = 0.0;
  std::vector<ConicRow> equalities_;
  std::vector<ConicRow> inequalities_;
  std::vector<ConeConstraint> cones_;
};

/// `inaccurate`: the interior-point method stalled at a point meeting the
/// reduced tolerances (primal residual <= max(10 tol, 1e-5), dual residual and
/// gap <= inaccurate_tolerance), typically because the dual optimum is not attained.
enum class SolveStatus { optimal, inaccurate, infeasible, unbounded, numerical_failure };

const char* to_string(SolveStatus status);

struct SolverSettings {
  double tolerance = 1e-8;  // relative primal/dual residual and gap
  int max_iterations = 100;
  double inaccurate_tolerance = 5e-3;
};

struct ConicSolution {
  SolveStatus status = SolveStatus::numerical_failure;
  std::vector<double> x;
  std::vector<double> equality_duals;    // y, sign convention c + A'y + G'z = 0
  std::vector<double> inequality_duals;  // z for `<=` rows, >= 0
  double objective = std::numeric_limits<double>::quiet_NaN();
  double primal_residual = std::numeric_limits<double>::infinity();
  double dual_residual = std::numeric_limits<double>::infinity();
  double relative_gap = std::numeric_limits<double>::infinity();
  int iterations = 0;

  double tolerance_achieved() const;
};

/// Primal-dual interior-point method on the homogeneous self-dual embedding
/// with Nesterov-Todd scaling and Mehrotra correction. Deterministic and
/// reentrant; a single call is single-threaded.
ConicSolution solve(const ConicProgram& program, const SolverSettings& settings = {});

}  // namespace ogf

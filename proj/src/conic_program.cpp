#include <algorithm>
#include <cmath>
#include <ostream>

#include "ogf/conic.hpp"
#include "ogf/error.hpp"
#include "ogf/text.hpp"

namespace ogf {

std::size_t ConicProgram::add_variable(std::string name, double lower, double upper, double cost) {
  if (lower > upper) throw ValidationError(name, "variable lower bound exceeds upper bound");
  names_.push_back(std::move(name));
  lower_.push_back(lower);
  upper_.push_back(upper);
  cost_.push_back(cost);
  return cost_.size() - 1;
}

void ConicProgram::check_terms(const std::vector<LinearTerm>& terms) const {
  for (const LinearTerm& t : terms) {
    if (t.var >= cost_.size()) throw DimensionError("conic row references unknown variable");
  }
}

void ConicProgram::add_equality(std::vector<LinearTerm> terms, double rhs, std::string label) {
  check_terms(terms);
  equalities_.push_back({std::move(terms), rhs, std::move(label)});
}

void ConicProgram::add_inequality(std::vector<LinearTerm> terms, double rhs, std::string label) {
  check_terms(terms);
  inequalities_.push_back({std::move(terms), rhs, std::move(label)});
}

void ConicProgram::add_cone(std::vector<AffineExpr> members, std::string label) {
  if (members.size() < 2) throw DimensionError("cone needs a head and at least one tail member");
  for (const AffineExpr& e : members) check_terms(e.terms);
  cones_.push_back({std::move(members), std::move(label)});
}

double ConicProgram::objective_value(std::span<const double> x) const {
  if (x.size() != cost_.size()) throw DimensionError("point length does not match program");
  double sum = objective_constant_;
  for (std::size_t i = 0; i < x.size(); ++i) sum += cost_[i] * x[i];
  return sum;
}

double ConicProgram::max_violation(std::span<const double> x) const {
  if (x.size() != cost_.size()) throw DimensionError("point length does not match program");
  double worst = 0.0;
  for (const ConicRow& r : equalities_) worst = std::max(worst, std::abs(r.activity(x) - r.rhs));
  for (const ConicRow& r : inequalities_) worst = std::max(worst, r.activity(x) - r.rhs);
  for (std::size_t i = 0; i < x.size(); ++i) worst = std::max({worst, lower_[i] - x[i], x[i] - upper_[i]});
  for (const ConeConstraint& c : cones_) {
    double tail = 0.0;
    for (std::size_t k = 1; k < c.members.size(); ++k) {
      const double v = c.members[k].value(x);
      tail += v * v;
    }
    worst = std::max(worst, std::sqrt(tail) - c.members[0].value(x));
  }
  return worst;
}

namespace {

void write_terms(std::ostream& out, const ConicProgram& p, const std::vector<LinearTerm>& terms) {
  if (terms.empty()) out << '0';
  bool first = true;
  for (const LinearTerm& t : terms) {
    out << (first ? "" : " ") << (t.coef < 0 ? "- " : (first ? "" : "+ ")) << format_double(std::abs(t.coef)) << ' '
        << p.names()[t.var];
    first = false;
  }
}

void write_affine(std::ostream& out, const ConicProgram& p, const AffineExpr& e) {
  out << '(';
  write_terms(out, p, e.terms);
  if (e.constant != 0.0) out << (e.constant < 0 ? " - " : " + ") << format_double(std::abs(e.constant));
  out << ')';
}

}  // namespace

void ConicProgram::write_debug(std::ostream& out) const {
  out << "minimize";
  for (std::size_t i = 0; i < cost_.size(); ++i) {
    if (cost_[i] != 0.0) out << ' ' << format_double(cost_[i]) << '*' << names_[i];
  }
  if (objective_constant_ != 0.0) out << " + " << format_double(objective_constant_);
  out << '\n';
  for (std::size_t i = 0; i < cost_.size(); ++i) {
    out << "var " << names_[i] << " in [" << format_double(lower_[i]) << ", " << format_double(upper_[i]) << "]\n";
  }
  for (const ConicRow& r : equalities_) {
    out << "eq " << r.label << ": ";
    write_terms(out, *this, r.terms);
    out << " = " << format_double(r.rhs) << '\n';
  }
  for (const ConicRow& r : inequalities_) {
    out << "le " << r.label << ": ";
    write_terms(out, *this, r.terms);
    out << " <= " << format_double(r.rhs) << '\n';
  }
  for (const ConeConstraint& c : cones_) {
    out << "soc " << c.label << ": ||";
    for (std::size_t k = 1; k < c.members.size(); ++k) {
      if (k > 1) out << ", ";
      write_affine(out, *this, c.members[k]);
    }
    out << "|| <= ";
    write_affine(out, *this, c.members[0]);
    out << '\n';
  }
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::inaccurate: return "inaccurate";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::numerical_failure: return "numerical-failure";
  }
  return "unknown";
}

double ConicSolution::tolerance_achieved() const {
  return std::max({primal_residual, dual_residual, relative_gap});
}

}  // namespace ogf

#include "ogf/subproblem.hpp"

#include <cmath>
#include <string>

#include "ogf/error.hpp"

namespace ogf {

double linearized_lower_bound(const LinearizationEntry& e, double coefficient, double pi_low, double flow) {
  const double lo0 = e.pressure_low();
  return (2.0 * lo0 * pi_low - lo0 * lo0) + (2.0 * e.flow * flow - e.flow * e.flow) / (coefficient * coefficient);
}

Subproblem assemble_subproblem(const ProblemInstance& instance, const LinearizationPoint& point, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw ValidationError("", "penalty weight must be positive");
  if (point.entries.size() != instance.weymouth().size()) {
    throw DimensionError("linearization point has " + std::to_string(point.entries.size()) + " entries, instance has " +
                         std::to_string(instance.weymouth().size()) + " pipelines");
  }

  Subproblem sub;
  ConicProgram& prog = sub.program;
  for (std::size_t i = 0; i < instance.variable_count(); ++i) {
    const Variable& v = instance.variables()[i];
    prog.add_variable(v.name, v.lower, v.upper, instance.objective()[i]);
  }
  sub.original_variables = instance.variable_count();
  for (const LinearRow& row : instance.rows()) {
    if (row.sense == RowSense::equal) {
      prog.add_equality(row.terms, row.rhs, row.label);
    } else {
      prog.add_inequality(row.terms, row.rhs, row.label);
    }
  }

  const GasNetwork& net = instance.network();
  for (std::size_t k = 0; k < instance.weymouth().size(); ++k) {
    const WeymouthRecord& rec = instance.weymouth()[k];
    const LinearizationEntry& e = point.entries[k];
    if (e.orientation != 1 && e.orientation != -1) throw ValidationError("", "orientation must be +1 or -1");
    if (!(e.flow >= 0.0) || !std::isfinite(e.pressure_from) || !std::isfinite(e.pressure_to)) {
      throw ValidationError(net.pipelines()[rec.pipeline].id, "invalid linearization entry");
    }
    const double sigma = e.orientation;
    const std::size_t hi = e.orientation > 0 ? rec.pressure_from : rec.pressure_to;
    const std::size_t lo = e.orientation > 0 ? rec.pressure_to : rec.pressure_from;
    const double c = rec.coefficient;
    const std::string tag = prog.names()[rec.flow].substr(1);  // "[id]" or "[id,tk]"
    const double hi_max = instance.variables()[hi].upper;
    const double scale = std::isfinite(hi_max) && hi_max > 0.0 ? hi_max : 1.0;

    const std::size_t u = prog.add_variable("u" + tag, 0.0, kInfinity);
    const std::size_t s = prog.add_variable("s" + tag, 0.0, kInfinity, tau);
    sub.epigraph.push_back(u);
    sub.slack.push_back(s);

    prog.add_inequality({{rec.flow, -sigma}}, 0.0, "direction" + tag);
    prog.add_cone({AffineExpr{{{hi, 1.0}}, 0.0}, AffineExpr{{{lo, 1.0}}, 0.0}, AffineExpr{{{rec.flow, sigma / c}}, 0.0}},
                  "weymouth_relaxed" + tag);
    // u >= pi_hi^2 as ||(pi_hi, (u/k - k)/2)|| <= (u/k + k)/2 with k near pi_hi.
    prog.add_cone({AffineExpr{{{u, 0.5 / scale}}, 0.5 * scale}, AffineExpr{{{hi, 1.0}}, 0.0},
                   AffineExpr{{{u, 0.5 / scale}}, -0.5 * scale}},
                  "epigraph" + tag);
    const double lo0 = e.pressure_low();
    const double c2 = c * c;
    prog.add_inequality({{u, 1.0}, {lo, -2.0 * lo0}, {rec.flow, -2.0 * e.flow * sigma / c2}, {s, -1.0}},
                        -lo0 * lo0 - e.flow * e.flow / c2, "linearized" + tag);
  }
  return sub;
}

}  // namespace ogf

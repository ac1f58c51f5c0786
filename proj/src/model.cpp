#include "ogf/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "ogf/error.hpp"
#include "ogf/text.hpp"

namespace ogf {

ProblemInstance::ProblemInstance(const GasNetwork& network, Scenario scenario, bool quasi_dynamic)
    : network_(network), scenario_(std::move(scenario)), horizon_(scenario_.horizon()), quasi_dynamic_(quasi_dynamic) {}

std::size_t ProblemInstance::at(const IndexTable& table, std::size_t element, int t) {
  if (t < 0 || static_cast<std::size_t>(t) >= table.size() || element >= table[static_cast<std::size_t>(t)].size()) {
    throw DimensionError("variable index out of range");
  }
  return table[static_cast<std::size_t>(t)][element];
}

double ProblemInstance::objective_value(std::span<const double> x) const {
  if (x.size() != variables_.size()) throw DimensionError("solution length does not match instance");
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += objective_[i] * x[i];
  return sum;
}

class InstanceBuilder {
 public:
  explicit InstanceBuilder(ProblemInstance& inst) : inst_(inst) {}

  void add_variables() {
    const GasNetwork& net = inst_.network_;
    const bool qd = inst_.quasi_dynamic_;
    const int horizon = inst_.horizon_;
    for (int t = 0; t < horizon; ++t) {
      auto& g = inst_.source_output_.emplace_back();
      for (std::size_t s = 0; s < net.sources().size(); ++s) {
        const SourceSpec& src = net.sources()[s];
        g.push_back(add(VariableKind::source_output, s, t, "G", src.id, src.g_min, src.g_max, src.unit_cost));
      }
      auto& f = inst_.pipe_flow_.emplace_back();
      auto& qin = inst_.pipe_inflow_.emplace_back();
      auto& qout = inst_.pipe_outflow_.emplace_back();
      auto& m = inst_.linepack_.emplace_back();
      for (std::size_t p = 0; p < net.pipelines().size(); ++p) {
        const PipelineSpec& pipe = net.pipelines()[p];
        f.push_back(add(VariableKind::pipe_flow, p, t, "F", pipe.id, -pipe.f_max, pipe.f_max, 0.0));
        if (qd) {
          qin.push_back(add(VariableKind::pipe_inflow, p, t, "qin", pipe.id, -kInfinity, kInfinity, 0.0));
          qout.push_back(add(VariableKind::pipe_outflow, p, t, "qout", pipe.id, -kInfinity, kInfinity, 0.0));
          m.push_back(add(VariableKind::linepack, p, t, "M", pipe.id, -kInfinity, kInfinity, 0.0));
        }
      }
      auto& pi = inst_.pressure_.emplace_back();
      for (std::size_t n = 0; n < net.node_count(); ++n) {
        const NodeSpec& node = net.nodes()[n];
        pi.push_back(add(VariableKind::pressure, n, t, "pi", node.id, node.pi_min, node.pi_max, 0.0));
      }
      auto& fc = inst_.compressor_flow_.emplace_back();
      auto& w = inst_.compressor_use_.emplace_back();
      for (std::size_t c = 0; c < net.compressors().size(); ++c) {
        const CompressorSpec& comp = net.compressors()[c];
        fc.push_back(add(VariableKind::compressor_flow, c, t, "FC", comp.id, 0.0, comp.fc_max, 0.0));
        w.push_back(add(VariableKind::compressor_consumption, c, t, "W", comp.id, -kInfinity, kInfinity, 0.0));
      }
    }
  }

  void add_compressor_rows() {
    const GasNetwork& net = inst_.network_;
    for (int t = 0; t < inst_.horizon_; ++t) {
      for (std::size_t c = 0; c < net.compressors().size(); ++c) {
        const CompressorSpec& comp = net.compressors()[c];
        const std::size_t pi_i = inst_.pressure(net.compressor_from(c), t);
        const std::size_t pi_j = inst_.pressure(net.compressor_to(c), t);
        row({{pi_i, 1.0}, {pi_j, -1.0}}, RowSense::less_equal, 0.0, RowFamily::compressor_ratio,
            "ratio_lo[" + label(comp.id, t) + "]");
        row({{pi_j, 1.0}, {pi_i, -comp.r_max}}, RowSense::less_equal, 0.0, RowFamily::compressor_ratio,
            "ratio_hi[" + label(comp.id, t) + "]");
        row({{inst_.compressor_consumption(c, t), 1.0}, {inst_.compressor_flow(c, t), -comp.gamma}}, RowSense::equal,
            0.0, RowFamily::compressor_usage, "usage[" + label(comp.id, t) + "]");
      }
    }
  }

  void add_balance_rows() {
    const GasNetwork& net = inst_.network_;
    const bool qd = inst_.quasi_dynamic_;
    for (int t = 0; t < inst_.horizon_; ++t) {
      std::vector<std::vector<LinearTerm>> terms(net.node_count());
      for (std::size_t s = 0; s < net.sources().size(); ++s) {
        terms[net.source_node(s)].push_back({inst_.source_output(s, t), 1.0});
      }
      for (std::size_t p = 0; p < net.pipelines().size(); ++p) {
        const std::size_t out_var = qd ? inst_.pipe_inflow(p, t) : inst_.pipe_flow(p, t);
        const std::size_t in_var = qd ? inst_.pipe_outflow(p, t) : inst_.pipe_flow(p, t);
        terms[net.pipeline_from(p)].push_back({out_var, -1.0});
        terms[net.pipeline_to(p)].push_back({in_var, 1.0});
      }
      for (std::size_t c = 0; c < net.compressors().size(); ++c) {
        terms[net.compressor_from(c)].push_back({inst_.compressor_flow(c, t), -1.0});
        terms[net.compressor_from(c)].push_back({inst_.compressor_consumption(c, t), -1.0});
        terms[net.compressor_to(c)].push_back({inst_.compressor_flow(c, t), 1.0});
      }
      for (std::size_t g = 0; g < net.node_count(); ++g) {
        const double load = inst_.scenario_.lambda[static_cast<std::size_t>(t)][g] * net.nodes()[g].base_load;
        row(std::move(terms[g]), RowSense::equal, load, RowFamily::nodal_balance,
            "balance[" + label(net.nodes()[g].id, t) + "]");
      }
    }
  }

  void add_linepack_rows() {
    const GasNetwork& net = inst_.network_;
    const int horizon = inst_.horizon_;
    for (int t = 0; t < horizon; ++t) {
      for (std::size_t p = 0; p < net.pipelines().size(); ++p) {
        const PipelineSpec& pipe = net.pipelines()[p];
        row({{inst_.pipe_flow(p, t), 1.0}, {inst_.pipe_inflow(p, t), -0.5}, {inst_.pipe_outflow(p, t), -0.5}},
            RowSense::equal, 0.0, RowFamily::average_flow, "average[" + label(pipe.id, t) + "]");
        const double half_h = 0.5 * pipe.linepack_coefficient;
        row({{inst_.linepack(p, t), 1.0},
             {inst_.pressure(net.pipeline_from(p), t), -half_h},
             {inst_.pressure(net.pipeline_to(p), t), -half_h}},
            RowSense::equal, 0.0, RowFamily::linepack_pressure, "linepack[" + label(pipe.id, t) + "]");
        std::vector<LinearTerm> dyn{
            {inst_.linepack(p, t), 1.0}, {inst_.pipe_inflow(p, t), -1.0}, {inst_.pipe_outflow(p, t), 1.0}};
        double rhs = 0.0;
        if (t == 0) {
          rhs = inst_.initial_linepack_[p];
        } else {
          dyn.push_back({inst_.linepack(p, t - 1), -1.0});
        }
        row(std::move(dyn), RowSense::equal, rhs, RowFamily::linepack_dynamics, "dynamics[" + label(pipe.id, t) + "]");
      }
    }
    std::vector<LinearTerm> terminal;
    double total0 = 0.0;
    for (std::size_t p = 0; p < net.pipelines().size(); ++p) {
      terminal.push_back({inst_.linepack(p, horizon - 1), 1.0});
      total0 += inst_.initial_linepack_[p];
    }
    row(std::move(terminal), RowSense::equal, total0, RowFamily::linepack_terminal, "terminal_linepack");
  }

  void add_weymouth_records() {
    const GasNetwork& net = inst_.network_;
    for (int t = 0; t < inst_.horizon_; ++t) {
      for (std::size_t p = 0; p < net.pipelines().size(); ++p) {
        const std::size_t m = net.pipeline_from(p);
        inst_.weymouth_.push_back({p, t, inst_.pipe_flow(p, t), inst_.pressure(m, t),
                                   inst_.pressure(net.pipeline_to(p), t),
                                   net.pipelines()[p].weymouth_coefficient, net.nodes()[m].pi_max});
      }
    }
  }

 private:
  std::string label(const std::string& id, int t) const {
    return inst_.quasi_dynamic_ ? id + ",t" + std::to_string(t + 1) : id;
  }

  std::size_t add(VariableKind kind, std::size_t element, int t, const char* prefix, const std::string& id,
                  double lo, double hi, double cost) {
    inst_.variables_.push_back({kind, element, t, std::string(prefix) + "[" + label(id, t) + "]", lo, hi});
    inst_.objective_.push_back(cost);
    return inst_.variables_.size() - 1;
  }

  void row(std::vector<LinearTerm> terms, RowSense sense, double rhs, RowFamily family, std::string name) {
    inst_.rows_.push_back({std::move(terms), sense, rhs, family, std::move(name)});
  }

  ProblemInstance& inst_;
};

ProblemInstance build_steady_state(const GasNetwork& network, const Scenario& scenario) {
  validate_scenario(network, scenario);
  if (!scenario.steady_state()) throw ValidationError("", "steady-state model requires a single time slot");
  ProblemInstance inst(network, scenario, false);
  InstanceBuilder b(inst);
  b.add_variables();
  b.add_compressor_rows();
  b.add_balance_rows();
  b.add_weymouth_records();
  return inst;
}

ProblemInstance build_quasi_dynamic(const GasNetwork& network, const Scenario& scenario) {
  validate_scenario(network, scenario);
  if (scenario.horizon() < 2) throw ValidationError("", "quasi-dynamic model requires horizon >= 2");
  ProblemInstance inst(network, scenario, true);
  for (const PipelineSpec& p : network.pipelines()) {
    auto it = scenario.initial_linepack.find(p.id);
    if (it == scenario.initial_linepack.end()) throw ValidationError(p.id, "missing initial linepack");
    inst.initial_linepack_.push_back(it->second);
  }
  InstanceBuilder b(inst);
  b.add_variables();
  b.add_compressor_rows();
  b.add_balance_rows();
  b.add_linepack_rows();
  b.add_weymouth_records();
  return inst;
}

ProblemInstance build_instance(const GasNetwork& network, const Scenario& scenario) {
  return scenario.steady_state() ? build_steady_state(network, scenario) : build_quasi_dynamic(network, scenario);
}

double weymouth_violation(const WeymouthRecord& r, std::span<const double> x, double flow_floor) {
  const double f = x[r.flow];
  const double pm = x[r.pressure_from];
  const double pn = x[r.pressure_to];
  const double drop = pm * pm - pn * pn;
  const double c2 = r.coefficient * r.coefficient;
  if (std::abs(f) < flow_floor) {
    return std::abs(f * std::abs(f) - c2 * drop) / (c2 * r.pi_max_from * r.pi_max_from);
  }
  const double ratio = r.coefficient * std::sqrt(std::abs(drop)) / std::abs(f);
  if (f * drop < 0.0) return 1.0 + ratio;
  return std::abs(ratio - 1.0);
}

FeasibilityReport evaluate_solution(const ProblemInstance& instance, const SolutionVector& x, double flow_floor) {
  if (x.values.size() != instance.variable_count()) {
    throw DimensionError("solution has " + std::to_string(x.values.size()) + " values, instance has " +
                         std::to_string(instance.variable_count()) + " variables");
  }
  FeasibilityReport report;
  for (const WeymouthRecord& r : instance.weymouth()) {
    const double v = weymouth_violation(r, x.values, flow_floor);
    report.weymouth_violation.push_back(v);
    report.max_weymouth_violation = std::max(report.max_weymouth_violation, v);
  }
  for (const LinearRow& row : instance.rows()) {
    const double diff = row.activity(x.values) - row.rhs;
    const double res = row.sense == RowSense::equal ? std::abs(diff) : std::max(diff, 0.0);
    report.residuals.push_back({row.label, res});
    report.max_linear_residual = std::max(report.max_linear_residual, res);
  }
  for (std::size_t i = 0; i < instance.variable_count(); ++i) {
    const Variable& v = instance.variables()[i];
    const double res = std::max({v.lower - x.values[i], x.values[i] - v.upper, 0.0});
    report.residuals.push_back({"bound:" + v.name, res});
    report.max_linear_residual = std::max(report.max_linear_residual, res);
  }
  return report;
}

std::string solution_to_csv(const ProblemInstance& instance, const SolutionVector& x) {
  if (x.values.size() != instance.variable_count()) throw DimensionError("solution length mismatch");
  std::ostringstream out;
  out << "variable,value\n";
  for (std::size_t i = 0; i < x.values.size(); ++i) {
    out << instance.variables()[i].name << ',' << format_double(x.values[i]) << '\n';
  }
  out << "objective," << format_double(x.objective) << '\n';
  return out.str();
}

std::string solution_to_json(const ProblemInstance& instance, const SolutionVector& x) {
  if (x.values.size() != instance.variable_count()) throw DimensionError("solution length mismatch");
  nlohmann::ordered_json doc;
  doc["objective"] = x.objective;
  nlohmann::ordered_json values = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < x.values.size(); ++i) values[instance.variables()[i].name] = x.values[i];
  doc["values"] = std::move(values);
  return doc.dump(2) + "\n";
}

std::string report_to_json(const FeasibilityReport& report) {
  nlohmann::ordered_json doc;
  doc["max_weymouth_violation"] = report.max_weymouth_violation;
  doc["max_linear_residual"] = report.max_linear_residual;
  doc["weymouth_violation"] = report.weymouth_violation;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const ResidualEntry& e : report.residuals) rows.push_back({{"label", e.label}, {"residual", e.residual}});
  doc["residuals"] = std::move(rows);
  return doc.dump(2) + "\n";
}

}  // namespace ogf

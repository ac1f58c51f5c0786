#include <cmath>
#include <limits>
#include <queue>

#include "ogf/error.hpp"
#include "ogf/pipeline.hpp"

namespace ogf {

namespace {

constexpr int kMaxDegreesOfFreedom = 3;

enum class EdgeKind { pipeline, compressor };

// Tree rooted at the slack source's node; nodes listed parent-first.
struct RootedTree {
  std::vector<std::size_t> order;
  std::vector<std::size_t> parent;
  std::vector<EdgeKind> kind;
  std::vector<std::size_t> edge;
};

RootedTree root_tree(const GasNetwork& net) {
  const std::size_t n = net.node_count();
  if (net.pipelines().size() + net.compressors().size() + 1 != n) {
    throw Error("oracle requires a tree network (edges = nodes - 1)");
  }
  struct Adj {
    std::size_t other;
    EdgeKind kind;
    std::size_t edge;
  };
  std::vector<std::vector<Adj>> adj(n);
  for (std::size_t p = 0; p < net.pipelines().size(); ++p) {
    adj[net.pipeline_from(p)].push_back({net.pipeline_to(p), EdgeKind::pipeline, p});
    adj[net.pipeline_to(p)].push_back({net.pipeline_from(p), EdgeKind::pipeline, p});
  }
  for (std::size_t c = 0; c < net.compressors().size(); ++c) {
    adj[net.compressor_from(c)].push_back({net.compressor_to(c), EdgeKind::compressor, c});
    adj[net.compressor_to(c)].push_back({net.compressor_from(c), EdgeKind::compressor, c});
  }
  RootedTree tree;
  const std::size_t none = std::numeric_limits<std::size_t>::max();
  tree.parent.assign(n, none);
  tree.kind.assign(n, EdgeKind::pipeline);
  tree.edge.assign(n, none);
  std::vector<bool> seen(n, false);
  std::queue<std::size_t> queue;
  const std::size_t root = net.source_node(0);
  queue.push(root);
  seen[root] = true;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop();
    tree.order.push_back(u);
    for (const Adj& a : adj[u]) {
      if (seen[a.other]) continue;
      seen[a.other] = true;
      tree.parent[a.other] = u;
      tree.kind[a.other] = a.kind;
      tree.edge[a.other] = a.edge;
      queue.push(a.other);
    }
  }
  if (tree.order.size() != n) throw Error("oracle requires a connected network");
  return tree;
}

struct FlowState {
  std::vector<double> pipe_flow;
  std::vector<double> compressor_flow;
  double slack_output = 0.0;
  bool feasible = true;
};

// Flows implied by balance for fixed non-slack outputs, leaves first.
FlowState balance_flows(const GasNetwork& net, const RootedTree& tree, const std::vector<double>& loads,
                        const std::vector<double>& outputs) {
  FlowState fs;
  fs.pipe_flow.assign(net.pipelines().size(), 0.0);
  fs.compressor_flow.assign(net.compressors().size(), 0.0);
  // excess[v]: supply minus demand of the subtree under v, before its parent edge.
  std::vector<double> excess(net.node_count(), 0.0);
  for (std::size_t g = 0; g < net.node_count(); ++g) excess[g] = -loads[g];
  for (std::size_t s = 1; s < net.sources().size(); ++s) excess[net.source_node(s)] += outputs[s];
  for (std::size_t k = tree.order.size(); k-- > 1;) {
    const std::size_t v = tree.order[k];
    const std::size_t u = tree.parent[v];
    const std::size_t e = tree.edge[v];
    if (tree.kind[v] == EdgeKind::pipeline) {
      const double toward_child = -excess[v];
      fs.pipe_flow[e] = net.pipeline_from(e) == u ? toward_child : -toward_child;
      if (std::abs(fs.pipe_flow[e]) > net.pipelines()[e].f_max) fs.feasible = false;
      excess[u] += excess[v];
    } else {
      const CompressorSpec& comp = net.compressors()[e];
      double fc = 0.0;
      if (net.compressor_from(e) == u) {
        fc = -excess[v];
        excess[u] -= fc * (1.0 + comp.gamma);
      } else {
        fc = excess[v] / (1.0 + comp.gamma);
        excess[u] += fc;
      }
      fs.compressor_flow[e] = fc;
      if (fc < 0.0 || fc > comp.fc_max) fs.feasible = false;
    }
  }
  fs.slack_output = -excess[tree.order.front()];
  const SourceSpec& slack = net.sources().front();
  if (fs.slack_output < slack.g_min || fs.slack_output > slack.g_max) fs.feasible = false;
  return fs;
}

// Grid points base + k * step inside [lo, hi].
std::vector<double> grid_points(double base, double step, double lo, double hi) {
  std::vector<double> out;
  const double k0 = std::max(0.0, std::ceil((lo - base) / step - 1e-9));
  for (double k = k0;; k += 1.0) {
    const double v = base + k * step;
    if (v > hi + 1e-12) break;
    if (v >= lo - 1e-12) out.push_back(v);
  }
  return out;
}

class PressureSearch {
 public:
  PressureSearch(const GasNetwork& net, const RootedTree& tree, const FlowState& flows, double step,
                 std::size_t& evaluations)
      : net_(net), tree_(tree), flows_(flows), step_(step), evaluations_(evaluations), pi_(net.node_count(), 0.0) {}

  bool run() {
    const NodeSpec& root = net_.nodes()[tree_.order.front()];
    for (double v : grid_points(root.pi_min, step_, root.pi_min, root.pi_max)) {
      pi_[tree_.order.front()] = v;
      if (assign(1)) return true;
    }
    return false;
  }

  const std::vector<double>& pressures() const { return pi_; }

 private:
  bool assign(std::size_t k) {
    if (k == tree_.order.size()) {
      ++evaluations_;
      return true;
    }
    const std::size_t v = tree_.order[k];
    const std::size_t u = tree_.parent[v];
    const std::size_t e = tree_.edge[v];
    const NodeSpec& node = net_.nodes()[v];
    if (tree_.kind[v] == EdgeKind::pipeline) {
      const PipelineSpec& pipe = net_.pipelines()[e];
      const double flow_down = net_.pipeline_from(e) == u ? flows_.pipe_flow[e] : -flows_.pipe_flow[e];
      const double c2 = pipe.weymouth_coefficient * pipe.weymouth_coefficient;
      const double sq = pi_[u] * pi_[u] - flow_down * std::abs(flow_down) / c2;
      ++evaluations_;
      if (sq < 0.0) return false;
      const double p = std::sqrt(sq);
      if (p < node.pi_min || p > node.pi_max) return false;
      pi_[v] = p;
      return assign(k + 1);
    }
    const CompressorSpec& comp = net_.compressors()[e];
    double lo = 0.0;
    double hi = 0.0;
    if (net_.compressor_from(e) == u) {
      lo = pi_[u];
      hi = comp.r_max * pi_[u];
    } else {
      lo = pi_[u] / comp.r_max;
      hi = pi_[u];
    }
    for (double p : grid_points(node.pi_min, step_, std::max(lo, node.pi_min), std::min(hi, node.pi_max))) {
      ++evaluations_;
      pi_[v] = p;
      if (assign(k + 1)) return true;
    }
    return false;
  }

  const GasNetwork& net_;
  const RootedTree& tree_;
  const FlowState& flows_;
  double step_;
  std::size_t& evaluations_;
  std::vector<double> pi_;
};

int degrees_of_freedom(const GasNetwork& net) {
  return static_cast<int>(net.compressors().size() + net.sources().size());
}

}  // namespace

bool oracle_supported(const GasNetwork& network) {
  if (network.sources().empty() || degrees_of_freedom(network) > kMaxDegreesOfFreedom) return false;
  try {
    root_tree(network);
  } catch (const Error&) {
    return false;
  }
  return true;
}

SolutionVector oracle_solution(const ProblemInstance& instance, const OracleResult& oracle) {
  if (instance.quasi_dynamic()) throw Error("oracle solutions are steady-state only");
  const GasNetwork& net = instance.network();
  SolutionVector x;
  x.values.assign(instance.variable_count(), 0.0);
  for (std::size_t s = 0; s < net.sources().size(); ++s) x.values[instance.source_output(s)] = oracle.source_outputs.at(s);
  for (std::size_t p = 0; p < net.pipelines().size(); ++p) x.values[instance.pipe_flow(p)] = oracle.pipe_flows.at(p);
  for (std::size_t g = 0; g < net.node_count(); ++g) x.values[instance.pressure(g)] = oracle.pressures.at(g);
  for (std::size_t c = 0; c < net.compressors().size(); ++c) {
    x.values[instance.compressor_flow(c)] = oracle.compressor_flows.at(c);
    x.values[instance.compressor_consumption(c)] = net.compressors()[c].gamma * oracle.compressor_flows.at(c);
  }
  x.objective = instance.objective_value(x.values);
  return x;
}

OracleResult brute_force_oracle(const GasNetwork& network, const Scenario& scenario, double resolution) {
  if (!(resolution > 0.0)) throw ValidationError("resolution", "grid resolution must be positive");
  if (!scenario.steady_state()) throw Error("oracle supports steady-state scenarios only");
  validate_scenario(network, scenario);
  if (network.sources().empty()) throw Error("oracle requires at least one source");
  const int dof = degrees_of_freedom(network);
  if (dof > kMaxDegreesOfFreedom) {
    throw Error("network too large for the grid oracle: " + std::to_string(dof) + " degrees of freedom");
  }
  const RootedTree tree = root_tree(network);
  std::vector<double> loads(network.node_count());
  for (std::size_t g = 0; g < loads.size(); ++g) loads[g] = scenario.lambda[0][g] * network.nodes()[g].base_load;

  OracleResult best;
  best.resolution = resolution;
  best.objective = std::numeric_limits<double>::infinity();
  std::vector<double> outputs(network.sources().size(), 0.0);

  // Odometer over non-slack source outputs.
  std::vector<std::vector<double>> output_grid(network.sources().size());
  for (std::size_t s = 1; s < network.sources().size(); ++s) {
    const SourceSpec& src = network.sources()[s];
    output_grid[s] = grid_points(src.g_min, resolution, src.g_min, src.g_max);
  }
  std::vector<std::size_t> idx(network.sources().size(), 0);
  while (true) {
    for (std::size_t s = 1; s < outputs.size(); ++s) outputs[s] = output_grid[s][idx[s]];
    const FlowState flows = balance_flows(network, tree, loads, outputs);
    if (flows.feasible) {
      outputs[0] = flows.slack_output;
      double cost = 0.0;
      for (std::size_t s = 0; s < outputs.size(); ++s) cost += network.sources()[s].unit_cost * outputs[s];
      if (cost < best.objective) {
        PressureSearch search(network, tree, flows, resolution, best.evaluations);
        if (search.run()) {
          best.objective = cost;
          best.pressures = search.pressures();
          best.source_outputs = outputs;
          best.pipe_flows = flows.pipe_flow;
          best.compressor_flows = flows.compressor_flow;
        }
      }
    }
    std::size_t s = 1;
    while (s < idx.size() && ++idx[s] == output_grid[s].size()) idx[s++] = 0;
    if (s >= idx.size()) break;
  }
  if (best.pressures.empty()) throw Error("no feasible grid point for scenario " + std::to_string(scenario.id));
  return best;
}

}  // namespace ogf

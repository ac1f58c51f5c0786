#include "ogf/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>

#include "ogf/error.hpp"
#include "ogf/random.hpp"

namespace ogf {

namespace {

constexpr double kRootPressure = 60.0;
constexpr int kMaxAttempts = 500;

std::string node_id(int i) { return "n" + std::to_string(i + 1); }

struct Draft {
  std::vector<int> parent;
  std::vector<int> depth;
  std::vector<bool> compressor_edge;  // indexed by child node
  std::vector<std::pair<int, int>> loops;
  std::vector<double> loop_flow;
  std::vector<int> source_nodes;
  std::vector<double> injection;  // design source output per source
  std::vector<double> load;
  std::vector<double> gamma;      // per child node on compressor edges
  std::vector<double> edge_flow;  // per child node, parent -> child
  std::vector<double> pressure;
};

// Returns false when the draw is rejected.
bool draft_network(const SyntheticSpec& spec, Rng& rng, Draft& d) {
  const int n = spec.nodes;
  d.parent.assign(static_cast<std::size_t>(n), -1);
  d.depth.assign(static_cast<std::size_t>(n), 0);
  for (int i = 1; i < n; ++i) {
    const int lo = std::max(0, i - 3);
    const int p = lo + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(i - lo)));
    d.parent[static_cast<std::size_t>(i)] = p;
    d.depth[static_cast<std::size_t>(i)] = d.depth[static_cast<std::size_t>(p)] + 1;
  }

  // Compressors on edges whose child sits at depth 1 or 2.
  d.compressor_edge.assign(static_cast<std::size_t>(n), false);
  d.gamma.assign(static_cast<std::size_t>(n), 0.0);
  std::vector<int> near;
  for (int i = 1; i < n; ++i) {
    if (d.depth[static_cast<std::size_t>(i)] <= 2) near.push_back(i);
  }
  if (static_cast<int>(near.size()) < spec.compressors) return false;
  for (int c = 0; c < spec.compressors; ++c) {
    const std::size_t k = uniform_index(rng, near.size());
    d.compressor_edge[static_cast<std::size_t>(near[k])] = true;
    d.gamma[static_cast<std::size_t>(near[k])] = uniform(rng, 0.01, 0.03);
    near.erase(near.begin() + static_cast<std::ptrdiff_t>(k));
  }

  // Expensive sources on the deepest nodes not directly behind a compressor.
  d.source_nodes = {0};
  std::vector<int> order(static_cast<std::size_t>(n - 1));
  std::iota(order.begin(), order.end(), 1);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return d.depth[static_cast<std::size_t>(a)] > d.depth[static_cast<std::size_t>(b)];
  });
  for (int i : order) {
    if (static_cast<int>(d.source_nodes.size()) == spec.sources) break;
    const bool taken = std::any_of(d.source_nodes.begin(), d.source_nodes.end(), [&](int s) {
      return s == i || d.parent[static_cast<std::size_t>(i)] == s || d.parent[static_cast<std::size_t>(s)] == i;
    });
    if (!taken) d.source_nodes.push_back(i);
  }
  if (static_cast<int>(d.source_nodes.size()) < spec.sources) return false;

  d.load.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 1; i < n; ++i) d.load[static_cast<std::size_t>(i)] = uniform(rng, 5.0, 20.0);
  const double total = std::accumulate(d.load.begin(), d.load.end(), 0.0);
  d.injection.assign(static_cast<std::size_t>(spec.sources), 0.0);
  for (std::size_t s = 1; s < d.injection.size(); ++s) d.injection[s] = uniform(rng, 0.12, 0.22) * total;

  // Loop pipelines between non-adjacent nodes of similar depth.
  auto adjacent = [&](int a, int b) {
    if (d.parent[static_cast<std::size_t>(a)] == b || d.parent[static_cast<std::size_t>(b)] == a) return true;
    return std::any_of(d.loops.begin(), d.loops.end(), [&](const auto& l) {
      return (l.first == a && l.second == b) || (l.first == b && l.second == a);
    });
  };
  for (int l = 0; l < spec.loops; ++l) {
    bool placed = false;
    for (int tries = 0; tries < 100 && !placed; ++tries) {
      const int a = 1 + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(n - 1)));
      const int b = 1 + static_cast<int>(uniform_index(rng, static_cast<std::size_t>(n - 1)));
      if (a == b || adjacent(a, b)) continue;
      if (std::abs(d.depth[static_cast<std::size_t>(a)] - d.depth[static_cast<std::size_t>(b)]) > 2) continue;
      // Orient from the shallower endpoint.
      const bool forward = d.depth[static_cast<std::size_t>(a)] < d.depth[static_cast<std::size_t>(b)] ||
                           (d.depth[static_cast<std::size_t>(a)] == d.depth[static_cast<std::size_t>(b)] && a < b);
      d.loops.emplace_back(forward ? a : b, forward ? b : a);
      d.loop_flow.push_back(uniform(rng, 2.0, 8.0));
      placed = true;
    }
    if (!placed) return false;
  }

  // Net demand of every subtree, children before parents.
  std::vector<double> demand(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) demand[static_cast<std::size_t>(i)] = d.load[static_cast<std::size_t>(i)];
  for (std::size_t s = 1; s < d.source_nodes.size(); ++s) {
    demand[static_cast<std::size_t>(d.source_nodes[s])] -= d.injection[s];
  }
  for (std::size_t l = 0; l < d.loops.size(); ++l) {
    demand[static_cast<std::size_t>(d.loops[l].first)] += d.loop_flow[l];
    demand[static_cast<std::size_t>(d.loops[l].second)] -= d.loop_flow[l];
  }
  d.edge_flow.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = n - 1; i >= 1; --i) {
    const auto k = static_cast<std::size_t>(i);
    const double f = demand[k];
    if (std::abs(f) < 2.0) return false;  // keep every flow direction unambiguous
    if (d.compressor_edge[k] && f < 0.0) return false;
    d.edge_flow[k] = f;
    demand[static_cast<std::size_t>(d.parent[k])] += d.compressor_edge[k] ? f * (1.0 + d.gamma[k]) : f;
  }
  if (demand[0] < 0.3 * total) return false;

  // Pressures drop along the flow on pipelines and rise across compressors.
  d.pressure.assign(static_cast<std::size_t>(n), 0.0);
  d.pressure[0] = kRootPressure;
  for (int i = 1; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double up = d.pressure[static_cast<std::size_t>(d.parent[k])];
    if (d.compressor_edge[k]) {
      d.pressure[k] = up * uniform(rng, 1.15, 1.3);
    } else {
      const double r = 1.0 - uniform(rng, 0.04, 0.1);
      d.pressure[k] = d.edge_flow[k] > 0.0 ? up * r : up / r;
    }
  }
  for (const auto& [a, b] : d.loops) {
    const double hi = d.pressure[static_cast<std::size_t>(a)];
    const double lo = d.pressure[static_cast<std::size_t>(b)];
    if (hi < 1.02 * lo) return false;
  }
  return true;
}

GasNetwork materialize(const SyntheticSpec& spec, Rng& rng, const Draft& d) {
  const int n = spec.nodes;
  std::vector<NodeSpec> nodes;
  for (int i = 0; i < n; ++i) {
    const double p = d.pressure[static_cast<std::size_t>(i)];
    nodes.push_back({node_id(i), spec.pressure_floor * p, i == 0 ? p : spec.pressure_ceiling * p, d.load[static_cast<std::size_t>(i)]});
  }
  std::vector<PipelineSpec> pipes;
  std::vector<CompressorSpec> comps;
  auto pipe = [&](int a, int b, double f) {
    const double pa = d.pressure[static_cast<std::size_t>(a)];
    const double pb = d.pressure[static_cast<std::size_t>(b)];
    const double c = f / std::sqrt(pa * pa - pb * pb);
    pipes.push_back({"p" + std::to_string(pipes.size() + 1), node_id(a), node_id(b), c, 2.5 * f, uniform(rng, 0.5, 2.0)});
  };
  for (int i = 1; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (d.compressor_edge[k]) {
      const double ratio = d.pressure[k] / d.pressure[static_cast<std::size_t>(d.parent[k])];
      comps.push_back({"c" + std::to_string(comps.size() + 1), node_id(d.parent[k]), node_id(i), d.gamma[k],
                       ratio * 1.1, 2.5 * d.edge_flow[k]});
    } else {
      if (d.edge_flow[k] > 0.0) {
        pipe(d.parent[k], i, d.edge_flow[k]);
      } else {
        pipe(i, d.parent[k], -d.edge_flow[k]);
      }
    }
  }
  for (std::size_t l = 0; l < d.loops.size(); ++l) pipe(d.loops[l].first, d.loops[l].second, d.loop_flow[l]);

  std::vector<SourceSpec> sources;
  const double total = std::accumulate(d.load.begin(), d.load.end(), 0.0);
  const double costs[] = {1.0, 1.6, 2.2, 2.8};
  for (std::size_t s = 0; s < d.source_nodes.size(); ++s) {
    const double g_max = s == 0 ? 3.0 * total : 2.0 * d.injection[s];
    sources.push_back({"s" + std::to_string(s + 1), node_id(d.source_nodes[s]), spec.cost_scale * costs[std::min<std::size_t>(s, 3)],
                       0.0, g_max});
  }
  return GasNetwork(spec.name, std::move(nodes), std::move(pipes), std::move(comps), std::move(sources));
}

}  // namespace

GasNetwork generate_network(const SyntheticSpec& spec) {
  if (spec.nodes < 3) throw ValidationError(spec.name, "synthetic network needs at least 3 nodes");
  if (spec.sources < 1 || spec.sources >= spec.nodes) throw ValidationError(spec.name, "invalid source count");
  if (spec.compressors < 0 || spec.loops < 0) throw ValidationError(spec.name, "negative element count");
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(attempt)));
    Draft d;
    if (draft_network(spec, rng, d)) return materialize(spec, rng, d);
  }
  throw ValidationError(spec.name, "no consistent synthetic network found for this seed");
}

GasNetwork tiny_t1() {
  return GasNetwork("T1", {{"1", 1.0, 10.0, 0.0}, {"2", 1.0, 10.0, 3.0}}, {{"12", "1", "2", 1.0, 10.0, 0.0}}, {},
                    {{"s1", "1", 1.0, 0.0, 10.0}});
}

GasNetwork tiny_t2() {
  return GasNetwork("T2", {{"1", 1.0, 10.0, 0.0}, {"2", 1.0, 10.0, 0.0}, {"3", 1.0, 10.0, 2.0}},
                    {{"12", "1", "2", 1.0, 10.0, 0.0}}, {{"c23", "2", "3", 0.01, 2.0, 10.0}},
                    {{"s1", "1", 1.0, 0.0, 10.0}});
}

GasNetwork synthetic_net7() { return generate_network({"net7", 7, 2, 1, 1, 7}); }

GasNetwork synthetic_net20() { return generate_network({"net20", 20, 3, 2, 2, 22}); }

GasNetwork resolve_network(std::string_view name_or_path) {
  if (name_or_path == "t1") return tiny_t1();
  if (name_or_path == "t2") return tiny_t2();
  if (name_or_path == "net7") return synthetic_net7();
  if (name_or_path == "net20") return synthetic_net20();
  return load_network_file(std::filesystem::path(name_or_path));
}

}  // namespace ogf

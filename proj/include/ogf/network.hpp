#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ogf {

struct NodeSpec {
  std::string id;
  double pi_min = 0.0;
  double pi_max = 0.0;
  double base_load = 0.0;

  bool operator==(const NodeSpec&) const = default;
};

/// Bidirectional pipeline. `weymouth_coefficient` is C in F|F| = C^2 (pi_m^2 - pi_n^2);
/// `linepack_coefficient` is H in M = H (pi_m + pi_n) / 2.
struct PipelineSpec {
  std::string id;
  std::string from_node;
  std::string to_node;
  double weymouth_coefficient = 0.0;
  double f_max = 0.0;
  double linepack_coefficient = 0.0;

  bool operator==(const PipelineSpec&) const = default;
};

/// Directed compressor from_node -> to_node consuming `gamma` of its throughput.
struct CompressorSpec {
  std::string id;
  std::string from_node;
  std::string to_node;
  double gamma = 0.0;
  double r_max = 1.0;
  double fc_max = 0.0;

  bool operator==(const CompressorSpec&) const = default;
};

struct SourceSpec {
  std::string id;
  std::string node;
  double unit_cost = 0.0;
  double g_min = 0.0;
  double g_max = 0.0;

  bool operator==(const SourceSpec&) const = default;
};

struct Units {
  std::string pressure = "Psig";
  std::string flow = "kcf";

  bool operator==(const Units&) const = default;
};

/// Immutable gas network. The constructor validates every invariant and throws
/// ValidationError naming the offending element.
class GasNetwork {
 public:
  GasNetwork(std::string name, std::vector<NodeSpec> nodes, std::vector<PipelineSpec> pipelines,
             std::vector<CompressorSpec> compressors, std::vector<SourceSpec> sources, Units units = {});

  const std::string& name() const noexcept { return name_; }
  const std::vector<NodeSpec>& nodes() const noexcept { return nodes_; }
  const std::vector<PipelineSpec>& pipelines() const noexcept { return pipelines_; }
  const std::vector<CompressorSpec>& compressors() const noexcept { return compressors_; }
  const std::vector<SourceSpec>& sources() const noexcept { return sources_; }
  const Units& units() const noexcept { return units_; }

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t node_index(std::string_view id) const;
  std::optional<std::size_t> find_node(std::string_view id) const;

  // Endpoint node indices, resolved once at construction.
  std::size_t pipeline_from(std::size_t p) const { return pipe_ends_[p].first; }
  std::size_t pipeline_to(std::size_t p) const { return pipe_ends_[p].second; }
  std::size_t compressor_from(std::size_t c) const { return comp_ends_[c].first; }
  std::size_t compressor_to(std::size_t c) const { return comp_ends_[c].second; }
  std::size_t source_node(std::size_t s) const { return source_nodes_[s]; }

  bool operator==(const GasNetwork& other) const;

 private:
  void validate();

  std::string name_;
  std::vector<NodeSpec> nodes_;
  std::vector<PipelineSpec> pipelines_;
  std::vector<CompressorSpec> compressors_;
  std::vector<SourceSpec> sources_;
  Units units_;

  std::unordered_map<std::string, std::size_t> node_lookup_;
  std::vector<std::pair<std::size_t, std::size_t>> pipe_ends_;
  std::vector<std::pair<std::size_t, std::size_t>> comp_ends_;
  std::vector<std::size_t> source_nodes_;
};

/// Parses the JSON network document (keys `nodes`, `pipelines`, `compressors`,
/// `sources`, `units`, optional `name`). Throws ParseError or ValidationError.
GasNetwork load_network(std::string_view source_text);
GasNetwork load_network_file(const std::filesystem::path& path);

std::string serialize_network(const GasNetwork& network);

/// One optimization instance: load multipliers per time slot and node, plus the
/// initial linepack per pipeline for multi-period instances.
struct Scenario {
  int id = 0;
  // lambda[t][g] for slot t (0-based) and node index g.
  std::vector<std::vector<double>> lambda;
  // Pipeline id -> initial linepack M_{mn,0}. Only used when horizon() >= 2.
  std::unordered_map<std::string, double> initial_linepack;

  int horizon() const noexcept { return static_cast<int>(lambda.size()); }
  bool steady_state() const noexcept { return lambda.size() == 1; }

  bool operator==(const Scenario&) const = default;
};

/// Unit multipliers for every node over `horizon` slots.
Scenario nominal_scenario(const GasNetwork& network, int horizon = 1, int id = 0);

/// Throws ValidationError if the scenario does not fit the network or has a
/// non-positive multiplier.
void validate_scenario(const GasNetwork& network, const Scenario& scenario);

/// Draws every multiplier independently and uniformly from [1-f, 1+f].
std::vector<Scenario> sample_scenarios(const GasNetwork& network, int count, double fluctuation, int horizon,
                                       std::uint64_t seed);

/// CSV with header `scenario_id,node_id,time_slot,lambda` (time slots are 1-based).
std::string write_scenarios_csv(const GasNetwork& network, const std::vector<Scenario>& scenarios);
std::vector<Scenario> read_scenarios_csv(const GasNetwork& network, std::string_view text);

}  // namespace ogf

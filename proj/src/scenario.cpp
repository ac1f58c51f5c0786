#include <map>
#include <sstream>

#include "ogf/error.hpp"
#include "ogf/network.hpp"
#include "ogf/random.hpp"
#include "ogf/text.hpp"

namespace ogf {

Scenario nominal_scenario(const GasNetwork& network, int horizon, int id) {
  if (horizon < 1) throw ValidationError("", "horizon must be >= 1");
  Scenario s;
  s.id = id;
  s.lambda.assign(static_cast<std::size_t>(horizon), std::vector<double>(network.node_count(), 1.0));
  return s;
}

void validate_scenario(const GasNetwork& network, const Scenario& scenario) {
  if (scenario.horizon() < 1) throw ValidationError("", "scenario horizon must be >= 1");
  for (const auto& slot : scenario.lambda) {
    if (slot.size() != network.node_count()) {
      throw ValidationError("", "scenario covers " + std::to_string(slot.size()) + " nodes, network has " +
                                    std::to_string(network.node_count()));
    }
    for (std::size_t g = 0; g < slot.size(); ++g) {
      if (!(slot[g] > 0.0)) throw ValidationError(network.nodes()[g].id, "load multiplier must be > 0");
    }
  }
}

std::vector<Scenario> sample_scenarios(const GasNetwork& network, int count, double fluctuation, int horizon,
                                       std::uint64_t seed) {
  if (count < 1) throw ValidationError("", "scenario count must be >= 1");
  if (!(fluctuation >= 0.0 && fluctuation < 1.0)) throw ValidationError("", "fluctuation must lie in [0, 1)");
  if (horizon < 1) throw ValidationError("", "horizon must be >= 1");
  Rng rng(seed);
  std::vector<Scenario> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    Scenario s = nominal_scenario(network, horizon, k);
    for (auto& slot : s.lambda) {
      for (double& lambda : slot) lambda = uniform(rng, 1.0 - fluctuation, 1.0 + fluctuation);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string write_scenarios_csv(const GasNetwork& network, const std::vector<Scenario>& scenarios) {
  std::ostringstream out;
  out << "scenario_id,node_id,time_slot,lambda\n";
  for (const Scenario& s : scenarios) {
    for (std::size_t t = 0; t < s.lambda.size(); ++t) {
      for (std::size_t g = 0; g < network.node_count(); ++g) {
        out << s.id << ',' << network.nodes()[g].id << ',' << (t + 1) << ',' << format_double(s.lambda[t][g])
            << '\n';
      }
    }
  }
  return out.str();
}

std::vector<Scenario> read_scenarios_csv(const GasNetwork& network, std::string_view text) {
  const auto rows = lines(text);
  if (rows.empty() || rows.front() != "scenario_id,node_id,time_slot,lambda") {
    throw ParseError("scenario CSV must start with header 'scenario_id,node_id,time_slot,lambda'");
  }
  // scenario id -> slot -> node -> lambda
  std::map<int, std::map<int, std::map<std::size_t, double>>> entries;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto cols = split(rows[r], ',');
    if (cols.size() != 4) throw ParseError("scenario CSV line " + std::to_string(r + 1) + ": expected 4 columns");
    const int id = static_cast<int>(parse_double(cols[0]));
    const auto node = network.find_node(cols[1]);
    if (!node) throw ValidationError(std::string(cols[1]), "scenario references unknown node");
    const int slot = static_cast<int>(parse_double(cols[2]));
    if (slot < 1) throw ParseError("time_slot must be >= 1");
    if (!entries[id][slot].emplace(*node, parse_double(cols[3])).second) {
      throw ParseError("duplicate scenario entry on line " + std::to_string(r + 1));
    }
  }
  std::vector<Scenario> out;
  for (const auto& [id, slots] : entries) {
    Scenario s;
    s.id = id;
    int expected = 1;
    for (const auto& [slot, nodes] : slots) {
      if (slot != expected++) throw ParseError("scenario " + std::to_string(id) + " has non-contiguous slots");
      if (nodes.size() != network.node_count()) {
        throw ParseError("scenario " + std::to_string(id) + " slot " + std::to_string(slot) + " misses nodes");
      }
      std::vector<double> values;
      for (const auto& [g, lambda] : nodes) values.push_back(lambda);
      s.lambda.push_back(std::move(values));
    }
    validate_scenario(network, s);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace ogf

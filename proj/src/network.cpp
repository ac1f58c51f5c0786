#include "ogf/network.hpp"

#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "ogf/error.hpp"

namespace ogf {

namespace {

using nlohmann::json;

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t v) {
  while (parent[v] != v) {
    parent[v] = parent[parent[v]];
    v = parent[v];
  }
  return v;
}

std::string id_field(const json& obj, const char* key) {
  if (!obj.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
  const json& v = obj.at(key);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw ParseError(std::string("field '") + key + "' must be a string or integer id");
}

double number_field(const json& obj, const char* key) {
  if (!obj.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
  const json& v = obj.at(key);
  if (!v.is_number()) throw ParseError(std::string("field '") + key + "' must be numeric");
  return v.get<double>();
}

double number_field_or(const json& obj, const char* key, double fallback) {
  return obj.contains(key) ? number_field(obj, key) : fallback;
}

const json& array_field(const json& doc, const char* key) {
  static const json empty = json::array();
  if (!doc.contains(key)) return empty;
  const json& v = doc.at(key);
  if (!v.is_array()) throw ParseError(std::string("'") + key + "' must be an array");
  return v;
}

}  // namespace

GasNetwork::GasNetwork(std::string name, std::vector<NodeSpec> nodes, std::vector<PipelineSpec> pipelines,
                       std::vector<CompressorSpec> compressors, std::vector<SourceSpec> sources, Units units)
    : name_(std::move(name)),
      nodes_(std::move(nodes)),
      pipelines_(std::move(pipelines)),
      compressors_(std::move(compressors)),
      sources_(std::move(sources)),
      units_(std::move(units)) {
  validate();
}

void GasNetwork::validate() {
  if (nodes_.empty()) throw ValidationError("", "network has no nodes");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const NodeSpec& n = nodes_[i];
    if (!node_lookup_.emplace(n.id, i).second) throw ValidationError(n.id, "duplicate node id");
    if (!(n.pi_min >= 0.0)) throw ValidationError(n.id, "pi_min must be >= 0");
    if (!(n.pi_min < n.pi_max)) throw ValidationError(n.id, "pi_min must be < pi_max");
    if (!(n.base_load >= 0.0)) throw ValidationError(n.id, "base_load must be >= 0");
  }

  auto resolve = [this](const std::string& element, const std::string& node) {
    auto it = node_lookup_.find(node);
    if (it == node_lookup_.end()) throw ValidationError(element, "references unknown node " + node);
    return it->second;
  };

  std::unordered_set<std::string> ids;
  for (const PipelineSpec& p : pipelines_) {
    if (!ids.insert(p.id).second) throw ValidationError(p.id, "duplicate pipeline id");
    const std::size_t m = resolve(p.id, p.from_node);
    const std::size_t n = resolve(p.id, p.to_node);
    if (m == n) throw ValidationError(p.id, "pipeline endpoints must differ");
    if (!(p.weymouth_coefficient > 0.0)) throw ValidationError(p.id, "weymouth_coefficient must be > 0");
    if (!(p.f_max > 0.0)) throw ValidationError(p.id, "f_max must be > 0");
    if (!(p.linepack_coefficient >= 0.0)) throw ValidationError(p.id, "linepack_coefficient must be >= 0");
    pipe_ends_.emplace_back(m, n);
  }

  ids.clear();
  for (const CompressorSpec& c : compressors_) {
    if (!ids.insert(c.id).second) throw ValidationError(c.id, "duplicate compressor id");
    const std::size_t i = resolve(c.id, c.from_node);
    const std::size_t j = resolve(c.id, c.to_node);
    if (i == j) throw ValidationError(c.id, "compressor endpoints must differ");
    if (!(c.gamma >= 0.0 && c.gamma < 1.0)) throw ValidationError(c.id, "gamma must lie in [0, 1)");
    if (!(c.r_max >= 1.0)) throw ValidationError(c.id, "r_max must be >= 1");
    if (!(c.fc_max > 0.0)) throw ValidationError(c.id, "fc_max must be > 0");
    comp_ends_.emplace_back(i, j);
  }

  if (sources_.empty()) throw ValidationError("", "network has no sources");
  ids.clear();
  for (const SourceSpec& s : sources_) {
    if (!ids.insert(s.id).second) throw ValidationError(s.id, "duplicate source id");
    source_nodes_.push_back(resolve(s.id, s.node));
    if (!(s.unit_cost >= 0.0)) throw ValidationError(s.id, "unit_cost must be >= 0");
    if (!(s.g_min >= 0.0 && s.g_min <= s.g_max)) throw ValidationError(s.id, "require 0 <= g_min <= g_max");
  }

  std::vector<std::size_t> parent(nodes_.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto unite = [&](std::size_t a, std::size_t b) { parent[find_root(parent, a)] = find_root(parent, b); };
  for (const auto& [a, b] : pipe_ends_) unite(a, b);
  for (const auto& [a, b] : comp_ends_) unite(a, b);
  const std::size_t root = find_root(parent, 0);
  for (std::size_t v = 0; v < nodes_.size(); ++v) {
    if (find_root(parent, v) != root) throw ValidationError(nodes_[v].id, "network is not connected");
  }
}

std::size_t GasNetwork::node_index(std::string_view id) const {
  auto idx = find_node(id);
  if (!idx) throw ValidationError(std::string(id), "unknown node");
  return *idx;
}

std::optional<std::size_t> GasNetwork::find_node(std::string_view id) const {
  auto it = node_lookup_.find(std::string(id));
  if (it == node_lookup_.end()) return std::nullopt;
  return it->second;
}

bool GasNetwork::operator==(const GasNetwork& other) const {
  return name_ == other.name_ && nodes_ == other.nodes_ && pipelines_ == other.pipelines_ &&
         compressors_ == other.compressors_ && sources_ == other.sources_ && units_ == other.units_;
}

GasNetwork load_network(std::string_view source_text) {
  json doc;
  try {
    doc = json::parse(source_text.begin(), source_text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("network document: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("network document must be a JSON object");

  std::vector<NodeSpec> nodes;
  for (const json& n : array_field(doc, "nodes")) {
    nodes.push_back({id_field(n, "id"), number_field(n, "pi_min"), number_field(n, "pi_max"),
                     number_field_or(n, "base_load", 0.0)});
  }
  std::vector<PipelineSpec> pipes;
  for (const json& p : array_field(doc, "pipelines")) {
    pipes.push_back({id_field(p, "id"), id_field(p, "from_node"), id_field(p, "to_node"),
                     number_field(p, "weymouth_coefficient"), number_field(p, "f_max"),
                     number_field_or(p, "linepack_coefficient", 0.0)});
  }
  std::vector<CompressorSpec> comps;
  for (const json& c : array_field(doc, "compressors")) {
    comps.push_back({id_field(c, "id"), id_field(c, "from_node"), id_field(c, "to_node"), number_field(c, "gamma"),
                     number_field(c, "r_max"), number_field(c, "fc_max")});
  }
  std::vector<SourceSpec> sources;
  for (const json& s : array_field(doc, "sources")) {
    sources.push_back({id_field(s, "id"), id_field(s, "node"), number_field(s, "unit_cost"),
                       number_field(s, "g_min"), number_field(s, "g_max")});
  }
  Units units;
  if (doc.contains("units")) {
    const json& u = doc.at("units");
    if (!u.is_object()) throw ParseError("'units' must be an object");
    if (u.contains("pressure")) units.pressure = u.at("pressure").get<std::string>();
    if (u.contains("flow")) units.flow = u.at("flow").get<std::string>();
  }
  std::string name = doc.contains("name") ? doc.at("name").get<std::string>() : std::string{};
  return GasNetwork(std::move(name), std::move(nodes), std::move(pipes), std::move(comps), std::move(sources),
                    std::move(units));
}

GasNetwork load_network_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open network file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_network(buffer.str());
}

std::string serialize_network(const GasNetwork& network) {
  json doc;
  doc["name"] = network.name();
  doc["units"] = {{"pressure", network.units().pressure}, {"flow", network.units().flow}};
  doc["nodes"] = json::array();
  for (const NodeSpec& n : network.nodes()) {
    doc["nodes"].push_back({{"id", n.id}, {"pi_min", n.pi_min}, {"pi_max", n.pi_max}, {"base_load", n.base_load}});
  }
  doc["pipelines"] = json::array();
  for (const PipelineSpec& p : network.pipelines()) {
    doc["pipelines"].push_back({{"id", p.id},
                                {"from_node", p.from_node},
                                {"to_node", p.to_node},
                                {"weymouth_coefficient", p.weymouth_coefficient},
                                {"f_max", p.f_max},
                                {"linepack_coefficient", p.linepack_coefficient}});
  }
  doc["compressors"] = json::array();
  for (const CompressorSpec& c : network.compressors()) {
    doc["compressors"].push_back({{"id", c.id},
                                  {"from_node", c.from_node},
                                  {"to_node", c.to_node},
                                  {"gamma", c.gamma},
                                  {"r_max", c.r_max},
                                  {"fc_max", c.fc_max}});
  }
  doc["sources"] = json::array();
  for (const SourceSpec& s : network.sources()) {
    doc["sources"].push_back(
        {{"id", s.id}, {"node", s.node}, {"unit_cost", s.unit_cost}, {"g_min", s.g_min}, {"g_max", s.g_max}});
  }
  return doc.dump(2) + "\n";
}

}  // namespace ogf

#include <algorithm>
#include <sstream>

#include "ogf/ann.hpp"
#include "ogf/error.hpp"
#include "ogf/text.hpp"

namespace ogf {

namespace {

constexpr std::string_view kModelHeader = "ogf-mlp 1";

void write_vector(std::ostringstream& out, std::string_view key, const Eigen::VectorXd& v) {
  out << key;
  for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << format_double(v[i]);
  out << '\n';
}

// Sequential reader over whitespace-separated tokens, one line at a time.
class LineReader {
 public:
  explicit LineReader(std::string_view text) : lines_(lines(text)) {}

  std::vector<std::string_view> next(std::string_view expected_key) {
    if (pos_ >= lines_.size()) throw ParseError("model file ends early; expected '" + std::string(expected_key) + "'");
    std::vector<std::string_view> tokens;
    for (std::string_view t : split(lines_[pos_++], ' ')) {
      if (!t.empty()) tokens.push_back(t);
    }
    if (tokens.empty() || tokens.front() != expected_key) {
      throw ParseError("model file line " + std::to_string(pos_) + ": expected '" + std::string(expected_key) + "'");
    }
    return tokens;
  }

  bool done() const { return pos_ >= lines_.size(); }

 private:
  std::vector<std::string_view> lines_;
  std::size_t pos_ = 0;
};

int parse_int(std::string_view text) {
  const double v = parse_double(text);
  if (v != static_cast<double>(static_cast<int>(v))) throw ParseError("expected an integer, got '" + std::string(text) + "'");
  return static_cast<int>(v);
}

Eigen::VectorXd parse_vector(const std::vector<std::string_view>& tokens, Eigen::Index expected) {
  if (static_cast<Eigen::Index>(tokens.size()) - 1 != expected) {
    throw ParseError("vector '" + std::string(tokens.front()) + "' has the wrong length");
  }
  Eigen::VectorXd v(expected);
  for (Eigen::Index i = 0; i < expected; ++i) v[i] = parse_double(tokens[static_cast<std::size_t>(i) + 1]);
  return v;
}

}  // namespace

std::string write_model(const PressureModel& model) {
  std::ostringstream out;
  out << kModelHeader << '\n';
  out << "nodes " << model.nodes() << '\n';
  out << "horizon " << model.horizon() << '\n';
  write_vector(out, "input_mean", model.input_normalizer().mean);
  write_vector(out, "input_scale", model.input_normalizer().scale);
  for (const PressureModel::Slot& slot : model.slots()) {
    out << "sizes";
    for (int s : slot.mlp.sizes()) out << ' ' << s;
    out << '\n';
    write_vector(out, "output_mean", slot.output.mean);
    write_vector(out, "output_scale", slot.output.scale);
    for (const Layer& layer : slot.mlp.layers()) {
      for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) write_vector(out, "w", layer.weights.row(r).transpose());
      write_vector(out, "b", layer.bias);
    }
  }
  return out.str();
}

PressureModel read_model(std::string_view text) {
  const std::vector<std::string_view> all = lines(text);
  if (all.empty() || all.front() != kModelHeader) throw ParseError("not an ogf-mlp 1 model file");
  LineReader reader(text);
  reader.next("ogf-mlp");
  const auto nodes_line = reader.next("nodes");
  const auto horizon_line = reader.next("horizon");
  if (nodes_line.size() != 2 || horizon_line.size() != 2) throw ParseError("malformed model dimensions");
  const int nodes = parse_int(nodes_line[1]);
  const int horizon = parse_int(horizon_line[1]);
  if (nodes <= 0 || horizon <= 0) throw ParseError("model dimensions must be positive");
  const Eigen::Index width = static_cast<Eigen::Index>(nodes) * horizon;
  Normalizer input;
  input.mean = parse_vector(reader.next("input_mean"), width);
  input.scale = parse_vector(reader.next("input_scale"), width);

  std::vector<PressureModel::Slot> slots;
  for (int t = 0; t < horizon; ++t) {
    const auto size_tokens = reader.next("sizes");
    std::vector<int> sizes;
    for (std::size_t i = 1; i < size_tokens.size(); ++i) sizes.push_back(parse_int(size_tokens[i]));
    PressureModel::Slot slot;
    slot.mlp = Mlp(sizes);
    slot.output.mean = parse_vector(reader.next("output_mean"), sizes.back());
    slot.output.scale = parse_vector(reader.next("output_scale"), sizes.back());
    for (Layer& layer : slot.mlp.layers()) {
      for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
        layer.weights.row(r) = parse_vector(reader.next("w"), layer.weights.cols()).transpose();
      }
      layer.bias = parse_vector(reader.next("b"), layer.bias.size());
    }
    slots.push_back(std::move(slot));
  }
  if (!reader.done()) throw ParseError("trailing content after the last model slot");
  return PressureModel(nodes, horizon, std::move(input), std::move(slots));
}

// Columns: scenario_id, objective, split (train/test/none), lambda_<t>_<g>...,
// pi_<t>_<g>... with 1-based slot and 0-based node index.
std::string dataset_to_csv(const Dataset& data) {
  data.validate();
  std::vector<std::string> split_of(data.size(), "none");
  for (std::size_t r : data.train_rows) split_of[r] = "train";
  for (std::size_t r : data.test_rows) split_of[r] = "test";
  std::ostringstream out;
  out << "scenario_id,objective,split";
  for (const char* prefix : {"lambda", "pi"}) {
    for (int t = 0; t < data.horizon; ++t) {
      for (int g = 0; g < data.nodes; ++g) out << ',' << prefix << '_' << (t + 1) << '_' << g;
    }
  }
  out << '\n';
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    out << data.scenario_ids[r] << ',' << format_double(data.objectives[r]) << ',' << split_of[r];
    for (Eigen::Index j = 0; j < data.inputs.cols(); ++j) out << ',' << format_double(data.inputs(row, j));
    for (Eigen::Index j = 0; j < data.targets.cols(); ++j) out << ',' << format_double(data.targets(row, j));
    out << '\n';
  }
  return out.str();
}

Dataset dataset_from_csv(std::string_view text) {
  const std::vector<std::string_view> rows = lines(text);
  if (rows.empty()) throw ParseError("dataset CSV is empty");
  const std::vector<std::string_view> header = split(rows.front(), ',');
  if (header.size() < 5 || header[0] != "scenario_id" || header[1] != "objective" || header[2] != "split") {
    throw ParseError("dataset CSV header must start with scenario_id,objective,split");
  }
  Dataset data;
  int lambda_cols = 0;
  for (std::size_t j = 3; j < header.size(); ++j) {
    const std::vector<std::string_view> parts = split(header[j], '_');
    if (parts.size() != 3 || (parts[0] != "lambda" && parts[0] != "pi")) {
      throw ParseError("unexpected dataset column '" + std::string(header[j]) + "'");
    }
    if (parts[0] == "lambda") {
      ++lambda_cols;
      data.horizon = std::max(data.horizon, parse_int(parts[1]));
      data.nodes = std::max(data.nodes, parse_int(parts[2]) + 1);
    }
  }
  if (lambda_cols == 0 || static_cast<std::size_t>(2 * lambda_cols) != header.size() - 3 ||
      lambda_cols != data.nodes * data.horizon) {
    throw ParseError("dataset CSV needs matching lambda and pi column blocks");
  }
  const auto n = static_cast<Eigen::Index>(rows.size() - 1);
  data.inputs.resize(n, lambda_cols);
  data.targets.resize(n, lambda_cols);
  for (Eigen::Index r = 0; r < n; ++r) {
    const std::vector<std::string_view> cells = split(rows[static_cast<std::size_t>(r) + 1], ',');
    if (cells.size() != header.size()) throw ParseError("dataset row " + std::to_string(r + 1) + " has the wrong width");
    data.scenario_ids.push_back(parse_int(cells[0]));
    data.objectives.push_back(parse_double(cells[1]));
    if (cells[2] == "train") {
      data.train_rows.push_back(static_cast<std::size_t>(r));
    } else if (cells[2] == "test") {
      data.test_rows.push_back(static_cast<std::size_t>(r));
    } else if (cells[2] != "none") {
      throw ParseError("unknown split '" + std::string(cells[2]) + "'");
    }
    for (Eigen::Index j = 0; j < lambda_cols; ++j) {
      data.inputs(r, j) = parse_double(cells[static_cast<std::size_t>(3 + j)]);
      data.targets(r, j) = parse_double(cells[static_cast<std::size_t>(3 + lambda_cols + j)]);
    }
  }
  data.validate();
  return data;
}

}  // namespace ogf

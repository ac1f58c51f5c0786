#include "ogf/ann.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ogf/error.hpp"
#include "ogf/random.hpp"

namespace ogf {

namespace {

void check_sizes(const std::vector<int>& sizes) {
  if (sizes.size() < 3) throw DimensionError("an Mlp needs an input, at least one hidden and an output layer");
  for (int s : sizes) {
    if (s <= 0) throw DimensionError("layer sizes must be positive");
  }
}

Eigen::VectorXd relu(const Eigen::VectorXd& v) { return v.cwiseMax(0.0); }

// Pre-activations and activations of every layer for one sample.
struct Trace {
  std::vector<Eigen::VectorXd> pre;   // z_l, l = 1..L
  std::vector<Eigen::VectorXd> post;  // a_0 = input, a_l = ReLU(z_l) (a_L = z_L)
};

Trace run(const Mlp& model, const Eigen::VectorXd& input) {
  if (input.size() != model.input_size()) throw DimensionError("input size does not match the model");
  Trace tr;
  tr.post.push_back(input);
  const std::size_t depth = model.layers().size();
  for (std::size_t l = 0; l < depth; ++l) {
    const Layer& layer = model.layers()[l];
    Eigen::VectorXd z = layer.weights.transpose() * tr.post.back() + layer.bias;
    tr.post.push_back(l + 1 == depth ? z : relu(z));
    tr.pre.push_back(std::move(z));
  }
  return tr;
}

void accumulate(Gradients& into, const Gradients& g, double weight) {
  for (std::size_t l = 0; l < into.size(); ++l) {
    into[l].weights += weight * g[l].weights;
    into[l].bias += weight * g[l].bias;
  }
}

Gradients zero_like(const Mlp& model) {
  Gradients g;
  for (const Layer& layer : model.layers()) {
    g.push_back({Eigen::MatrixXd::Zero(layer.weights.rows(), layer.weights.cols()),
                 Eigen::VectorXd::Zero(layer.bias.size())});
  }
  return g;
}

}  // namespace

Mlp::Mlp(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  check_sizes(sizes_);
  for (std::size_t l = 1; l < sizes_.size(); ++l) {
    layers_.push_back({Eigen::MatrixXd::Zero(sizes_[l - 1], sizes_[l]), Eigen::VectorXd::Zero(sizes_[l])});
  }
}

Mlp Mlp::random(std::vector<int> sizes, std::uint64_t seed) {
  Mlp model(std::move(sizes));
  Rng rng(seed);
  for (Layer& layer : model.layers_) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.weights.rows() + layer.weights.cols()));
    // Column-major fill order is part of the reproducibility contract.
    for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) {
      for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) layer.weights(i, j) = uniform(rng, -limit, limit);
    }
  }
  return model;
}

std::size_t Mlp::parameter_count() const {
  std::size_t count = 0;
  for (const Layer& layer : layers_) count += static_cast<std::size_t>(layer.weights.size() + layer.bias.size());
  return count;
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& input) const { return run(*this, input).post.back(); }

double sample_loss(const Mlp& model, const Eigen::VectorXd& input, const Eigen::VectorXd& target) {
  if (target.size() != model.output_size()) throw DimensionError("target size does not match the model");
  const Eigen::VectorXd err = model.forward(input) - target;
  return 0.5 * err.squaredNorm() / static_cast<double>(err.size());
}

Gradients backward(const Mlp& model, const Eigen::VectorXd& input, const Eigen::VectorXd& target) {
  if (target.size() != model.output_size()) throw DimensionError("target size does not match the model");
  const Trace tr = run(model, input);
  Gradients grads(model.layers().size());
  Eigen::VectorXd delta = (tr.post.back() - target) / static_cast<double>(target.size());
  for (std::size_t l = model.layers().size(); l-- > 0;) {
    grads[l].weights = tr.post[l] * delta.transpose();
    grads[l].bias = delta;
    if (l > 0) {
      delta = model.layers()[l].weights * delta;
      const Eigen::VectorXd& z = tr.pre[l - 1];
      for (Eigen::Index i = 0; i < delta.size(); ++i) {
        if (!(z[i] > 0.0)) delta[i] = 0.0;
      }
    }
  }
  return grads;
}

void TrainConfig::validate() const {
  if (!(eta > 0.0)) throw ValidationError("eta", "learning rate must be positive");
  if (!(epsilon > 0.0)) throw ValidationError("epsilon", "epsilon must be positive");
  if (!(decay > 0.0 && decay < 1.0)) throw ValidationError("decay", "decay must lie in (0, 1)");
  if (epochs < 0) throw ValidationError("epochs", "epochs must be non-negative");
  if (batch_size < 1) throw ValidationError("batch_size", "batch size must be positive");
}

RmspropState make_rmsprop_state(const Mlp& model) { return zero_like(model); }

void rmsprop_step(std::vector<Layer>& params, const Gradients& grads, RmspropState& state, const TrainConfig& config) {
  if (params.size() != grads.size() || params.size() != state.size()) {
    throw DimensionError("rmsprop parameter, gradient and state shapes differ");
  }
  auto update = [&](auto& p, const auto& g, auto& v) {
    if (p.size() != g.size() || p.size() != v.size()) throw DimensionError("rmsprop shape mismatch");
    v = config.decay * v.array() + (1.0 - config.decay) * g.array().square();
    p.array() -= config.eta * g.array() / (v.array() + config.epsilon).sqrt();
  };
  for (std::size_t l = 0; l < params.size(); ++l) {
    update(params[l].weights, grads[l].weights, state[l].weights);
    update(params[l].bias, grads[l].bias, state[l].bias);
  }
}

TrainResult train(Mlp model, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                  const TrainConfig& config) {
  config.validate();
  if (inputs.rows() == 0) throw DimensionError("training set is empty");
  if (inputs.rows() != targets.rows()) throw DimensionError("input and target row counts differ");
  if (inputs.cols() != model.input_size() || targets.cols() != model.output_size()) {
    throw DimensionError("training data does not match the model dimensions");
  }
  TrainResult result;
  RmspropState state = make_rmsprop_state(model);
  Rng rng(config.seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(inputs.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const auto batch = static_cast<std::size_t>(config.batch_size);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // Fisher-Yates with the portable index helper.
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      Gradients sum = zero_like(model);
      for (std::size_t k = start; k < end; ++k) {
        const Eigen::Index r = order[k];
        accumulate(sum, backward(model, inputs.row(r).transpose(), targets.row(r).transpose()), 1.0);
      }
      const double scale = 1.0 / static_cast<double>(end - start);
      for (Layer& g : sum) {
        g.weights *= scale;
        g.bias *= scale;
      }
      rmsprop_step(model.layers(), sum, state, config);
    }
    double loss = 0.0;
    for (Eigen::Index r = 0; r < inputs.rows(); ++r) {
      loss += sample_loss(model, inputs.row(r).transpose(), targets.row(r).transpose());
    }
    loss /= static_cast<double>(inputs.rows());
    if (!std::isfinite(loss)) throw Error("training diverged: loss is not finite at epoch " + std::to_string(epoch + 1));
    result.loss_history.push_back(loss);
  }
  result.model = std::move(model);
  return result;
}

Normalizer Normalizer::fit(const Eigen::MatrixXd& rows) {
  if (rows.rows() == 0) throw DimensionError("cannot fit a normalizer on zero rows");
  Normalizer n;
  n.mean = rows.colwise().mean().transpose();
  n.scale = Eigen::VectorXd::Ones(rows.cols());
  for (Eigen::Index j = 0; j < rows.cols(); ++j) {
    const double var = (rows.col(j).array() - n.mean[j]).square().mean();
    const double sd = std::sqrt(var);
    if (sd > 1e-12 * std::max(1.0, std::abs(n.mean[j]))) n.scale[j] = sd;
  }
  return n;
}

Eigen::VectorXd Normalizer::normalize(const Eigen::VectorXd& x) const {
  if (x.size() != mean.size()) throw DimensionError("normalizer dimension mismatch");
  return (x - mean).cwiseQuotient(scale);
}

Eigen::VectorXd Normalizer::denormalize(const Eigen::VectorXd& z) const {
  if (z.size() != mean.size()) throw DimensionError("normalizer dimension mismatch");
  return z.cwiseProduct(scale) + mean;
}

Eigen::MatrixXd Normalizer::normalize_rows(const Eigen::MatrixXd& rows) const {
  if (rows.cols() != mean.size()) throw DimensionError("normalizer dimension mismatch");
  return (rows.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

void Dataset::validate() const {
  if (nodes <= 0 || horizon <= 0) throw DimensionError("dataset needs positive node and slot counts");
  const auto width = static_cast<Eigen::Index>(nodes) * horizon;
  if (inputs.rows() != targets.rows()) throw DimensionError("dataset input and target row counts differ");
  if (inputs.cols() != width || targets.cols() != width) throw DimensionError("dataset width is not nodes x horizon");
  if (scenario_ids.size() != size() || objectives.size() != size()) {
    throw DimensionError("dataset metadata length differs from row count");
  }
  for (std::size_t r : train_rows) {
    if (r >= size()) throw DimensionError("train row out of range");
  }
  for (std::size_t r : test_rows) {
    if (r >= size()) throw DimensionError("test row out of range");
  }
}

void split_dataset(Dataset& data, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ValidationError("test_fraction", "must lie in (0, 1)");
  if (data.size() < 2) throw DimensionError("need at least two rows to split");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
  auto test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(data.size())));
  test = std::clamp<std::size_t>(test, 1, data.size() - 1);
  data.test_rows.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(test));
  data.train_rows.assign(order.begin() + static_cast<std::ptrdiff_t>(test), order.end());
  std::sort(data.test_rows.begin(), data.test_rows.end());
  std::sort(data.train_rows.begin(), data.train_rows.end());
}

PressureModel::PressureModel(int nodes, int horizon, Normalizer input, std::vector<Slot> slots)
    : nodes_(nodes), horizon_(horizon), input_(std::move(input)), slots_(std::move(slots)) {
  if (nodes_ <= 0 || horizon_ <= 0) throw DimensionError("model needs positive node and slot counts");
  if (static_cast<int>(slots_.size()) != horizon_) throw DimensionError("model needs one network per slot");
  const int width = nodes_ * horizon_;
  if (input_.mean.size() != width) throw DimensionError("input normalizer width mismatch");
  for (const Slot& s : slots_) {
    if (s.mlp.input_size() != width || s.mlp.output_size() != nodes_ || s.output.mean.size() != nodes_) {
      throw DimensionError("slot network dimensions do not match the model");
    }
  }
}

Eigen::VectorXd PressureModel::predict(const Eigen::VectorXd& loads) const {
  const Eigen::VectorXd z = input_.normalize(loads);
  Eigen::VectorXd out(static_cast<Eigen::Index>(nodes_) * horizon_);
  for (int t = 0; t < horizon_; ++t) {
    const Slot& s = slots_[static_cast<std::size_t>(t)];
    out.segment(static_cast<Eigen::Index>(t) * nodes_, nodes_) = s.output.denormalize(s.mlp.forward(z));
  }
  return out;
}

std::vector<std::vector<double>> PressureModel::predict_profile(const Scenario& scenario) const {
  if (scenario.horizon() != horizon_) throw DimensionError("scenario horizon does not match the model");
  const Eigen::VectorXd flat = predict(flatten_loads(scenario));
  std::vector<std::vector<double>> out(static_cast<std::size_t>(horizon_));
  for (int t = 0; t < horizon_; ++t) {
    const auto seg = flat.segment(static_cast<Eigen::Index>(t) * nodes_, nodes_);
    out[static_cast<std::size_t>(t)].assign(seg.data(), seg.data() + seg.size());
  }
  return out;
}

Eigen::VectorXd flatten_loads(const Scenario& scenario) {
  std::size_t total = 0;
  for (const auto& row : scenario.lambda) total += row.size();
  Eigen::VectorXd out(static_cast<Eigen::Index>(total));
  Eigen::Index k = 0;
  for (const auto& row : scenario.lambda) {
    for (double v : row) out[k++] = v;
  }
  return out;
}

FitResult fit_pressure_model(const Dataset& data, const ModelSpec& spec, const TrainConfig& config) {
  data.validate();
  if (data.train_rows.empty()) throw DimensionError("dataset has no training rows");
  const auto train_count = static_cast<Eigen::Index>(data.train_rows.size());
  Eigen::MatrixXd x(train_count, data.inputs.cols());
  Eigen::MatrixXd y(train_count, data.targets.cols());
  for (Eigen::Index i = 0; i < train_count; ++i) {
    const auto r = static_cast<Eigen::Index>(data.train_rows[static_cast<std::size_t>(i)]);
    x.row(i) = data.inputs.row(r);
    y.row(i) = data.targets.row(r);
  }
  const Normalizer input = Normalizer::fit(x);
  const Eigen::MatrixXd xz = input.normalize_rows(x);

  std::vector<int> sizes{static_cast<int>(data.inputs.cols())};
  if (spec.hidden.empty()) {
    sizes.push_back(2 * data.nodes);
  } else {
    sizes.insert(sizes.end(), spec.hidden.begin(), spec.hidden.end());
  }
  sizes.push_back(data.nodes);

  FitResult result;
  std::vector<PressureModel::Slot> slots;
  for (int t = 0; t < data.horizon; ++t) {
    const Eigen::MatrixXd yt = y.middleCols(static_cast<Eigen::Index>(t) * data.nodes, data.nodes);
    PressureModel::Slot slot;
    slot.output = Normalizer::fit(yt);
    TrainConfig slot_config = config;
    slot_config.seed = derive_seed(config.seed, static_cast<std::uint64_t>(t));
    TrainResult tr = train(Mlp::random(sizes, derive_seed(slot_config.seed, 0xA11CE)), xz,
                           slot.output.normalize_rows(yt), slot_config);
    slot.mlp = std::move(tr.model);
    result.loss_history.push_back(std::move(tr.loss_history));
    slots.push_back(std::move(slot));
  }
  result.model = PressureModel(data.nodes, data.horizon, input, std::move(slots));
  return result;
}

MaeReport evaluate_mae(const Predictor& predictor, const Dataset& data, const std::vector<std::size_t>& rows) {
  const std::vector<std::size_t>& use = rows.empty() ? data.test_rows : rows;
  if (use.empty()) throw DimensionError("no rows to evaluate");
  MaeReport report;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(data.targets.cols());
  for (std::size_t r : use) {
    const auto row = static_cast<Eigen::Index>(r);
    if (row >= data.targets.rows()) throw DimensionError("evaluation row out of range");
    const Eigen::VectorXd pred = predictor(data.inputs.row(row).transpose());
    if (pred.size() != data.targets.cols()) throw DimensionError("prediction width does not match targets");
    sum += (pred - data.targets.row(row).transpose()).cwiseAbs();
  }
  sum /= static_cast<double>(use.size());
  report.per_output.assign(sum.data(), sum.data() + sum.size());
  report.average = sum.mean();
  return report;
}

Predictor dummy_mean_predictor(const GasNetwork& network, int horizon) {
  if (horizon < 1) throw DimensionError("horizon must be positive");
  const auto n = static_cast<Eigen::Index>(network.node_count());
  Eigen::VectorXd mid(n * horizon);
  for (int t = 0; t < horizon; ++t) {
    for (Eigen::Index g = 0; g < n; ++g) {
      const NodeSpec& node = network.nodes()[static_cast<std::size_t>(g)];
      mid[t * n + g] = 0.5 * (node.pi_min + node.pi_max);
    }
  }
  return [mid](const Eigen::VectorXd&) { return mid; };
}

}  // namespace ogf

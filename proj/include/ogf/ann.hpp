#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ogf/network.hpp"

namespace ogf {

/// Dense layer y = W'x + b with W stored as (inputs x outputs).
struct Layer {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;
};

/// Feedforward network: ReLU on hidden layers, affine output layer.
class Mlp {
 public:
  Mlp() = default;

  /// Zero-initialized model with the given layer sizes N_0..N_L (at least
  /// three entries, so there is a hidden layer).
  explicit Mlp(std::vector<int> sizes);

  /// Uniform init in +-sqrt(6 / (N_in + N_out)), zero biases.
  static Mlp random(std::vector<int> sizes, std::uint64_t seed);

  const std::vector<int>& sizes() const noexcept { return sizes_; }
  std::vector<Layer>& layers() noexcept { return layers_; }
  const std::vector<Layer>& layers() const noexcept { return layers_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  std::size_t parameter_count() const;

  Eigen::VectorXd forward(const Eigen::VectorXd& input) const;

 private:
  std::vector<int> sizes_;
  std::vector<Layer> layers_;
};

/// Same shapes as the model's layers.
using Gradients = std::vector<Layer>;

/// Gradient of 0.5 * mean_k (y_k - t_k)^2 for one sample. The ReLU
/// subgradient at 0 is taken as 0.
Gradients backward(const Mlp& model, const Eigen::VectorXd& input, const Eigen::VectorXd& target);

double sample_loss(const Mlp& model, const Eigen::VectorXd& input, const Eigen::VectorXd& target);

struct TrainConfig {
  double eta = 1e-2;
  double epsilon = 1e-8;
  double decay = 0.9;
  int epochs = 300;
  int batch_size = 32;
  std::uint64_t seed = 1;

  void validate() const;
};

/// RMSprop moving-average state, one entry per parameter.
using RmspropState = std::vector<Layer>;

RmspropState make_rmsprop_state(const Mlp& model);

/// v := decay v + (1 - decay) g^2; param := param - eta g / sqrt(v + epsilon).
void rmsprop_step(std::vector<Layer>& params, const Gradients& grads, RmspropState& state, const TrainConfig& config);

struct TrainResult {
  Mlp model;
  std::vector<double> loss_history;  // mean train loss per epoch
};

/// Minibatch RMSprop on rows of (inputs, targets). Shuffles with `config.seed`.
/// Throws Error if the loss becomes non-finite.
TrainResult train(Mlp model, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                  const TrainConfig& config);

/// Per-column standardization fitted on a sample matrix.
struct Normalizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;  // standard deviation, 1 where a column is constant

  static Normalizer fit(const Eigen::MatrixXd& rows);
  Eigen::VectorXd normalize(const Eigen::VectorXd& x) const;
  Eigen::VectorXd denormalize(const Eigen::VectorXd& z) const;
  Eigen::MatrixXd normalize_rows(const Eigen::MatrixXd& rows) const;
};

/// Inputs are flattened load factors lambda[t][g] (slot-major); targets are
/// flattened nodal pressures in the same layout.
struct Dataset {
  int nodes = 0;
  int horizon = 1;
  Eigen::MatrixXd inputs;
  Eigen::MatrixXd targets;
  std::vector<int> scenario_ids;
  std::vector<double> objectives;  // presolved objective per row
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  int dropped = 0;  // scenarios whose presolve failed

  std::size_t size() const { return static_cast<std::size_t>(inputs.rows()); }
  void validate() const;
};

/// Seeded shuffle into train/test rows; both parts end up non-empty.
void split_dataset(Dataset& data, double test_fraction, std::uint64_t seed);

std::string dataset_to_csv(const Dataset& data);
Dataset dataset_from_csv(std::string_view text);

/// Learned map from load factors to nodal pressures: one Mlp per time slot,
/// each reading the full flattened load matrix.
class PressureModel {
 public:
  struct Slot {
    Mlp mlp;
    Normalizer output;
  };

  PressureModel() = default;
  PressureModel(int nodes, int horizon, Normalizer input, std::vector<Slot> slots);

  int nodes() const noexcept { return nodes_; }
  int horizon() const noexcept { return horizon_; }
  const Normalizer& input_normalizer() const noexcept { return input_; }
  const std::vector<Slot>& slots() const noexcept { return slots_; }

  /// Flattened pressures for a flattened load vector.
  Eigen::VectorXd predict(const Eigen::VectorXd& loads) const;

  /// pressures[t][g] for a scenario's load factors.
  std::vector<std::vector<double>> predict_profile(const Scenario& scenario) const;

 private:
  int nodes_ = 0;
  int horizon_ = 1;
  Normalizer input_;
  std::vector<Slot> slots_;
};

struct ModelSpec {
  std::vector<int> hidden;  // empty: one hidden layer of width 2 * nodes
};

struct FitResult {
  PressureModel model;
  std::vector<std::vector<double>> loss_history;  // per slot
};

/// Standardizes on the training rows and trains one Mlp per slot.
FitResult fit_pressure_model(const Dataset& data, const ModelSpec& spec, const TrainConfig& config);

Eigen::VectorXd flatten_loads(const Scenario& scenario);

using Predictor = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct MaeReport {
  std::vector<double> per_output;
  double average = 0.0;
};

/// Mean |prediction - target| over `rows` (the test split when empty).
MaeReport evaluate_mae(const Predictor& predictor, const Dataset& data, const std::vector<std::size_t>& rows = {});

/// Constant midpoint of each node's pressure bounds, repeated per slot.
Predictor dummy_mean_predictor(const GasNetwork& network, int horizon = 1);

/// Text model format, first line `ogf-mlp 1`.
std::string write_model(const PressureModel& model);
PressureModel read_model(std::string_view text);

}  // namespace ogf

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace liestyle {

enum class Activation : std::uint32_t { Tanh = 0, Relu = 1 };

/// Hidden-layer layout; the output layer is a single linear unit.
struct MlpConfig {
  std::vector<std::size_t> hidden{384, 384, 384, 384};
  Activation activation = Activation::Tanh;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t epochs = 300;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  double weight_decay = 1e-5;

  void validate() const;  // throws ConfigError
};

/// Fully-connected scorer whose pre-sigmoid logit has decision boundary 0.
struct MlpModel {
  std::vector<Eigen::MatrixXd> weights;  // layer l: widths[l+1] x widths[l]
  std::vector<Eigen::VectorXd> biases;
  Activation activation = Activation::Tanh;

  std::size_t input_dim() const { return weights.empty() ? 0 : static_cast<std::size_t>(weights.front().cols()); }
  std::vector<std::size_t> widths() const;
  bool all_finite() const;

  /// All parameters zero; the logit is identically 0.
  static MlpModel zeros(std::size_t input_dim, const MlpConfig& config = {});
};

MlpModel init_mlp(std::size_t input_dim, const MlpConfig& config, std::uint64_t seed);

double forward_logit(const MlpModel& m, std::span<const double> x);

/// Exact reverse-mode gradient of the logit with respect to the input.
std::vector<double> input_gradient(const MlpModel& m, std::span<const double> x);

struct EpochStats {
  double loss = 0.0;
  double accuracy = 0.0;
};

struct TrainResult {
  MlpModel model;
  std::vector<EpochStats> history;  // one entry per epoch, measured on the full set after the epoch
};

/// Mini-batch gradient descent on the logistic loss. Samples are put in a
/// canonical order before seeded shuffling, so the result does not depend on
/// the order in which they are passed.
TrainResult train_binary(MlpModel m, const std::vector<std::vector<double>>& samples, std::span<const int> labels,
                         const TrainConfig& cfg);

/// Mean logistic loss and accuracy over a dataset.
EpochStats evaluate(const MlpModel& m, const std::vector<std::vector<double>>& samples, std::span<const int> labels);

void save_checkpoint(const MlpModel& m, const std::filesystem::path& path);
MlpModel load_checkpoint(const std::filesystem::path& path);

}  // namespace liestyle

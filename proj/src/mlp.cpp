#include "liestyle/mlp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <string>

#include "liestyle/errors.hpp"

namespace liestyle {
namespace {

constexpr char kCheckpointMagic[8] = {'L', 'S', 'M', 'L', 'P', '0', '0', '1'};

double activate(Activation a, double z) { return a == Activation::Tanh ? std::tanh(z) : std::max(0.0, z); }

// Derivative expressed through the activation output.
double activate_grad(Activation a, double out) {
  return a == Activation::Tanh ? 1.0 - out * out : (out > 0.0 ? 1.0 : 0.0);
}

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_input(const MlpModel& m, std::size_t n) {
  if (n != m.input_dim())
    throw DataError("mlp: input length " + std::to_string(n) + " does not match input_dim " +
                    std::to_string(m.input_dim()));
}

// Hidden activations for every layer, a[0] = x.
std::vector<Eigen::VectorXd> forward_trace(const MlpModel& m, std::span<const double> x) {
  std::vector<Eigen::VectorXd> acts;
  acts.reserve(m.weights.size());
  acts.emplace_back(Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size())));
  for (std::size_t l = 0; l + 1 < m.weights.size(); ++l) {
    Eigen::VectorXd z = m.weights[l] * acts.back() + m.biases[l];
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = activate(m.activation, z[i]);
    acts.push_back(std::move(z));
  }
  return acts;
}

void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t read_u64(std::istream& in, const std::string& name) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw DataError(name + ": truncated checkpoint");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
  return v;
}

void write_f64(std::ostream& out, double v) { write_u64(out, std::bit_cast<std::uint64_t>(v)); }
double read_f64(std::istream& in, const std::string& name) { return std::bit_cast<double>(read_u64(in, name)); }

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("train: learning rate must be > 0");
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train: batch size must be >= 1");
  if (!(weight_decay >= 0.0)) throw ConfigError("train: weight decay must be >= 0");
}

std::vector<std::size_t> MlpModel::widths() const {
  std::vector<std::size_t> w;
  if (weights.empty()) return w;
  w.push_back(static_cast<std::size_t>(weights.front().cols()));
  for (const auto& W : weights) w.push_back(static_cast<std::size_t>(W.rows()));
  return w;
}

bool MlpModel::all_finite() const {
  for (std::size_t l = 0; l < weights.size(); ++l)
    if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
  return true;
}

MlpModel MlpModel::zeros(std::size_t input_dim, const MlpConfig& config) {
  MlpModel m;
  m.activation = config.activation;
  std::size_t prev = input_dim;
  auto add = [&](std::size_t width) {
    m.weights.push_back(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(width), static_cast<Eigen::Index>(prev)));
    m.biases.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(width)));
    prev = width;
  };
  for (std::size_t w : config.hidden) add(w);
  add(1);
  return m;
}

MlpModel init_mlp(std::size_t input_dim, const MlpConfig& config, std::uint64_t seed) {
  if (input_dim < 1) throw ConfigError("init_mlp: input_dim must be >= 1");
  for (std::size_t w : config.hidden)
    if (w < 1) throw ConfigError("init_mlp: hidden widths must be >= 1");
  MlpModel m = MlpModel::zeros(input_dim, config);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& W : m.weights) {
    const double scale = std::sqrt(2.0 / static_cast<double>(W.cols()));
    for (Eigen::Index r = 0; r < W.rows(); ++r)
      for (Eigen::Index c = 0; c < W.cols(); ++c) W(r, c) = scale * normal(rng);
  }
  return m;
}

double forward_logit(const MlpModel& m, std::span<const double> x) {
  check_input(m, x.size());
  const auto acts = forward_trace(m, x);
  return (m.weights.back() * acts.back() + m.biases.back())[0];
}

std::vector<double> input_gradient(const MlpModel& m, std::span<const double> x) {
  check_input(m, x.size());
  const auto acts = forward_trace(m, x);
  Eigen::VectorXd delta = m.weights.back().row(0).transpose();
  for (std::size_t l = m.weights.size() - 1; l-- > 0;) {
    const Eigen::VectorXd& a = acts[l + 1];
    for (Eigen::Index i = 0; i < delta.size(); ++i) delta[i] *= activate_grad(m.activation, a[i]);
    delta = m.weights[l].transpose() * delta;
  }
  return {delta.data(), delta.data() + delta.size()};
}

namespace {

// Forward pass on a column batch; returns per-layer activations (acts[0] = X).
std::vector<Eigen::MatrixXd> forward_batch(const MlpModel& m, Eigen::MatrixXd X) {
  std::vector<Eigen::MatrixXd> acts;
  acts.push_back(std::move(X));
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    Eigen::MatrixXd z = m.weights[l] * acts.back();
    z.colwise() += m.biases[l];
    if (l + 1 < m.weights.size()) z = z.unaryExpr([&](double v) { return activate(m.activation, v); });
    acts.push_back(std::move(z));
  }
  return acts;
}

Eigen::MatrixXd gather(const std::vector<std::vector<double>>& samples, std::span<const std::size_t> idx) {
  const auto dim = static_cast<Eigen::Index>(samples[idx[0]].size());
  Eigen::MatrixXd X(dim, static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j)
    X.col(static_cast<Eigen::Index>(j)) = Eigen::Map<const Eigen::VectorXd>(samples[idx[j]].data(), dim);
  return X;
}

}  // namespace

EpochStats evaluate(const MlpModel& m, const std::vector<std::vector<double>>& samples, std::span<const int> labels) {
  EpochStats st;
  if (samples.empty()) return st;
  std::vector<std::size_t> all(samples.size());
  std::iota(all.begin(), all.end(), 0);
  constexpr std::size_t kChunk = 256;
  std::size_t correct = 0;
  for (std::size_t start = 0; start < all.size(); start += kChunk) {
    const std::size_t len = std::min(kChunk, all.size() - start);
    const auto acts = forward_batch(m, gather(samples, std::span(all).subspan(start, len)));
    for (std::size_t j = 0; j < len; ++j) {
      const double z = acts.back()(0, static_cast<Eigen::Index>(j));
      const int y = labels[start + j];
      st.loss += softplus(z) - y * z;
      correct += ((z > 0.0) == (y == 1));
    }
  }
  st.loss /= static_cast<double>(samples.size());
  st.accuracy = static_cast<double>(correct) / static_cast<double>(samples.size());
  return st;
}

TrainResult train_binary(MlpModel m, const std::vector<std::vector<double>>& samples, std::span<const int> labels,
                         const TrainConfig& cfg) {
  cfg.validate();
  if (samples.size() != labels.size()) throw DataError("train_binary: samples and labels differ in length");
  std::size_t positives = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw DataError("train_binary: labels must be 0 or 1");
    check_input(m, samples[i].size());
    positives += labels[i];
  }
  if (positives == 0 || positives == labels.size())
    throw DataError("train_binary: need at least one sample of each class");

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (labels[a] != labels[b]) return labels[a] < labels[b];
    return samples[a] < samples[b];
  });

  std::mt19937_64 rng(cfg.seed);
  TrainResult result;
  result.history.reserve(cfg.epochs);
  const std::size_t L = m.weights.size();
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t len = std::min(cfg.batch_size, order.size() - start);
      const auto batch = std::span(order).subspan(start, len);
      const auto acts = forward_batch(m, gather(samples, batch));

      // dLoss/dlogit for the mean logistic loss.
      Eigen::MatrixXd delta(1, static_cast<Eigen::Index>(len));
      for (std::size_t j = 0; j < len; ++j)
        delta(0, static_cast<Eigen::Index>(j)) =
            (sigmoid(acts.back()(0, static_cast<Eigen::Index>(j))) - labels[batch[j]]) / static_cast<double>(len);

      for (std::size_t l = L; l-- > 0;) {
        Eigen::MatrixXd gW = delta * acts[l].transpose();
        Eigen::VectorXd gb = delta.rowwise().sum();
        if (l > 0) {
          Eigen::MatrixXd back = m.weights[l].transpose() * delta;
          const Eigen::MatrixXd& a = acts[l];
          for (Eigen::Index c = 0; c < back.cols(); ++c)
            for (Eigen::Index r = 0; r < back.rows(); ++r) back(r, c) *= activate_grad(m.activation, a(r, c));
          delta = std::move(back);
        }
        gW += cfg.weight_decay * m.weights[l];
        m.weights[l] -= cfg.learning_rate * gW;
        m.biases[l] -= cfg.learning_rate * gb;
      }
    }
    result.history.push_back(evaluate(m, samples, labels));
    if (!std::isfinite(result.history.back().loss))
      throw NumericError("train_binary: loss diverged at epoch " + std::to_string(epoch + 1));
  }
  result.model = std::move(m);
  return result;
}

void save_checkpoint(const MlpModel& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint '" + path.string() + "'");
  out.write(kCheckpointMagic, sizeof kCheckpointMagic);
  write_u64(out, static_cast<std::uint64_t>(m.activation));
  write_u64(out, m.weights.size());
  for (std::size_t w : m.widths()) write_u64(out, w);
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    const auto& W = m.weights[l];
    for (Eigen::Index r = 0; r < W.rows(); ++r)
      for (Eigen::Index c = 0; c < W.cols(); ++c) write_f64(out, W(r, c));
    for (Eigen::Index r = 0; r < m.biases[l].size(); ++r) write_f64(out, m.biases[l][r]);
  }
  if (!out) throw DataError("failed writing checkpoint '" + path.string() + "'");
}

MlpModel load_checkpoint(const std::filesystem::path& path) {
  const std::string name = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + name + "'");
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw DataError(name + ": not an MLP checkpoint");
  const auto act = read_u64(in, name);
  if (act > 1) throw DataError(name + ": unknown activation tag " + std::to_string(act));
  const auto layers = read_u64(in, name);
  if (layers < 1 || layers > 64) throw DataError(name + ": implausible layer count " + std::to_string(layers));
  std::vector<std::size_t> widths;
  for (std::uint64_t i = 0; i <= layers; ++i) {
    const auto w = read_u64(in, name);
    if (w < 1 || w > (1u << 24)) throw DataError(name + ": implausible layer width");
    widths.push_back(w);
  }
  if (widths.back() != 1) throw DataError(name + ": output width must be 1");
  MlpModel m;
  m.activation = static_cast<Activation>(act);
  for (std::uint64_t l = 0; l < layers; ++l) {
    Eigen::MatrixXd W(static_cast<Eigen::Index>(widths[l + 1]), static_cast<Eigen::Index>(widths[l]));
    for (Eigen::Index r = 0; r < W.rows(); ++r)
      for (Eigen::Index c = 0; c < W.cols(); ++c) W(r, c) = read_f64(in, name);
    Eigen::VectorXd b(W.rows());
    for (Eigen::Index r = 0; r < b.size(); ++r) b[r] = read_f64(in, name);
    m.weights.push_back(std::move(W));
    m.biases.push_back(std::move(b));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw DataError(name + ": trailing bytes after parameters");
  if (!m.all_finite()) throw DataError(name + ": non-finite parameters");
  return m;
}

}  // namespace liestyle

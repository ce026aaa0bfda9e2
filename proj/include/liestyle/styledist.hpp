#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "liestyle/liegg.hpp"
#include "liestyle/numerics.hpp"

namespace liestyle {

/// Symmetric, zero-diagonal, non-negative artist distance table.
struct DistanceMatrix {
  std::vector<std::string> labels;
  Matrix values;

  DistanceMatrix() = default;
  DistanceMatrix(std::vector<std::string> labels, Matrix values);

  std::size_t size() const { return labels.size(); }
  double operator()(std::size_t i, std::size_t j) const { return values(i, j); }
  double max_offdiag() const;
  /// Throws NumericError unless symmetric within tol, zero diagonal and non-negative.
  void validate(double tol = 1e-10) const;
};

enum class Normalization { MaxOffdiag, None };

struct CombinedConfig {
  double lambda = 0.5;
  Normalization normalization = Normalization::MaxOffdiag;
};

/// sqrt of the sum of squared principal angles between the generator spans.
double grassmann_distance(const GeneratorSet& a, const GeneratorSet& b);

/// Applies metric(i, j) once per unordered pair i < j.
DistanceMatrix pairwise_distances(const std::vector<std::string>& labels,
                                  const std::function<double(std::size_t, std::size_t)>& metric);

DistanceMatrix normalize_offdiag(const DistanceMatrix& d);

/// (1 - lambda) * d_texture + lambda * d_global, after optional normalization.
DistanceMatrix combine(const DistanceMatrix& d_texture, const DistanceMatrix& d_global, const CombinedConfig& cfg);

/// CSV with a label header row and a label first column; 17 significant digits.
void save_distance_matrix(const DistanceMatrix& d, const std::filesystem::path& path);
DistanceMatrix load_distance_matrix(const std::filesystem::path& path);

}  // namespace liestyle

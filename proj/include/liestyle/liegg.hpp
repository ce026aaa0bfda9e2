#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "liestyle/image.hpp"
#include "liestyle/numerics.hpp"

namespace liestyle {

enum class AlgebraMode { PixelLinear, Affine2D };

/// Parameterization of the candidate Lie algebra.
///  PixelLinear: all n x n matrices acting on the flattened input, basis E_ij at index i*n + j.
///  Affine2D: {translate-x, translate-y, scale-x, scale-y, rotation, shear} acting on
///  normalized image coordinates in [-1,1]^2.
struct AlgebraParam {
  AlgebraMode mode = AlgebraMode::Affine2D;
  std::size_t n = 0;  // PixelLinear input dimension

  static AlgebraParam pixel_linear(std::size_t n);
  static AlgebraParam affine2d() { return {}; }
  std::size_t dimension() const;
};

inline constexpr std::size_t kAffineDim = 6;
inline constexpr std::size_t kAffineRotation = 4;
inline constexpr std::array<const char*, kAffineDim> kAffineBasisNames = {"translate-x", "translate-y", "scale-x",
                                                                          "scale-y",     "rotation",    "shear"};
inline constexpr std::size_t kMaxPixelLinearInputs = 256;

/// 3x3 homogeneous generator matrix (last row zero) for affine coefficients.
Matrix affine_generator_matrix(std::span<const double> coeffs);

/// The perturbation h_a . x, flattened in the image's channel-major layout.
std::vector<double> basis_action(const AlgebraParam& param, std::size_t basis_index, const ImageTensor& img);

/// Maps a flattened input to the gradient of the scalar score at that input.
using GradientProvider = std::function<std::vector<double>(std::span<const double>)>;

/// One row per sample, one column per basis element: <grad f(x_m), h_a . x_m>.
Matrix polarization(const GradientProvider& scorer, std::span<const ImageTensor> samples, const AlgebraParam& param,
                    bool normalize_rows = true);

/// Scales every non-zero row to unit Euclidean length.
Matrix normalize_rows(Matrix e);

struct GeneratorSet {
  AlgebraMode mode = AlgebraMode::Affine2D;
  std::size_t dim = 0;
  std::vector<std::vector<double>> generators;  // unit norm, mutually orthogonal, most symmetric first
  std::vector<double> singular_values;          // ascending, parallel to generators
  std::vector<double> spectrum;                 // all dim singular values, descending (zero-padded)

  std::size_t k() const { return generators.size(); }
  /// Generators as the columns of a dim x k matrix.
  Matrix basis() const;
};

/// The k right-singular vectors of e with the smallest singular values.
GeneratorSet extract_generators(const Matrix& e, std::size_t k = 4, AlgebraMode mode = AlgebraMode::Affine2D);

/// Pulls the image back along exp(-t M): out(p) = img(exp(-t M) p), bilinear, zero outside.
ImageTensor generator_flow(const ImageTensor& img, std::span<const double> affine_coeffs, double t);
ImageTensor generator_flow(const ImageTensor& img, const GeneratorSet& set, std::size_t rank, double t);

/// Panels for t in {-2d, -d, 0, d, 2d} side by side.
ImageTensor flow_strip(const ImageTensor& img, std::span<const double> affine_coeffs, double delta);

}  // namespace liestyle

#include "liestyle/liegg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "liestyle/errors.hpp"
#include "liestyle/parallel.hpp"

namespace liestyle {

AlgebraParam AlgebraParam::pixel_linear(std::size_t n) {
  if (n < 1) throw ConfigError("PixelLinear algebra needs n >= 1");
  if (n > kMaxPixelLinearInputs)
    throw ConfigError("PixelLinear algebra is capped at " + std::to_string(kMaxPixelLinearInputs) + " inputs, got " +
                      std::to_string(n));
  return {AlgebraMode::PixelLinear, n};
}

std::size_t AlgebraParam::dimension() const { return mode == AlgebraMode::PixelLinear ? n * n : kAffineDim; }

Matrix affine_generator_matrix(std::span<const double> c) {
  if (c.size() != kAffineDim)
    throw NumericError("affine generator needs " + std::to_string(kAffineDim) + " coefficients, got " +
                       std::to_string(c.size()));
  // Rows act on (x, y, 1). Basis: tx, ty, sx, sy, rotation [[0,-1],[1,0]], shear [[0,1],[0,0]].
  return Matrix{{c[2], -c[4] + c[5], c[0]}, {c[4], c[3], c[1]}, {0.0, 0.0, 0.0}};
}

namespace {

double norm_coord(std::size_t i, std::size_t n) { return 2.0 * (static_cast<double>(i) + 0.5) / n - 1.0; }

// Derivative along one axis in normalized units: central differences inside,
// one-sided at the border.
double axis_derivative(const ImageTensor& img, std::size_t c, std::size_t y, std::size_t x, bool along_x) {
  const std::size_t len = along_x ? img.width : img.height;
  if (len < 2) return 0.0;
  const std::size_t i = along_x ? x : y;
  auto sample = [&](std::size_t j) { return static_cast<double>(along_x ? img.at(c, y, j) : img.at(c, j, x)); };
  double d;
  if (i == 0) {
    d = sample(1) - sample(0);
  } else if (i + 1 == len) {
    d = sample(i) - sample(i - 1);
  } else {
    d = 0.5 * (sample(i + 1) - sample(i - 1));
  }
  return d * static_cast<double>(len) / 2.0;
}

}  // namespace

std::vector<double> basis_action(const AlgebraParam& param, std::size_t basis_index, const ImageTensor& img) {
  const std::size_t D = param.dimension();
  if (basis_index >= D)
    throw NumericError("basis_action: index " + std::to_string(basis_index) + " out of range for dimension " +
                       std::to_string(D));
  const std::size_t len = img.pixels.size();

  if (param.mode == AlgebraMode::PixelLinear) {
    if (len != param.n)
      throw DataError("basis_action: input length " + std::to_string(len) + " does not match PixelLinear n = " +
                      std::to_string(param.n));
    std::vector<double> out(len, 0.0);
    const std::size_t i = basis_index / param.n;
    const std::size_t j = basis_index % param.n;
    out[i] = img.pixels[j];
    return out;
  }

  std::vector<double> coeffs(kAffineDim, 0.0);
  coeffs[basis_index] = 1.0;
  const Matrix M = affine_generator_matrix(coeffs);
  std::vector<double> out(len, 0.0);
  for (std::size_t y = 0; y < img.height; ++y) {
    const double py = norm_coord(y, img.height);
    for (std::size_t x = 0; x < img.width; ++x) {
      const double px = norm_coord(x, img.width);
      const double vx = M(0, 0) * px + M(0, 1) * py + M(0, 2);
      const double vy = M(1, 0) * px + M(1, 1) * py + M(1, 2);
      if (vx == 0.0 && vy == 0.0) continue;
      for (std::size_t c = 0; c < img.channels; ++c) {
        const double gx = vx == 0.0 ? 0.0 : axis_derivative(img, c, y, x, true);
        const double gy = vy == 0.0 ? 0.0 : axis_derivative(img, c, y, x, false);
        out[(c * img.height + y) * img.width + x] = -(gx * vx + gy * vy);
      }
    }
  }
  return out;
}

Matrix normalize_rows(Matrix e) {
  for (std::size_t r = 0; r < e.rows(); ++r) {
    auto row = e.row(r);
    const double n = std::sqrt(std::inner_product(row.begin(), row.end(), row.begin(), 0.0));
    if (n > 0.0)
      for (double& v : row) v /= n;
  }
  return e;
}

Matrix polarization(const GradientProvider& scorer, std::span<const ImageTensor> samples, const AlgebraParam& param,
                    bool normalize) {
  if (samples.empty()) throw DataError("polarization: no samples");
  const std::size_t D = param.dimension();
  Matrix e(samples.size(), D);
  parallel_for(samples.size(), [&](std::size_t m) {
    const ImageTensor& img = samples[m];
    const auto x = flatten(img);
    const auto grad = scorer(x);
    if (grad.size() != x.size())
      throw DataError("polarization: gradient length " + std::to_string(grad.size()) + " does not match input " +
                      std::to_string(x.size()));
    if (param.mode == AlgebraMode::PixelLinear) {
      if (x.size() != param.n) throw DataError("polarization: sample length does not match PixelLinear n");
      // <grad, E_ij x> = grad_i * x_j.
      for (std::size_t i = 0; i < param.n; ++i)
        for (std::size_t j = 0; j < param.n; ++j) e(m, i * param.n + j) = grad[i] * x[j];
    } else {
      for (std::size_t a = 0; a < D; ++a) {
        const auto act = basis_action(param, a, img);
        e(m, a) = std::inner_product(grad.begin(), grad.end(), act.begin(), 0.0);
      }
    }
  });
  if (!e.all_finite()) throw NumericError("polarization: non-finite entries");
  return normalize ? normalize_rows(std::move(e)) : e;
}

Matrix GeneratorSet::basis() const { return Matrix::from_columns(generators); }

namespace {

// Pivoted Gram-Schmidt: `count` orthonormal vectors orthogonal to the rows of
// `vt`, built from the standard basis vectors with the largest residuals.
std::vector<std::vector<double>> complement_basis(const Matrix& vt, std::size_t count) {
  const std::size_t D = vt.cols();
  std::vector<std::vector<double>> against;
  for (std::size_t r = 0; r < vt.rows(); ++r) against.emplace_back(vt.row(r).begin(), vt.row(r).end());
  std::vector<std::vector<double>> out;
  auto residual = [&](std::size_t i) {
    std::vector<double> v(D, 0.0);
    v[i] = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto* set : {&against, &out})
        for (const auto& q : *set) {
          const double c = std::inner_product(q.begin(), q.end(), v.begin(), 0.0);
          for (std::size_t d = 0; d < D; ++d) v[d] -= c * q[d];
        }
    }
    return v;
  };
  while (out.size() < count) {
    std::size_t best = 0;
    double best_norm = -1.0;
    for (std::size_t i = 0; i < D; ++i) {
      // Cheap residual norm: 1 - sum of squared projections.
      double proj = 0.0;
      for (const auto* set : {&against, &out})
        for (const auto& q : *set) proj += q[i] * q[i];
      if (1.0 - proj > best_norm + 1e-12) {
        best_norm = 1.0 - proj;
        best = i;
      }
    }
    auto v = residual(best);
    const double n = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    if (!(n > 1e-8)) throw NumericError("extract_generators: null-space completion failed");
    for (double& c : v) c /= n;
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace

GeneratorSet extract_generators(const Matrix& e, std::size_t k, AlgebraMode mode) {
  const std::size_t D = e.cols();
  if (D == 0 || e.rows() == 0) throw NumericError("extract_generators: empty polarization matrix");
  if (k < 1 || k > D)
    throw NumericError("extract_generators: k = " + std::to_string(k) + " must lie in [1, " + std::to_string(D) + "]");

  // Right-singular vectors in ascending singular-value order. With fewer rows
  // than columns the trailing D - rows directions are exactly null; they are
  // completed from the standard basis so a full D x D factor is never formed.
  std::vector<std::vector<double>> ascending;
  std::vector<double> ascending_sv;
  GeneratorSet set;
  set.mode = mode;
  set.dim = D;
  if (e.rows() >= D) {
    const SvdResult dec = svd(e, SvdMode::Full);
    set.spectrum = dec.singular_values;
    set.spectrum.resize(D, 0.0);
    for (std::size_t r = 0; r < k; ++r) {
      const std::size_t idx = D - 1 - r;
      ascending.emplace_back(dec.vt.row(idx).begin(), dec.vt.row(idx).end());
      ascending_sv.push_back(set.spectrum[idx]);
    }
  } else {
    const SvdResult dec = svd(e, SvdMode::Thin);
    set.spectrum = dec.singular_values;
    set.spectrum.resize(D, 0.0);  // directions beyond the row count have zero singular value
    const std::size_t nulls = std::min(k, D - dec.vt.rows());
    for (auto& v : complement_basis(dec.vt, nulls)) {
      ascending.push_back(std::move(v));
      ascending_sv.push_back(0.0);
    }
    for (std::size_t r = 0; ascending.size() < k; ++r) {
      const std::size_t idx = dec.vt.rows() - 1 - r;
      ascending.emplace_back(dec.vt.row(idx).begin(), dec.vt.row(idx).end());
      ascending_sv.push_back(dec.singular_values[idx]);
    }
  }
  for (std::size_t r = 0; r < k; ++r) {
    auto& v = ascending[r];
    // Sign convention: largest-magnitude component positive.
    const auto big = std::max_element(v.begin(), v.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
    if (*big < 0)
      for (double& c : v) c = -c;
    set.generators.push_back(std::move(v));
    set.singular_values.push_back(ascending_sv[r]);
  }
  return set;
}

ImageTensor generator_flow(const ImageTensor& img, std::span<const double> affine_coeffs, double t) {
  const Matrix M = affine_generator_matrix(affine_coeffs);
  const Matrix T = matrix_exp(M, -t);
  if (T == Matrix::identity(3)) return img;

  ImageTensor out(img.width, img.height, img.channels, 0.0f);
  const double W = static_cast<double>(img.width);
  const double H = static_cast<double>(img.height);
  for (std::size_t y = 0; y < img.height; ++y) {
    const double py = norm_coord(y, img.height);
    for (std::size_t x = 0; x < img.width; ++x) {
      const double px = norm_coord(x, img.width);
      const double sx = T(0, 0) * px + T(0, 1) * py + T(0, 2);
      const double sy = T(1, 0) * px + T(1, 1) * py + T(1, 2);
      // Back to pixel-index space.
      const double fx = (sx + 1.0) * W / 2.0 - 0.5;
      const double fy = (sy + 1.0) * H / 2.0 - 0.5;
      const double x0f = std::floor(fx), y0f = std::floor(fy);
      const double wx = fx - x0f, wy = fy - y0f;
      const auto x0 = static_cast<long>(x0f), y0 = static_cast<long>(y0f);
      for (std::size_t c = 0; c < img.channels; ++c) {
        auto fetch = [&](long yy, long xx) -> double {
          if (xx < 0 || yy < 0 || xx >= static_cast<long>(img.width) || yy >= static_cast<long>(img.height)) return 0.0;
          return img.at(c, static_cast<std::size_t>(yy), static_cast<std::size_t>(xx));
        };
        const double v = (1 - wy) * ((1 - wx) * fetch(y0, x0) + wx * fetch(y0, x0 + 1)) +
                         wy * ((1 - wx) * fetch(y0 + 1, x0) + wx * fetch(y0 + 1, x0 + 1));
        out.at(c, y, x) = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
    }
  }
  return out;
}

ImageTensor generator_flow(const ImageTensor& img, const GeneratorSet& set, std::size_t rank, double t) {
  if (set.mode != AlgebraMode::Affine2D)
    throw ConfigError("generator_flow: flow rendering is only defined for Affine2D generators");
  if (rank >= set.k()) throw ConfigError("generator_flow: generator rank out of range");
  return generator_flow(img, set.generators[rank], t);
}

ImageTensor flow_strip(const ImageTensor& img, std::span<const double> affine_coeffs, double delta) {
  constexpr int kPanels = 5;
  ImageTensor strip(img.width * kPanels, img.height, img.channels);
  for (int p = 0; p < kPanels; ++p) {
    const ImageTensor panel = generator_flow(img, affine_coeffs, (p - 2) * delta);
    for (std::size_t c = 0; c < img.channels; ++c)
      for (std::size_t y = 0; y < img.height; ++y)
        for (std::size_t x = 0; x < img.width; ++x) strip.at(c, y, p * img.width + x) = panel.at(c, y, x);
  }
  return strip;
}

}  // namespace liestyle

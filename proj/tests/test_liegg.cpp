#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "liestyle/errors.hpp"
#include "liestyle/liegg.hpp"
#include "test_util.hpp"

using namespace liestyle;
using liestyle::testing::max_abs_diff;
using liestyle::testing::projector;
using liestyle::testing::random_matrix;

namespace {

double coord(std::size_t i, std::size_t n) { return 2.0 * (i + 0.5) / n - 1.0; }

ImageTensor disk(std::size_t size, double cx, double cy, double radius) {
  ImageTensor img(size, size, 1);
  for (std::size_t y = 0; y < size; ++y)
    for (std::size_t x = 0; x < size; ++x) {
      const double r = std::hypot(coord(x, size) - cx, coord(y, size) - cy);
      // Soft edge about one pixel wide.
      img.at(0, y, x) = static_cast<float>(std::clamp(0.5 - (r - radius) * size / 2.0, 0.0, 1.0));
    }
  return img;
}

ImageTensor rotate90(const ImageTensor& img) {
  ImageTensor out(img.height, img.width, img.channels);
  for (std::size_t c = 0; c < img.channels; ++c)
    for (std::size_t y = 0; y < img.height; ++y)
      for (std::size_t x = 0; x < img.width; ++x) out.at(c, x, img.height - 1 - y) = img.at(c, y, x);
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

GeneratorSet radial_generators(std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<ImageTensor> xs;
  for (std::size_t i = 0; i < samples; ++i) {
    ImageTensor x(2, 1, 1);
    x.pixels = {static_cast<float>(n(rng)), static_cast<float>(n(rng))};
    xs.push_back(x);
  }
  const GradientProvider grad = [](std::span<const double> x) { return std::vector<double>{2 * x[0], 2 * x[1]}; };
  return extract_generators(polarization(grad, xs, AlgebraParam::pixel_linear(2)), 1, AlgebraMode::PixelLinear);
}

}  // namespace

TEST(Algebra, Dimensions) {
  EXPECT_EQ(AlgebraParam::affine2d().dimension(), 6u);
  EXPECT_EQ(AlgebraParam::pixel_linear(3).dimension(), 9u);
  EXPECT_THROW(AlgebraParam::pixel_linear(0), ConfigError);
  EXPECT_THROW(AlgebraParam::pixel_linear(kMaxPixelLinearInputs + 1), ConfigError);
}

TEST(Algebra, AffineGeneratorMatrixLayout) {
  const std::vector<double> c{1, 2, 3, 4, 5, 6};
  const Matrix m = affine_generator_matrix(c);
  EXPECT_EQ(m, (Matrix{{3, -5 + 6, 1}, {5, 4, 2}, {0, 0, 0}}));
  EXPECT_THROW(affine_generator_matrix(std::vector<double>{1, 2}), NumericError);
}

TEST(BasisAction, PixelLinearMovesOneEntry) {
  ImageTensor x(3, 1, 1);
  x.pixels = {1, 2, 3};
  const auto p = AlgebraParam::pixel_linear(3);
  EXPECT_EQ(basis_action(p, 0 * 3 + 2, x), (std::vector<double>{3, 0, 0}));
  EXPECT_EQ(basis_action(p, 2 * 3 + 1, x), (std::vector<double>{0, 0, 2}));
  EXPECT_THROW(basis_action(p, 9, x), NumericError);
  EXPECT_THROW(basis_action(AlgebraParam::pixel_linear(4), 0, x), DataError);
}

TEST(BasisAction, TranslationOfRampIsConstant) {
  // f = (x + 1) / 2 has unit-normalized x-derivative 1/2; d/dt f(p - t e_x) = -1/2.
  const std::size_t n = 16;
  ImageTensor ramp(n, n, 1);
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t x = 0; x < n; ++x) ramp.at(0, y, x) = static_cast<float>((coord(x, n) + 1) / 2);
  const auto tx = basis_action(AlgebraParam::affine2d(), 0, ramp);
  const auto ty = basis_action(AlgebraParam::affine2d(), 1, ramp);
  for (double v : tx) EXPECT_NEAR(v, -0.5, 1e-6);
  for (double v : ty) EXPECT_EQ(v, 0.0);
}

TEST(BasisAction, RotationAnnihilatesCenteredBlob) {
  const std::size_t n = 32;
  ImageTensor d(n, n, 1);
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t x = 0; x < n; ++x)
      d.at(0, y, x) = static_cast<float>(std::exp(-(std::pow(coord(x, n), 2) + std::pow(coord(y, n), 2)) / 0.2));
  const auto rot = basis_action(AlgebraParam::affine2d(), kAffineRotation, d);
  const auto tx = basis_action(AlgebraParam::affine2d(), 0, d);
  EXPECT_LT(std::sqrt(dot(rot, rot)), 1e-2 * std::sqrt(dot(tx, tx)));
}

TEST(Polarization, AnalyticRadialScorer) {
  const auto set = radial_generators(64, 3);
  const double s = 1 / std::sqrt(2.0);
  const std::vector<double> rotation{0, s, -s, 0};
  EXPECT_GT(std::abs(dot(set.generators[0], rotation)), 0.999);
  EXPECT_NEAR(set.singular_values[0], 0.0, 1e-10);
}

TEST(Polarization, RowsAreUnitUnlessZero) {
  std::vector<ImageTensor> xs(3, ImageTensor(2, 1, 1));
  xs[0].pixels = {1, 2};
  xs[1].pixels = {0, 0};
  xs[2].pixels = {-3, 0.5};
  const GradientProvider grad = [](std::span<const double> x) { return std::vector<double>{x[1], x[0]}; };
  const Matrix e = polarization(grad, xs, AlgebraParam::pixel_linear(2));
  for (std::size_t r : {0u, 2u}) EXPECT_NEAR(dot(e.row(r), e.row(r)), 1.0, 1e-12);
  EXPECT_EQ(dot(e.row(1), e.row(1)), 0.0);
  const Matrix raw = polarization(grad, xs, AlgebraParam::pixel_linear(2), false);
  EXPECT_EQ(raw(0, 0), 2.0 * 1.0);  // grad_0 * x_0
  EXPECT_THROW(polarization(grad, {}, AlgebraParam::pixel_linear(2)), DataError);
  const GradientProvider bad = [](std::span<const double>) { return std::vector<double>{1}; };
  EXPECT_THROW(polarization(bad, xs, AlgebraParam::pixel_linear(2)), DataError);
}

TEST(Extract, OrthonormalAscendingAndSigned) {
  const Matrix e = random_matrix(40, 6, 17);
  const auto set = extract_generators(e, 4);
  ASSERT_EQ(set.k(), 4u);
  ASSERT_EQ(set.spectrum.size(), 6u);
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = 0; b < 4; ++b)
      EXPECT_NEAR(dot(set.generators[a], set.generators[b]), a == b ? 1.0 : 0.0, 1e-12);
    if (a > 0) EXPECT_LE(set.singular_values[a - 1], set.singular_values[a]);
    const auto& g = set.generators[a];
    EXPECT_GT(*std::max_element(g.begin(), g.end(), [](double x, double y) { return std::abs(x) < std::abs(y); }), 0);
  }
  EXPECT_NEAR(set.singular_values[0], set.spectrum.back(), 1e-12);
  // Each generator is a right singular vector: |e g| equals its singular value.
  for (std::size_t a = 0; a < 4; ++a) {
    double sq = 0;
    for (std::size_t r = 0; r < e.rows(); ++r) sq += std::pow(dot(e.row(r), set.generators[a]), 2);
    EXPECT_NEAR(std::sqrt(sq), set.singular_values[a], 1e-10);
  }
}

TEST(Extract, ExactSymmetryHasZeroSingularValue) {
  Matrix e = random_matrix(30, 6, 5);
  for (std::size_t r = 0; r < e.rows(); ++r) e(r, kAffineRotation) = 0.0;
  const auto set = extract_generators(e, 1);
  EXPECT_NEAR(std::abs(set.generators[0][kAffineRotation]), 1.0, 1e-12);
  EXPECT_NEAR(set.singular_values[0], 0.0, 1e-12);
}

TEST(Extract, InvariantToPositiveRowScaling) {
  const Matrix e = random_matrix(25, 6, 8);
  Matrix scaled = e;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  for (std::size_t r = 0; r < e.rows(); ++r) {
    const double s = u(rng);
    for (double& v : scaled.row(r)) v *= s;
  }
  const auto a = extract_generators(normalize_rows(e), 3);
  const auto b = extract_generators(normalize_rows(scaled), 3);
  EXPECT_LT(max_abs_diff(projector(a.basis()), projector(b.basis())), 1e-10);
}

TEST(Extract, WideMatrixUsesExactNullSpace) {
  const Matrix e = random_matrix(3, 10, 21);
  const auto set = extract_generators(e, 7, AlgebraMode::PixelLinear);
  for (double s : set.singular_values) EXPECT_EQ(s, 0.0);
  for (const auto& g : set.generators)
    for (std::size_t r = 0; r < e.rows(); ++r) EXPECT_NEAR(dot(e.row(r), g), 0.0, 1e-12);
  // The seven vectors span exactly the orthogonal complement of the row space.
  const Matrix rows = orthonormal_basis(e.transposed());
  const Matrix complement = Matrix::identity(10) - projector(rows);
  EXPECT_LT(max_abs_diff(projector(set.basis()), complement), 1e-10);
  // Asking for more than the null space falls through to the smallest non-zero direction.
  const auto more = extract_generators(e, 8, AlgebraMode::PixelLinear);
  EXPECT_NEAR(more.singular_values[7], more.spectrum[2], 1e-12);
  EXPECT_GT(more.singular_values[7], 0.0);
}

TEST(Extract, WideAgreesWithFullDecomposition) {
  const Matrix e = random_matrix(5, 9, 4);
  Matrix tall(9, 9);
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 0; c < 9; ++c) tall(r, c) = e(r, c);
  const auto wide = extract_generators(e, 6);
  const auto full = extract_generators(tall, 6);
  EXPECT_LT(max_abs_diff(projector(wide.basis()), projector(full.basis())), 1e-9);
}

TEST(Extract, RejectsBadArguments) {
  EXPECT_THROW(extract_generators(Matrix(), 1), NumericError);
  EXPECT_THROW(extract_generators(random_matrix(4, 6, 1), 0), NumericError);
  EXPECT_THROW(extract_generators(random_matrix(4, 6, 1), 7), NumericError);
}

TEST(Flow, ZeroTimeIsBitExactIdentity) {
  const ImageTensor img = disk(20, 0.3, -0.2, 0.3);
  const std::vector<double> g{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  EXPECT_EQ(generator_flow(img, g, 0.0), img);
}

TEST(Flow, QuarterTurnMatchesDirectRotation) {
  const ImageTensor img = disk(48, 0.35, -0.2, 0.3);
  std::vector<double> rotation(kAffineDim, 0.0);
  rotation[kAffineRotation] = 1.0;
  const ImageTensor flowed = generator_flow(img, rotation, std::numbers::pi / 2);
  const ImageTensor direct = rotate90(img);
  double mae = 0;
  for (std::size_t i = 0; i < img.pixels.size(); ++i) mae += std::abs(flowed.pixels[i] - direct.pixels[i]);
  EXPECT_LT(mae / img.pixels.size(), 2e-2);
}

TEST(Flow, TranslationByOnePixel) {
  const std::size_t n = 10;
  ImageTensor img(n, n, 1);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<float>(i % 7) / 7.0f;
  std::vector<double> tx(kAffineDim, 0.0);
  tx[0] = 1.0;
  // One pixel is 2/n in normalized coordinates.
  const ImageTensor out = generator_flow(img, tx, 2.0 / n);
  for (std::size_t y = 0; y < n; ++y) {
    EXPECT_EQ(out.at(0, y, 0), 0.0f);
    for (std::size_t x = 1; x < n; ++x) EXPECT_NEAR(out.at(0, y, x), img.at(0, y, x - 1), 1e-6);
  }
}

TEST(Flow, StripHasFivePanelsWithIdentityInTheMiddle) {
  const ImageTensor img = disk(12, 0.2, 0.1, 0.4);
  const std::vector<double> g{0, 0, 0, 0, 1, 0};
  const ImageTensor strip = flow_strip(img, g, 0.3);
  ASSERT_EQ(strip.width, 60u);
  for (std::size_t y = 0; y < 12; ++y)
    for (std::size_t x = 0; x < 12; ++x) EXPECT_EQ(strip.at(0, y, 24 + x), img.at(0, y, x));
}

TEST(Flow, RejectsPixelLinearSets) {
  const auto set = radial_generators(8, 1);
  EXPECT_THROW(generator_flow(ImageTensor(2, 1, 1), set, 0, 0.1), ConfigError);
  GeneratorSet affine;
  affine.generators = {{0, 0, 0, 0, 1, 0}};
  EXPECT_THROW(generator_flow(ImageTensor(4, 4, 1), affine, 1, 0.1), ConfigError);
}

TEST(Flow, CompositionMatchesSummedTime) {
  const ImageTensor img = disk(40, 0.1, 0.15, 0.45);
  std::mt19937_64 rng(12);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> g(kAffineDim);
    for (double& v : g) v = 0.3 * n(rng);
    const ImageTensor twice = generator_flow(generator_flow(img, g, 0.3), g, 0.4);
    const ImageTensor once = generator_flow(img, g, 0.7);
    double mae = 0;
    for (std::size_t i = 0; i < img.pixels.size(); ++i) mae += std::abs(twice.pixels[i] - once.pixels[i]);
    EXPECT_LT(mae / img.pixels.size(), 5e-2);
  }
}

TEST(Extract, NullSpaceSoundness) {
  // Rank-3 rows in R^6: the three null directions satisfy |E v| <= eps |E|.
  const Matrix e = random_matrix(20, 3, 31) * random_matrix(3, 6, 32);
  const auto set = extract_generators(e, 3);
  const double eps = 1e-10;
  for (std::size_t a = 0; a < 3; ++a) {
    ASSERT_LT(set.singular_values[a], eps * e.frobenius_norm());
    double sq = 0;
    for (std::size_t r = 0; r < e.rows(); ++r) sq += std::pow(dot(e.row(r), set.generators[a]), 2);
    EXPECT_LE(std::sqrt(sq), eps * e.frobenius_norm());
  }
}

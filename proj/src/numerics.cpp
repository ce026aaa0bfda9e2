#include "liestyle/numerics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "liestyle/errors.hpp"

namespace liestyle {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMat> view(const Matrix& m) {
  return {m.data().data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols())};
}

Matrix from_eigen(const Eigen::Ref<const Eigen::MatrixXd>& e) {
  Matrix out(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(e.cols()));
  for (Eigen::Index r = 0; r < e.rows(); ++r)
    for (Eigen::Index c = 0; c < e.cols(); ++c) out(r, c) = e(r, c);
  return out;
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.all_finite()) throw NumericError(std::string(what) + ": input contains non-finite entries");
}

double norm1(const Matrix& m) {
  double best = 0.0;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) s += std::abs(m(r, c));
    best = std::max(best, s);
  }
  return best;
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_)
    throw NumericError("Matrix: data length " + std::to_string(data_.size()) + " does not match " +
                       std::to_string(rows_) + "x" + std::to_string(cols_));
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw NumericError("Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Matrix Matrix::from_columns(const std::vector<std::vector<double>>& cols) {
  if (cols.empty()) return {};
  Matrix m(cols.front().size(), cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (cols[c].size() != m.rows()) throw NumericError("Matrix::from_columns: ragged columns");
    for (std::size_t r = 0; r < m.rows(); ++r) m(r, c) = cols[c][r];
  }
  return m;
}

std::vector<double> Matrix::col(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double Matrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw NumericError("matrix product: inner dimensions " + std::to_string(a.cols()) + " and " +
                       std::to_string(b.rows()) + " differ");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw NumericError("matrix sum: shape mismatch");
  Matrix out = a;
  for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] += b.data()[i];
  return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw NumericError("matrix difference: shape mismatch");
  Matrix out = a;
  for (std::size_t i = 0; i < out.data().size(); ++i) out.data()[i] -= b.data()[i];
  return out;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix out = a;
  for (double& v : out.data()) v *= s;
  return out;
}

SvdResult svd(const Matrix& m, SvdMode mode) {
  if (m.rows() == 0 || m.cols() == 0) throw NumericError("svd: empty matrix");
  require_finite(m, "svd");
  const Eigen::MatrixXd e = view(m);
  const unsigned opts = mode == SvdMode::Full ? (Eigen::ComputeFullU | Eigen::ComputeFullV)
                                              : (Eigen::ComputeThinU | Eigen::ComputeThinV);
  // BDCSVD falls back to one-sided Jacobi below its block size.
  Eigen::BDCSVD<Eigen::MatrixXd> dec(e, opts);
  SvdResult out;
  out.u = from_eigen(dec.matrixU());
  out.vt = from_eigen(dec.matrixV().transpose());
  const auto& s = dec.singularValues();
  out.singular_values.assign(s.data(), s.data() + s.size());
  return out;
}

Matrix orthonormal_basis(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) throw NumericError("orthonormal_basis: empty matrix");
  if (m.cols() > m.rows())
    throw NumericError("orthonormal_basis: " + std::to_string(m.cols()) + " columns cannot be independent in R^" +
                       std::to_string(m.rows()));
  const auto s = svd(m).singular_values;
  const double tol = 1e-10 * std::max(s.front(), 1e-300);
  const auto deficient = std::count_if(s.begin(), s.end(), [&](double v) { return v <= tol; });
  if (s.front() == 0.0 || deficient > 0)
    throw NumericError("orthonormal_basis: rank-deficient input, " +
                       std::to_string(s.front() == 0.0 ? s.size() : static_cast<std::size_t>(deficient)) + " of " +
                       std::to_string(m.cols()) + " columns dependent");

  const Eigen::MatrixXd e = view(m);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(e);
  const Eigen::Index k = e.cols();
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(e.rows(), k);
  // Positive diagonal in R makes Q coincide with Gram-Schmidt.
  const Eigen::MatrixXd& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < k; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  return from_eigen(q);
}

std::vector<double> principal_angles(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows())
    throw NumericError("principal_angles: ambient dimensions " + std::to_string(a.rows()) + " and " +
                       std::to_string(b.rows()) + " differ");
  const Matrix qa = orthonormal_basis(a);
  const Matrix qb = orthonormal_basis(b);
  // Angles from the distance between paired principal vectors, 2 asin(|x - y| / 2),
  // which stays accurate near zero where acos of the cosines does not.
  const SvdResult dec = svd(qa.transposed() * qb);
  const Matrix x = qa * dec.u;
  const Matrix y = qb * dec.vt.transposed();
  std::vector<double> angles;
  angles.reserve(dec.singular_values.size());
  for (std::size_t i = 0; i < dec.singular_values.size(); ++i) {
    double sq = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) sq += (x(r, i) - y(r, i)) * (x(r, i) - y(r, i));
    angles.push_back(2.0 * std::asin(std::min(1.0, std::sqrt(sq) / 2.0)));
  }
  std::sort(angles.begin(), angles.end());
  return angles;
}

Matrix matrix_exp(const Matrix& a, double t) {
  if (a.rows() != a.cols()) throw NumericError("matrix_exp: matrix is not square");
  require_finite(a, "matrix_exp");
  const std::size_t n = a.rows();
  Matrix x = t * a;
  const double nrm = norm1(x);
  if (nrm == 0.0) return Matrix::identity(n);

  int squarings = 0;
  if (nrm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
  x = std::ldexp(1.0, -squarings) * x;

  // Taylor series on the scaled matrix; ||x||_1 <= 0.5 so 30 terms is far past convergence.
  Matrix result = Matrix::identity(n);
  Matrix term = Matrix::identity(n);
  for (int k = 1; k <= 30; ++k) {
    term = (1.0 / k) * (term * x);
    result = result + term;
    if (term.frobenius_norm() <= 1e-18 * result.frobenius_norm()) break;
  }
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

}  // namespace liestyle

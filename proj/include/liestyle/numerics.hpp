#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace liestyle {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> d);
  /// Builds a matrix whose columns are the given vectors.
  static Matrix from_columns(const std::vector<std::vector<double>>& cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::vector<double> col(std::size_t c) const;

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  Matrix transposed() const;
  bool all_finite() const;
  double frobenius_norm() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);

struct SvdResult {
  Matrix u;                             // rows x r (thin) or rows x rows (full)
  std::vector<double> singular_values;  // descending, length min(rows, cols)
  Matrix vt;                            // r x cols (thin) or cols x cols (full)
};

enum class SvdMode { Thin, Full };

/// Singular value decomposition. Throws NumericError on non-finite input.
SvdResult svd(const Matrix& m, SvdMode mode = SvdMode::Thin);

/// Orthonormal basis for the column span of m (columns independent to 1e-10).
Matrix orthonormal_basis(const Matrix& m);

/// Principal angles between the column spans of a and b, ascending in [0, pi/2].
std::vector<double> principal_angles(const Matrix& a, const Matrix& b);

/// exp(t * a) by scaling and squaring.
Matrix matrix_exp(const Matrix& a, double t = 1.0);

}  // namespace liestyle

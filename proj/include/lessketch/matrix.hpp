#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include "lessketch/error.hpp"

namespace lessketch {

using Vector = std::vector<double>;

/// Dense row-major real matrix. Value type; copies are deep.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      require(r.size() == cols_, Errc::DimensionMismatch, "ragged initializer list");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
    return out;
  }

  static Matrix diagonal(std::span<const double> values) {
    Matrix out(values.size(), values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out(i, i) = values[i];
    return out;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  Matrix transpose() const {
    Matrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
    return out;
  }

  double trace() const noexcept {
    double t = 0.0;
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
    return t;
  }

  Matrix& operator+=(const Matrix& other) {
    require(same_shape(other), Errc::DimensionMismatch, "matrix += shape mismatch");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
    return *this;
  }
  Matrix& operator-=(const Matrix& other) {
    require(same_shape(other), Errc::DimensionMismatch, "matrix -= shape mismatch");
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
    return *this;
  }
  Matrix& operator*=(double s) noexcept {
    for (double& v : data_) v *= s;
    return *this;
  }

  bool same_shape(const Matrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
inline Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
inline Matrix operator*(Matrix a, double s) { return a *= s; }
inline Matrix operator*(double s, Matrix a) { return a *= s; }

inline Matrix operator*(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), Errc::DimensionMismatch, "matrix product shape mismatch");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto dst = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto src = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) dst[j] += aik * src[j];
    }
  }
  return out;
}

inline Vector operator*(const Matrix& a, std::span<const double> x) {
  require(a.cols() == x.size(), Errc::DimensionMismatch, "matrix-vector shape mismatch");
  Vector out(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = a.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) s += r[j] * x[j];
    out[i] = s;
  }
  return out;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  require(a.same_shape(b), Errc::DimensionMismatch, "max_abs_diff shape mismatch");
  double m = 0.0;
  auto va = a.values();
  auto vb = b.values();
  for (std::size_t k = 0; k < va.size(); ++k) m = std::max(m, std::abs(va[k] - vb[k]));
  return m;
}

inline double frobenius_norm(const Matrix& a) { return norm2(a.values()); }

/// The n x d data matrix: d <= n. Full column rank is checked lazily by the
/// factorizations that need it.
class TallMatrix {
 public:
  TallMatrix() = default;
  explicit TallMatrix(Matrix entries) : entries_(std::move(entries)) {
    require(entries_.rows() >= 1 && entries_.cols() >= 1, Errc::ShapeInvalid,
            "data matrix must be non-empty");
    require(entries_.cols() <= entries_.rows(), Errc::ShapeInvalid,
            "data matrix must have d <= n");
  }

  std::size_t n() const noexcept { return entries_.rows(); }
  std::size_t d() const noexcept { return entries_.cols(); }
  std::span<const double> row(std::size_t i) const noexcept { return entries_.row(i); }
  const Matrix& matrix() const noexcept { return entries_; }

 private:
  Matrix entries_;
};

/// Symmetric d x d matrix; positive definiteness is established by Cholesky.
class SpdMatrix {
 public:
  static constexpr double kSymmetryTolerance = 1e-12;

  SpdMatrix() = default;
  explicit SpdMatrix(Matrix entries) : entries_(std::move(entries)) {
    require(entries_.rows() == entries_.cols(), Errc::DimensionMismatch,
            "symmetric matrix must be square");
    for (std::size_t i = 0; i < entries_.rows(); ++i)
      for (std::size_t j = i + 1; j < entries_.cols(); ++j)
        require(std::abs(entries_(i, j) - entries_(j, i)) <= kSymmetryTolerance,
                Errc::InvalidArgument, "matrix is not symmetric");
  }

  std::size_t dim() const noexcept { return entries_.rows(); }
  double operator()(std::size_t i, std::size_t j) const noexcept { return entries_(i, j); }
  const Matrix& matrix() const noexcept { return entries_; }

 private:
  Matrix entries_;
};

/// n x d matrix with orthonormal columns.
class OrthonormalBasis {
 public:
  static constexpr double kOrthonormalityTolerance = 1e-10;

  OrthonormalBasis() = default;
  explicit OrthonormalBasis(Matrix entries) : entries_(std::move(entries)) {
    const std::size_t d = entries_.cols();
    require(d >= 1 && d <= entries_.rows(), Errc::ShapeInvalid, "basis must be n x d with d <= n");
    Matrix g(d, d);
    for (std::size_t i = 0; i < entries_.rows(); ++i) {
      auto r = entries_.row(i);
      for (std::size_t a = 0; a < d; ++a)
        for (std::size_t b = 0; b < d; ++b) g(a, b) += r[a] * r[b];
    }
    require(max_abs_diff(g, Matrix::identity(d)) <= kOrthonormalityTolerance,
            Errc::InvalidArgument, "columns are not orthonormal");
  }

  std::size_t n() const noexcept { return entries_.rows(); }
  std::size_t d() const noexcept { return entries_.cols(); }
  std::span<const double> row(std::size_t i) const noexcept { return entries_.row(i); }
  const Matrix& matrix() const noexcept { return entries_; }

 private:
  Matrix entries_;
};

}  // namespace lessketch

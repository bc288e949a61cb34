#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "uzvec/rng.hpp"

namespace uzvec {

// Dense row-major matrix. Rows are parameter vectors; kept deliberately
// plain so trainers can do unsynchronized in-place updates.
template <typename Real>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::int64_t rows, std::int64_t cols)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols)) {}
  Matrix(std::int64_t rows, std::int64_t cols, std::vector<Real>&& data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {}

  std::int64_t rows() const { return rows_; }
  std::int64_t cols() const { return cols_; }

  std::span<Real> row(std::int64_t i) {
    return {data_.data() + i * cols_, static_cast<std::size_t>(cols_)};
  }
  std::span<const Real> row(std::int64_t i) const {
    return {data_.data() + i * cols_, static_cast<std::size_t>(cols_)};
  }

  Real* data() { return data_.data(); }
  const Real* data() const { return data_.data(); }
  std::size_t size() const { return data_.size(); }

  void fill(Real v) { std::fill(data_.begin(), data_.end(), v); }

  void fill_uniform(Rng& rng, Real lo, Real hi) {
    for (auto& x : data_) x = static_cast<Real>(rng.uniform(lo, hi));
  }

  bool all_finite() const {
    for (Real x : data_) {
      if (!std::isfinite(static_cast<double>(x))) return false;
    }
    return true;
  }

  bool operator==(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
  }

 private:
  std::int64_t rows_ = 0;
  std::int64_t cols_ = 0;
  std::vector<Real> data_;
};

template <typename Real>
inline Real dot(std::span<const Real> a, std::span<const Real> b) {
  Real s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

template <typename Real>
inline void axpy(Real alpha, std::span<const Real> x, std::span<Real> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace uzvec

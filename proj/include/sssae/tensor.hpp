#pragma once

#include <cstddef>
#include <vector>

#include "sssae/rng.hpp"

namespace sssae {

// Vectors are plain std::vector<double>; everything in the library is
// 64-bit floating point.
using Vec = std::vector<double>;

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  double* row(std::size_t r) { return data_.data() + r * cols_; }
  const double* row(std::size_t r) const { return data_.data() + r * cols_; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// result[i] = sum_j m(i,j) * v[j]; throws ShapeError on mismatch.
Vec matvec(const Matrix& m, const Vec& v);

// out = m*v + bias (bias may be null); out is resized to m.rows().
void affine_into(Vec& out, const Matrix& m, const Vec& v, const Vec* bias);

// acc += scale * m^T * d, with d.len == m.rows() and acc.len == m.cols().
void add_matvec_transposed(Vec& acc, const Matrix& m, const Vec& d, double scale);

// acc(i,:) += scale * d[i] * x, the rank-one update used for weight gradients.
void add_outer_scaled(Matrix& acc, const Vec& d, const Vec& x, double scale);

Vec tanh_map(const Vec& v);
void tanh_inplace(Vec& v);

// Numerically safe softmax (max-logit subtraction); output sums to 1.
Vec softmax(const Vec& logits);

double squared_distance(const Vec& a, const Vec& b);

// Entries i.i.d. uniform in [-scale, +scale], drawn row-major.
Matrix uniform_init(Rng& rng, std::size_t rows, std::size_t cols, double scale);

bool all_finite(const Vec& v);
bool all_finite(const Matrix& m);

// Exact byte-level comparison, used by determinism checks.
bool bitwise_equal(const Vec& a, const Vec& b);
bool bitwise_equal(const Matrix& a, const Matrix& b);

}  // namespace sssae

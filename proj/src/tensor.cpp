#include "sssae/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "sssae/error.hpp"
#include "sssae/kernels.hpp"

namespace sssae {

namespace {

std::string shape_of(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

Vec matvec(const Matrix& m, const Vec& v) {
  Vec out;
  affine_into(out, m, v, nullptr);
  return out;
}

void affine_into(Vec& out, const Matrix& m, const Vec& v, const Vec* bias) {
  if (m.cols() != v.size()) {
    throw ShapeError("matvec: matrix is " + shape_of(m) + " but vector has length " +
                     std::to_string(v.size()));
  }
  if (bias && bias->size() != m.rows()) {
    throw ShapeError("matvec: matrix is " + shape_of(m) + " but bias has length " +
                     std::to_string(bias->size()));
  }
  out.resize(m.rows());
  kernels::affine(out.data(), m.data(), m.rows(), m.cols(), v.data(),
                  bias ? bias->data() : nullptr);
}

void add_matvec_transposed(Vec& acc, const Matrix& m, const Vec& d, double scale) {
  if (m.rows() != d.size() || m.cols() != acc.size()) {
    throw ShapeError("matvec_transposed: matrix is " + shape_of(m) +
                     " but vectors have lengths " + std::to_string(d.size()) + " and " +
                     std::to_string(acc.size()));
  }
  for (std::size_t r = 0; r < m.rows(); ++r) {
    kernels::axpy(acc.data(), scale * d[r], m.row(r), m.cols());
  }
}

void add_outer_scaled(Matrix& acc, const Vec& d, const Vec& x, double scale) {
  if (acc.rows() != d.size() || acc.cols() != x.size()) {
    throw ShapeError("outer: accumulator is " + shape_of(acc) +
                     " but vectors have lengths " + std::to_string(d.size()) + " and " +
                     std::to_string(x.size()));
  }
  for (std::size_t r = 0; r < acc.rows(); ++r) {
    kernels::axpy(acc.row(r), scale * d[r], x.data(), acc.cols());
  }
}

Vec tanh_map(const Vec& v) {
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::tanh(v[i]);
  return out;
}

void tanh_inplace(Vec& v) {
  for (double& value : v) value = std::tanh(value);
}

Vec softmax(const Vec& logits) {
  Vec out(logits.size());
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    total += out[i];
  }
  for (double& value : out) value /= total;
  return out;
}

double squared_distance(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) {
    throw ShapeError("squared_distance: lengths " + std::to_string(a.size()) + " and " +
                     std::to_string(b.size()) + " differ");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    total += diff * diff;
  }
  return total;
}

Matrix uniform_init(Rng& rng, std::size_t rows, std::size_t cols, double scale) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) {
    m.data()[i] = rng.uniform(-scale, scale);
  }
  return m;
}

bool all_finite(const Vec& v) {
  for (double value : v) {
    if (!std::isfinite(value)) return false;
  }
  return true;
}

bool all_finite(const Matrix& m) {
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!std::isfinite(m.data()[i])) return false;
  }
  return true;
}

bool bitwise_equal(const Vec& a, const Vec& b) {
  return a.size() == b.size() &&
         (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

bool bitwise_equal(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a.size() == 0 ||
          std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

}  // namespace sssae

#include <doctest.h>

#include <cmath>
#include <vector>

#include "sssae/kernels.hpp"
#include "sssae/rng.hpp"

namespace kern = sssae::kernels;
using sssae::Rng;

namespace {

std::vector<double> random_values(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

// Relative difference against a scalar-reference result.
double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

}  // namespace

TEST_CASE("scalar dot and axpy hand cases") {
  const double a[] = {1.0, 2.0, 3.0};
  const double b[] = {4.0, 5.0, 6.0};
  CHECK(kern::scalar::dot(a, b, 3) == 32.0);

  double y[] = {1.0, 1.0, 1.0};
  kern::scalar::axpy(y, 2.0, a, 3);
  CHECK(y[0] == 3.0);
  CHECK(y[1] == 5.0);
  CHECK(y[2] == 7.0);
}

TEST_CASE("scalar affine with and without bias") {
  // [[1,2],[3,4]] * [1,1]
  const double m[] = {1.0, 2.0, 3.0, 4.0};
  const double x[] = {1.0, 1.0};
  double out[2];
  kern::scalar::affine(out, m, 2, 2, x, nullptr);
  CHECK(out[0] == 3.0);
  CHECK(out[1] == 7.0);

  const double bias[] = {10.0, 20.0};
  kern::scalar::affine(out, m, 2, 2, x, bias);
  CHECK(out[0] == 13.0);
  CHECK(out[1] == 27.0);
}

TEST_CASE("SIMD backends match the scalar reference") {
  const kern::Backend original = kern::active_backend();
  for (const kern::Backend simd : {kern::Backend::kAvx2, kern::Backend::kNeon}) {
    if (!kern::backend_supported(simd)) continue;
    CAPTURE(kern::backend_name(simd));
    Rng rng(31337);

    // odd lengths exercise every tail path
    for (const std::size_t n :
         {std::size_t{1}, std::size_t{2}, std::size_t{3}, std::size_t{4},
          std::size_t{5}, std::size_t{7}, std::size_t{8}, std::size_t{15},
          std::size_t{16}, std::size_t{17}, std::size_t{64}, std::size_t{129},
          std::size_t{429}, std::size_t{1001}}) {
      const std::vector<double> a = random_values(rng, n);
      const std::vector<double> b = random_values(rng, n);

      const double want = kern::scalar::dot(a.data(), b.data(), n);
      kern::set_backend(simd);
      const double got = kern::dot(a.data(), b.data(), n);
      kern::set_backend(kern::Backend::kScalar);
      CHECK(rel_diff(want, got) < 1e-12);

      std::vector<double> y_ref = random_values(rng, n);
      std::vector<double> y_simd = y_ref;
      kern::scalar::axpy(y_ref.data(), 0.37, a.data(), n);
      kern::set_backend(simd);
      kern::axpy(y_simd.data(), 0.37, a.data(), n);
      kern::set_backend(kern::Backend::kScalar);
      for (std::size_t i = 0; i < n; ++i) {
        REQUIRE(rel_diff(y_ref[i], y_simd[i]) < 1e-12);
      }
    }

    // matrices with ragged shapes
    for (const auto [rows, cols] :
         {std::pair<std::size_t, std::size_t>{1, 1}, {3, 5}, {4, 4}, {5, 3},
          {7, 17}, {16, 429}, {48, 31}}) {
      const std::vector<double> m = random_values(rng, rows * cols);
      const std::vector<double> x = random_values(rng, cols);
      const std::vector<double> bias = random_values(rng, rows);
      std::vector<double> want(rows);
      std::vector<double> got(rows);
      kern::scalar::affine(want.data(), m.data(), rows, cols, x.data(), bias.data());
      kern::set_backend(simd);
      kern::affine(got.data(), m.data(), rows, cols, x.data(), bias.data());
      kern::set_backend(kern::Backend::kScalar);
      for (std::size_t i = 0; i < rows; ++i) {
        REQUIRE(rel_diff(want[i], got[i]) < 1e-12);
      }
    }
  }
  kern::set_backend(original);
}

TEST_CASE("backend selection round-trips") {
  const kern::Backend original = kern::active_backend();
  kern::set_backend(kern::Backend::kScalar);
  CHECK(kern::active_backend() == kern::Backend::kScalar);
  kern::set_backend(original);
  CHECK(kern::active_backend() == original);
  CHECK(kern::backend_supported(kern::Backend::kScalar));
}

TEST_CASE("a fixed backend is deterministic") {
  Rng rng(5);
  const std::vector<double> a = random_values(rng, 429);
  const std::vector<double> b = random_values(rng, 429);
  const double first = kern::dot(a.data(), b.data(), a.size());
  const double second = kern::dot(a.data(), b.data(), a.size());
  CHECK(first == second);
}

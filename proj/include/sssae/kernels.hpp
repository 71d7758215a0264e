#pragma once

#include <cstddef>

// Data-parallel inner loops behind the linear algebra layer. Every kernel
// exists as a scalar reference implementation plus SIMD variants (AVX2+FMA
// on x86-64, NEON on aarch64) selected once at startup. A given backend uses
// a fixed summation order, so results are deterministic for identical inputs
// on the same machine; the SIMD variants are equivalence-tested against the
// scalar reference within floating-point reassociation tolerance.
namespace sssae::kernels {

enum class Backend {
  kScalar,
  kAvx2,
  kNeon,
};

const char* backend_name(Backend b);
bool backend_supported(Backend b);

// Best supported backend, honouring the SSSAE_KERNELS environment variable
// ("scalar", "avx2", "neon") when set.
Backend detect_backend();

Backend active_backend();
void set_backend(Backend b);  // throws ConfigError if unsupported here

// sum_i a[i] * b[i]
double dot(const double* a, const double* b, std::size_t n);

// y[i] += alpha * x[i]
void axpy(double* y, double alpha, const double* x, std::size_t n);

// out = m * x + bias, with m row-major rows x cols; bias may be null.
void affine(double* out, const double* m, std::size_t rows, std::size_t cols,
            const double* x, const double* bias);

// Reference implementations, always available. Tests use these as the
// oracle for the SIMD paths.
namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double* y, double alpha, const double* x, std::size_t n);
void affine(double* out, const double* m, std::size_t rows, std::size_t cols,
            const double* x, const double* bias);
}  // namespace scalar

}  // namespace sssae::kernels

#pragma once

#include <cstddef>

// Per-architecture kernel entry points. Each namespace is defined in its own
// translation unit compiled with the matching ISA flags; the dispatcher in
// kernels.cpp only calls them after a runtime CPU check.
namespace sssae::kernels {

#ifdef SSSAE_HAVE_AVX2
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double* y, double alpha, const double* x, std::size_t n);
void affine(double* out, const double* m, std::size_t rows, std::size_t cols,
            const double* x, const double* bias);
}  // namespace avx2
#endif

#ifdef SSSAE_HAVE_NEON
namespace neon {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double* y, double alpha, const double* x, std::size_t n);
void affine(double* out, const double* m, std::size_t rows, std::size_t cols,
            const double* x, const double* bias);
}  // namespace neon
#endif

}  // namespace sssae::kernels

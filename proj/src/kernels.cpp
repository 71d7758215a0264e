#include "sssae/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <string>

#include "kernels_internal.hpp"
#include "sssae/error.hpp"

namespace sssae::kernels {

namespace scalar {

double dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double* y, double alpha, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void affine(double* out, const double* m, std::size_t rows, std::size_t cols,
            const double* x, const double* bias) {
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = bias ? bias[r] : 0.0;
    const double* row = m + r * cols;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    out[r] = acc;
  }
}

}  // namespace scalar

namespace {

struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double*, double, const double*, std::size_t);
  void (*affine)(double*, const double*, std::size_t, std::size_t,
                 const double*, const double*);
};

constexpr KernelTable kScalarTable{scalar::dot, scalar::axpy, scalar::affine};

#ifdef SSSAE_HAVE_AVX2
constexpr KernelTable kAvx2Table{avx2::dot, avx2::axpy, avx2::affine};
#endif
#ifdef SSSAE_HAVE_NEON
constexpr KernelTable kNeonTable{neon::dot, neon::axpy, neon::affine};
#endif

const KernelTable* table_for(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return &kScalarTable;
    case Backend::kAvx2:
#ifdef SSSAE_HAVE_AVX2
      return &kAvx2Table;
#else
      return nullptr;
#endif
    case Backend::kNeon:
#ifdef SSSAE_HAVE_NEON
      return &kNeonTable;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

bool cpu_has(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return true;
    case Backend::kAvx2:
#if defined(SSSAE_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::kNeon:
#if defined(SSSAE_HAVE_NEON)
      return true;  // NEON is baseline on aarch64
#else
      return false;
#endif
  }
  return false;
}

struct Dispatch {
  Backend backend;
  const KernelTable* table;

  Dispatch() : backend(detect_backend()), table(table_for(backend)) {}
};

Dispatch& dispatch() {
  static Dispatch d;
  return d;
}

}  // namespace

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return "scalar";
    case Backend::kAvx2:
      return "avx2";
    case Backend::kNeon:
      return "neon";
  }
  return "unknown";
}

bool backend_supported(Backend b) { return cpu_has(b) && table_for(b) != nullptr; }

Backend detect_backend() {
  if (const char* env = std::getenv("SSSAE_KERNELS")) {
    const std::string want(env);
    for (Backend b : {Backend::kScalar, Backend::kAvx2, Backend::kNeon}) {
      if (want == backend_name(b)) {
        if (!backend_supported(b)) {
          throw ConfigError("SSSAE_KERNELS requests '" + want +
                            "' but this build/CPU does not support it");
        }
        return b;
      }
    }
    throw ConfigError("SSSAE_KERNELS has unknown value '" + want +
                      "' (expected scalar, avx2 or neon)");
  }
  if (backend_supported(Backend::kAvx2)) return Backend::kAvx2;
  if (backend_supported(Backend::kNeon)) return Backend::kNeon;
  return Backend::kScalar;
}

Backend active_backend() { return dispatch().backend; }

void set_backend(Backend b) {
  if (!backend_supported(b)) {
    throw ConfigError(std::string("kernel backend '") + backend_name(b) +
                      "' is not supported on this machine");
  }
  dispatch().backend = b;
  dispatch().table = table_for(b);
}

double dot(const double* a, const double* b, std::size_t n) {
  return dispatch().table->dot(a, b, n);
}

void axpy(double* y, double alpha, const double* x, std::size_t n) {
  dispatch().table->axpy(y, alpha, x, n);
}

void affine(double* out, const double* m, std::size_t rows, std::size_t cols,
            const double* x, const double* bias) {
  dispatch().table->affine(out, m, rows, cols, x, bias);
}

}  // namespace sssae::kernels

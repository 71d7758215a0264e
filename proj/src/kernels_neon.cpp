// NEON kernel variants for aarch64, where 128-bit SIMD is baseline.
#ifdef SSSAE_HAVE_NEON

#include <arm_neon.h>

#include <cstddef>

#include "kernels_internal.hpp"

namespace sssae::kernels::neon {

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  float64x2_t acc2 = vdupq_n_f64(0.0);
  float64x2_t acc3 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    acc2 = vfmaq_f64(acc2, vld1q_f64(a + i + 4), vld1q_f64(b + i + 4));
    acc3 = vfmaq_f64(acc3, vld1q_f64(a + i + 6), vld1q_f64(b + i + 6));
  }
  for (; i + 2 <= n; i += 2) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
  }
  const float64x2_t acc = vaddq_f64(vaddq_f64(acc0, acc1), vaddq_f64(acc2, acc3));
  double total = vaddvq_f64(acc);
  for (; i < n; ++i) total += a[i] * b[i];
  return total;
}

void axpy(double* y, double alpha, const double* x, std::size_t n) {
  const float64x2_t av = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), av, vld1q_f64(x + i)));
    vst1q_f64(y + i + 2, vfmaq_f64(vld1q_f64(y + i + 2), av, vld1q_f64(x + i + 2)));
  }
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), av, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void affine(double* out, const double* m, std::size_t rows, std::size_t cols,
            const double* x, const double* bias) {
  std::size_t r = 0;
  for (; r + 2 <= rows; r += 2) {
    const double* m0 = m + (r + 0) * cols;
    const double* m1 = m + (r + 1) * cols;
    float64x2_t a0 = vdupq_n_f64(0.0);
    float64x2_t a1 = vdupq_n_f64(0.0);
    std::size_t c = 0;
    for (; c + 2 <= cols; c += 2) {
      const float64x2_t xv = vld1q_f64(x + c);
      a0 = vfmaq_f64(a0, vld1q_f64(m0 + c), xv);
      a1 = vfmaq_f64(a1, vld1q_f64(m1 + c), xv);
    }
    double s0 = vaddvq_f64(a0);
    double s1 = vaddvq_f64(a1);
    for (; c < cols; ++c) {
      s0 += m0[c] * x[c];
      s1 += m1[c] * x[c];
    }
    if (bias) {
      s0 += bias[r + 0];
      s1 += bias[r + 1];
    }
    out[r + 0] = s0;
    out[r + 1] = s1;
  }
  for (; r < rows; ++r) {
    out[r] = dot(m + r * cols, x, cols) + (bias ? bias[r] : 0.0);
  }
}

}  // namespace sssae::kernels::neon

#endif  // SSSAE_HAVE_NEON

// Compiled with -mavx2 only (no -mfma): products and sums must stay separate
// roundings to match the scalar kernels bit for bit.
#include <immintrin.h>

#include "kernels_impl.hpp"

namespace hrkg::kernels::detail {

namespace {

inline void row_axpy(std::size_t n, double alpha, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    const __m256d y0 = _mm256_add_pd(_mm256_loadu_pd(y + j), _mm256_mul_pd(va, _mm256_loadu_pd(x + j)));
    const __m256d y1 =
        _mm256_add_pd(_mm256_loadu_pd(y + j + 4), _mm256_mul_pd(va, _mm256_loadu_pd(x + j + 4)));
    _mm256_storeu_pd(y + j, y0);
    _mm256_storeu_pd(y + j + 4, y1);
  }
  for (; j + 4 <= n; j += 4) {
    _mm256_storeu_pd(y + j, _mm256_add_pd(_mm256_loadu_pd(y + j), _mm256_mul_pd(va, _mm256_loadu_pd(x + j))));
  }
  for (; j < n; ++j) y[j] += alpha * x[j];
}

}  // namespace

void gemm_nn_avx2(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
                  double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      if (aip == 0.0) continue;
      row_axpy(n, aip, b + p * n, crow);
    }
  }
}

void gemm_tn_avx2(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
                  double* c) {
  for (std::size_t p = 0; p < k; ++p) {
    const double* arow = a + p * m;
    const double* brow = b + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double api = arow[i];
      if (api == 0.0) continue;
      row_axpy(n, api, brow, c + i * n);
    }
  }
}

void axpy_avx2(std::size_t n, double alpha, const double* x, double* y) { row_axpy(n, alpha, x, y); }

double dot_avx2(std::size_t n, const double* x, const double* y) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4)));
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  const __m256d acc = _mm256_add_pd(acc0, acc1);
  const __m128d lo = _mm256_castpd256_pd128(acc);
  const __m128d hi = _mm256_extractf128_pd(acc, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  double s = _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

}  // namespace hrkg::kernels::detail

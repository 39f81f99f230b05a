#pragma once

#include <cstddef>

namespace hrkg::kernels::detail {

void gemm_nn_scalar(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
                    double* c);
void gemm_tn_scalar(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
                    double* c);
void axpy_scalar(std::size_t n, double alpha, const double* x, double* y);
double dot_scalar(std::size_t n, const double* x, const double* y);

#if defined(HRKG_HAVE_AVX2)
void gemm_nn_avx2(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
                  double* c);
void gemm_tn_avx2(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
                  double* c);
void axpy_avx2(std::size_t n, double alpha, const double* x, double* y);
double dot_avx2(std::size_t n, const double* x, const double* y);
#endif

}  // namespace hrkg::kernels::detail

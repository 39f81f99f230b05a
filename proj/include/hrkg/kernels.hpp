#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace hrkg::kernels {

/// Dense double-precision inner loops behind one dispatch table.
///
/// gemm_nn and gemm_tn accumulate each output element over the shared
/// dimension in ascending order with separate multiply and add, so every
/// variant produces bit-identical results. Zero entries of the left operand
/// are skipped (sparse propagation matrices). dot is a reduction and only
/// agrees across variants to rounding.
struct KernelTable {
  std::string_view name;
  /// c[m x n] += a[m x k] * b[k x n]
  void (*gemm_nn)(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
                  double* c);
  /// c[m x n] += a[k x m]^T * b[k x n]
  void (*gemm_tn)(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
                  double* c);
  /// y += alpha * x
  void (*axpy)(std::size_t n, double alpha, const double* x, double* y);
  double (*dot)(std::size_t n, const double* x, const double* y);
};

const KernelTable& scalar();

/// nullptr when not built for x86-64 or the CPU lacks AVX2.
const KernelTable* avx2();

/// Best supported table; HRKG_KERNELS=scalar|avx2 overrides the choice.
const KernelTable& active();

/// Span-checked entry points over the active table.
void gemm_nn(std::size_t m, std::size_t k, std::size_t n, std::span<const double> a,
             std::span<const double> b, std::span<double> c);
void gemm_tn(std::size_t m, std::size_t k, std::size_t n, std::span<const double> a,
             std::span<const double> b, std::span<double> c);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> x, std::span<const double> y);

}  // namespace hrkg::kernels

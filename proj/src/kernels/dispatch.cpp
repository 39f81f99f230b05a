#include <cstdlib>
#include <stdexcept>
#include <string>

#include "hrkg/kernels.hpp"
#include "kernels_impl.hpp"

namespace hrkg::kernels {

namespace {

const KernelTable kScalar{"scalar", detail::gemm_nn_scalar, detail::gemm_tn_scalar,
                          detail::axpy_scalar, detail::dot_scalar};

#if defined(HRKG_HAVE_AVX2)
const KernelTable kAvx2{"avx2", detail::gemm_nn_avx2, detail::gemm_tn_avx2, detail::axpy_avx2,
                        detail::dot_avx2};
#endif

const KernelTable& select() {
  const char* forced = std::getenv("HRKG_KERNELS");
  if (forced != nullptr && std::string(forced) == "scalar") return kScalar;
  if (const KernelTable* t = avx2()) return *t;
  return kScalar;
}

void check(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("kernel operand size mismatch: ") + what);
}

}  // namespace

const KernelTable& scalar() { return kScalar; }

const KernelTable* avx2() {
#if defined(HRKG_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported ? &kAvx2 : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

void gemm_nn(std::size_t m, std::size_t k, std::size_t n, std::span<const double> a,
             std::span<const double> b, std::span<double> c) {
  check(a.size() == m * k && b.size() == k * n && c.size() == m * n, "gemm_nn");
  active().gemm_nn(m, k, n, a.data(), b.data(), c.data());
}

void gemm_tn(std::size_t m, std::size_t k, std::size_t n, std::span<const double> a,
             std::span<const double> b, std::span<double> c) {
  check(a.size() == k * m && b.size() == k * n && c.size() == m * n, "gemm_tn");
  active().gemm_tn(m, k, n, a.data(), b.data(), c.data());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check(x.size() == y.size(), "axpy");
  active().axpy(x.size(), alpha, x.data(), y.data());
}

double dot(std::span<const double> x, std::span<const double> y) {
  check(x.size() == y.size(), "dot");
  return active().dot(x.size(), x.data(), y.data());
}

}  // namespace hrkg::kernels

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

#include "hrkg/kernels.hpp"
#include "hrkg/rng.hpp"

using namespace hrkg;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double zero_frac = 0.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform01() < zero_frac ? 0.0 : rng.uniform(-3.0, 3.0);
  return v;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

// Textbook triple loop, summation order p = 0..k-1 per output element.
std::vector<double> naive_nn(std::size_t m, std::size_t k, std::size_t n, const std::vector<double>& a,
                             const std::vector<double>& b, std::vector<double> c) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = c[i * n + j];
      for (std::size_t p = 0; p < k; ++p) {
        if (a[i * k + p] != 0.0) acc = acc + a[i * k + p] * b[p * n + j];
      }
      c[i * n + j] = acc;
    }
  }
  return c;
}

}  // namespace

TEST_CASE("scalar gemm matches the textbook loop bit for bit") {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t m = 1 + rng.uniform_index(9);
    const std::size_t k = 1 + rng.uniform_index(9);
    const std::size_t n = 1 + rng.uniform_index(19);
    const auto a = random_vec(rng, m * k, 0.3);
    const auto b = random_vec(rng, k * n);
    const auto c0 = random_vec(rng, m * n);
    auto c = c0;
    kernels::scalar().gemm_nn(m, k, n, a.data(), b.data(), c.data());
    CHECK(bit_equal(c, naive_nn(m, k, n, a, b, c0)));

    // a^T as k x m storage.
    std::vector<double> at(k * m);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t p = 0; p < k; ++p) at[p * m + i] = a[i * k + p];
    }
    auto ct = c0;
    kernels::scalar().gemm_tn(m, k, n, at.data(), b.data(), ct.data());
    CHECK(bit_equal(ct, c));
  }
}

TEST_CASE("avx2 kernels are bit-identical to scalar") {
  const kernels::KernelTable* simd = kernels::avx2();
  if (simd == nullptr) {
    MESSAGE("AVX2 unavailable on this machine; equivalence not exercised");
    return;
  }
  CHECK(simd->name == "avx2");
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 1 + rng.uniform_index(12);
    const std::size_t k = 1 + rng.uniform_index(12);
    const std::size_t n = 1 + rng.uniform_index(37);
    const auto a = random_vec(rng, m * k, 0.25);
    const auto at = random_vec(rng, k * m, 0.25);
    const auto b = random_vec(rng, k * n);
    const auto c0 = random_vec(rng, m * n);
    auto c1 = c0;
    auto c2 = c0;
    kernels::scalar().gemm_nn(m, k, n, a.data(), b.data(), c1.data());
    simd->gemm_nn(m, k, n, a.data(), b.data(), c2.data());
    CHECK(bit_equal(c1, c2));
    c1 = c0;
    c2 = c0;
    kernels::scalar().gemm_tn(m, k, n, at.data(), b.data(), c1.data());
    simd->gemm_tn(m, k, n, at.data(), b.data(), c2.data());
    CHECK(bit_equal(c1, c2));

    const auto x = random_vec(rng, n);
    auto y1 = random_vec(rng, n);
    auto y2 = y1;
    const double alpha = rng.uniform(-2, 2);
    kernels::scalar().axpy(n, alpha, x.data(), y1.data());
    simd->axpy(n, alpha, x.data(), y2.data());
    CHECK(bit_equal(y1, y2));

    const double d1 = kernels::scalar().dot(n, x.data(), y1.data());
    const double d2 = simd->dot(n, x.data(), y1.data());
    CHECK(std::abs(d1 - d2) <= 1e-12 * (1.0 + std::abs(d1)));
  }
}

TEST_CASE("span entry points check sizes") {
  std::vector<double> a(6, 1.0), b(6, 1.0), c(4, 0.0);
  kernels::gemm_nn(2, 3, 2, a, b, c);
  CHECK(c == std::vector<double>{3, 3, 3, 3});
  CHECK_THROWS_AS(kernels::gemm_nn(2, 3, 3, a, b, c), std::invalid_argument);
  CHECK_THROWS_AS(kernels::axpy(1.0, a, c), std::invalid_argument);
  CHECK(kernels::dot(a, b) == 6.0);
  std::vector<double> y = {1, 2};
  kernels::axpy(2.0, std::vector<double>{1, 1}, y);
  CHECK(y == std::vector<double>{3, 4});
}

TEST_CASE("active table honours the override") {
  const std::string name(kernels::active().name);
  CHECK((name == "scalar" || name == "avx2"));
  const char* env = std::getenv("HRKG_KERNELS");
  if (env != nullptr && std::string(env) == "scalar") CHECK(name == "scalar");
}

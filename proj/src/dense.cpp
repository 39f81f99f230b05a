#include "hrkg/dense.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hrkg/error.hpp"
#include "hrkg/kernels.hpp"

namespace hrkg {

namespace {

void require_shape(bool ok, const char* op, const DenseMatrix& a, const DenseMatrix& b) {
  if (!ok) {
    throw ValidationError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                          std::to_string(b.cols()));
  }
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw ValidationError("matrix data has " + std::to_string(data_.size()) + " entries, expected " +
                          std::to_string(rows * cols));
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  }
  return t;
}

bool DenseMatrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  require_shape(a.cols() == b.rows(), "matmul", a, b);
  DenseMatrix c(a.rows(), b.cols());
  kernels::gemm_nn(a.rows(), a.cols(), b.cols(), a.data(), b.data(), c.data());
  return c;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
  require_shape(a.rows() == b.rows(), "matmul_tn", a, b);
  DenseMatrix c(a.cols(), b.cols());
  kernels::gemm_tn(a.cols(), a.rows(), b.cols(), a.data(), b.data(), c.data());
  return c;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
  require_shape(a.cols() == b.cols(), "matmul_nt", a, b);
  return matmul(a, b.transpose());
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  require_shape(a.rows() == b.rows() && a.cols() == b.cols(), "max_abs_diff", a, b);
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace hrkg

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hrkg {

/// Row-major matrix of doubles with shape-checked products.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  /// Throws ValidationError unless data.size() == rows * cols.
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  DenseMatrix transpose() const;
  bool all_finite() const;

  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// a * b
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
/// a^T * b
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);
/// a * b^T
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);

/// Largest absolute elementwise difference; throws on shape mismatch.
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

}  // namespace hrkg

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mbt {

// Dense row-major double matrix. Deliberately small: the heavy loops go
// through the vec kernels, factorizations live in linalg.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols)
      : rows_(rows), cols_(cols),
        d_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0.0) {}

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& operator()(int i, int j) { return d_[idx(i, j)]; }
  double operator()(int i, int j) const { return d_[idx(i, j)]; }

  double* row(int i) { return d_.data() + idx(i, 0); }
  const double* row(int i) const { return d_.data() + idx(i, 0); }
  std::span<const double> row_span(int i) const { return {row(i), static_cast<std::size_t>(cols_)}; }

  double* data() { return d_.data(); }
  const double* data() const { return d_.data(); }
  std::size_t size() const { return d_.size(); }

 private:
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(cols_) +
           static_cast<std::size_t>(j);
  }
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> d_;
};

Matrix transpose(const Matrix& a);
Matrix matmul(const Matrix& a, const Matrix& b);
// y = A x
std::vector<double> matvec(const Matrix& a, std::span<const double> x);
// y = A' x
std::vector<double> matvec_t(const Matrix& a, std::span<const double> x);

bool all_finite(const Matrix& a);
double max_abs(const Matrix& a);

}  // namespace mbt

#include "mbt/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mbt/kernels.hpp"

namespace mbt {

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::runtime_error("matmul: shape mismatch");
  Matrix c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    const double* ar = a.row(i);
    double* cr = c.row(i);
    for (int k = 0; k < a.cols(); ++k)
      vec::active().axpy(ar[k], b.row(k), cr, static_cast<std::size_t>(b.cols()));
  }
  return c;
}

std::vector<double> matvec(const Matrix& a, std::span<const double> x) {
  if (static_cast<int>(x.size()) != a.cols())
    throw std::runtime_error("matvec: shape mismatch");
  std::vector<double> y(a.rows());
  for (int i = 0; i < a.rows(); ++i)
    y[i] = vec::active().dot(a.row(i), x.data(), x.size());
  return y;
}

std::vector<double> matvec_t(const Matrix& a, std::span<const double> x) {
  if (static_cast<int>(x.size()) != a.rows())
    throw std::runtime_error("matvec_t: shape mismatch");
  std::vector<double> y(a.cols(), 0.0);
  for (int i = 0; i < a.rows(); ++i)
    vec::active().axpy(x[i], a.row(i), y.data(), y.size());
  return y;
}

bool all_finite(const Matrix& a) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!std::isfinite(a.data()[i])) return false;
  return true;
}

double max_abs(const Matrix& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::fabs(a.data()[i]));
  return m;
}

}  // namespace mbt

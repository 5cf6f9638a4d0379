#include "mbt/linalg.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <numeric>
#include <stdexcept>

#include "mbt/kernels.hpp"

namespace mbt::linalg {

namespace {

std::atomic<std::uint64_t> g_eigen_count{0};

std::uint64_t fnv1a(const double* d, std::size_t n) {
  std::uint64_t h = 1469598103934665603ull;
  const unsigned char* p = reinterpret_cast<const unsigned char*>(d);
  for (std::size_t i = 0; i < n * sizeof(double); ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

// One Jacobi rotation (c, s) applied to rows/cols p, q of the working
// matrix and to columns p, q of the eigenvector accumulator.
void jacobi_rotate(Matrix& b, Matrix& v, int p, int q, double c, double s) {
  const int k = b.rows();
  for (int i = 0; i < k; ++i) {
    double bip = b(i, p), biq = b(i, q);
    b(i, p) = c * bip - s * biq;
    b(i, q) = s * bip + c * biq;
  }
  for (int j = 0; j < k; ++j) {
    double bpj = b(p, j), bqj = b(q, j);
    b(p, j) = c * bpj - s * bqj;
    b(q, j) = s * bpj + c * bqj;
  }
  for (int i = 0; i < k; ++i) {
    double vip = v(i, p), viq = v(i, q);
    v(i, p) = c * vip - s * viq;
    v(i, q) = s * vip + c * viq;
  }
}

}  // namespace

EigenCache eigen_decompose_symmetric(const Matrix& a) {
  if (a.rows() != a.cols())
    throw std::runtime_error("eigen_decompose_symmetric: matrix not square");
  if (!all_finite(a))
    throw std::runtime_error("eigen_decompose_symmetric: non-finite entries");
  const int k = a.rows();
  const double scale = std::max(1.0, max_abs(a));
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j)
      if (std::fabs(a(i, j) - a(j, i)) > 1e-10 * scale)
        throw std::runtime_error(
            "eigen_decompose_symmetric: matrix not symmetric within 1e-10");

  Matrix b(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) b(i, j) = 0.5 * (a(i, j) + a(j, i));
  Matrix v = Matrix::identity(k);

  const int max_sweeps = 100;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j) off += b(i, j) * b(i, j);
    if (std::sqrt(off) <= 1e-15 * scale * k) break;
    for (int p = 0; p < k - 1; ++p) {
      for (int q = p + 1; q < k; ++q) {
        double apq = b(p, q);
        if (std::fabs(apq) <= 1e-18 * scale) continue;
        double theta = (b(q, q) - b(p, p)) / (2.0 * apq);
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        jacobi_rotate(b, v, p, q, c, s);
      }
    }
  }

  EigenCache cache;
  cache.eigvals.resize(k);
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> diag(k);
  for (int i = 0; i < k; ++i) diag[i] = b(i, i);
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return diag[x] < diag[y]; });
  cache.q = Matrix(k, k);
  for (int j = 0; j < k; ++j) {
    int src = order[j];
    cache.eigvals[j] = diag[src];
    // fix the sign so the dominant component is positive
    int arg = 0;
    for (int i = 1; i < k; ++i)
      if (std::fabs(v(i, src)) > std::fabs(v(arg, src))) arg = i;
    double flip = v(arg, src) < 0.0 ? -1.0 : 1.0;
    for (int i = 0; i < k; ++i) cache.q(i, j) = flip * v(i, src);
  }
  cache.source_hash = fnv1a(a.data(), a.size());
  g_eigen_count.fetch_add(1, std::memory_order_relaxed);
  return cache;
}

std::vector<double> shifted_inverse_apply(const EigenCache& cache, double n,
                                          double m, std::span<const double> v) {
  const int k = cache.dim();
  if (static_cast<int>(v.size()) != k)
    throw std::runtime_error("shifted_inverse_apply: size mismatch");
  double max_lambda = 0.0;
  for (double l : cache.eigvals) max_lambda = std::max(max_lambda, std::fabs(l));
  std::vector<double> u = matvec_t(cache.q, v);  // Q' v
  for (int i = 0; i < k; ++i) {
    double denom = m * cache.eigvals[i] + n;
    if (denom <= 1e-12 * max_lambda || denom <= 0.0)
      throw std::runtime_error("shifted_inverse_apply: singular shift");
    u[i] /= denom;
  }
  return matvec(cache.q, u);
}

Matrix shifted_inverse_apply(const EigenCache& cache, double n, double m,
                             const Matrix& v) {
  const int k = cache.dim();
  if (v.rows() != k)
    throw std::runtime_error("shifted_inverse_apply: size mismatch");
  Matrix out(k, v.cols());
  std::vector<double> col(k);
  for (int j = 0; j < v.cols(); ++j) {
    for (int i = 0; i < k; ++i) col[i] = v(i, j);
    auto r = shifted_inverse_apply(cache, n, m, col);
    for (int i = 0; i < k; ++i) out(i, j) = r[i];
  }
  return out;
}

Matrix pinv(const Matrix& a, double rcond) {
  if (!all_finite(a)) throw std::runtime_error("pinv: non-finite entries");
  const bool flip = a.rows() < a.cols();
  Matrix w0 = flip ? transpose(a) : a;
  const int m = w0.rows(), n = w0.cols();

  // column-major working copy
  std::vector<std::vector<double>> w(n, std::vector<double>(m));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i) w[j][i] = w0(i, j);
  Matrix v = Matrix::identity(n);

  for (int sweep = 0; sweep < 60; ++sweep) {
    bool rotated = false;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double alpha = vec::active().dot(w[p].data(), w[p].data(), m);
        double beta = vec::active().dot(w[q].data(), w[q].data(), m);
        double gamma = vec::active().dot(w[p].data(), w[q].data(), m);
        if (std::fabs(gamma) <= 1e-15 * std::sqrt(alpha * beta) ||
            gamma == 0.0)
          continue;
        rotated = true;
        double zeta = (beta - alpha) / (2.0 * gamma);
        double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                   (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = c * t;
        for (int i = 0; i < m; ++i) {
          double wp = w[p][i], wq = w[q][i];
          w[p][i] = c * wp - s * wq;
          w[q][i] = s * wp + c * wq;
        }
        for (int i = 0; i < n; ++i) {
          double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sigma(n);
  double sigma_max = 0.0;
  for (int j = 0; j < n; ++j) {
    sigma[j] = std::sqrt(vec::active().dot(w[j].data(), w[j].data(), m));
    sigma_max = std::max(sigma_max, sigma[j]);
  }
  const double cut = rcond * sigma_max;

  // pinv(W) = sum_j (1/sigma_j) v_j u_j'
  Matrix p(n, m);
  for (int j = 0; j < n; ++j) {
    if (sigma[j] <= cut || sigma[j] == 0.0) continue;
    double inv_s2 = 1.0 / (sigma[j] * sigma[j]);  // v_j (w_j / sigma^2)'
    for (int r = 0; r < n; ++r)
      vec::active().axpy(v(r, j) * inv_s2, w[j].data(), p.row(r), m);
  }
  return flip ? transpose(p) : p;
}

Matrix solve(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols() || a.rows() != b.rows())
    throw std::runtime_error("solve: shape mismatch");
  const int n = a.rows(), c = b.cols();
  Matrix m = a, x = b;
  const double tol = 1e-13 * std::max(1.0, max_abs(a));
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (std::fabs(m(i, k)) > std::fabs(m(piv, k))) piv = i;
    if (std::fabs(m(piv, k)) <= tol)
      throw std::runtime_error("solve: singular matrix");
    if (piv != k) {
      for (int j = 0; j < n; ++j) std::swap(m(k, j), m(piv, j));
      for (int j = 0; j < c; ++j) std::swap(x(k, j), x(piv, j));
    }
    for (int i = k + 1; i < n; ++i) {
      double f = m(i, k) / m(k, k);
      if (f == 0.0) continue;
      for (int j = k; j < n; ++j) m(i, j) -= f * m(k, j);
      for (int j = 0; j < c; ++j) x(i, j) -= f * x(k, j);
    }
  }
  for (int k = n - 1; k >= 0; --k) {
    for (int j = 0; j < c; ++j) {
      double s = x(k, j);
      for (int i = k + 1; i < n; ++i) s -= m(k, i) * x(i, j);
      x(k, j) = s / m(k, k);
    }
  }
  return x;
}

Matrix solve_spd(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols() || a.rows() != b.rows())
    throw std::runtime_error("solve_spd: shape mismatch");
  const int n = a.rows();
  Matrix l(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      if (i == j) {
        if (s <= 0.0)
          throw std::runtime_error("solve_spd: matrix not positive definite");
        l(i, i) = std::sqrt(s);
      } else {
        l(i, j) = s / l(j, j);
      }
    }
  }
  Matrix x = b;
  for (int j = 0; j < b.cols(); ++j) {
    for (int i = 0; i < n; ++i) {
      double s = x(i, j);
      for (int k = 0; k < i; ++k) s -= l(i, k) * x(k, j);
      x(i, j) = s / l(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
      double s = x(i, j);
      for (int k = i + 1; k < n; ++k) s -= l(k, i) * x(k, j);
      x(i, j) = s / l(i, i);
    }
  }
  return x;
}

std::uint64_t eigen_decomposition_count() {
  return g_eigen_count.load(std::memory_order_relaxed);
}

}  // namespace mbt::linalg

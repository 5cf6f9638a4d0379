#include "mbt/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mbt/kernels.hpp"
#include "mbt/parallel.hpp"

namespace mbt::loss {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double logit(double tau) { return std::log(tau / (1.0 - tau)); }

}  // namespace

ResponseModel ResponseModel::prepare(const LossResponseSpec& spec, int n_t,
                                     int n_p) {
  spec.validate(n_t, n_p);
  ResponseModel m;
  m.spec_ = spec;
  m.n_t_ = n_t;
  m.n_p_ = n_p;

  switch (spec.kind) {
    case Kind::L2Constant: {
      m.cache_ = linalg::eigen_decompose_symmetric(Matrix::identity(n_t));
      m.scan_rot_ = Matrix(n_t, n_t);
      for (int i = 0; i < n_t; ++i) m.scan_rot_(i, i) = -1.0;
      m.scan_a_.assign(n_t, 1.0);
      m.scan_b_.assign(n_t, spec.lambda);
      break;
    }
    case Kind::L2Smooth: {
      Matrix d = second_difference_matrix(n_t);
      Matrix a = matmul(transpose(d), d);
      for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] *= spec.lambda;
      m.cache_ = linalg::eigen_decompose_symmetric(a);
      m.scan_rot_ = transpose(m.cache_.q);  // u = Q' g~, g~ = -eps
      for (std::size_t i = 0; i < m.scan_rot_.size(); ++i)
        m.scan_rot_.data()[i] = -m.scan_rot_.data()[i];
      m.scan_a_.assign(n_t, 1.0);
      m.scan_b_ = m.cache_.eigvals;
      break;
    }
    case Kind::L2Fourier: {
      m.basis_ = fourier_basis(n_t, spec.wavenumbers);
      const int n_r = m.basis_.cols();
      m.cache_ = linalg::eigen_decompose_symmetric(Matrix::identity(n_r));
      m.scan_rot_ = transpose(m.basis_);
      for (std::size_t i = 0; i < m.scan_rot_.size(); ++i)
        m.scan_rot_.data()[i] = -m.scan_rot_.data()[i];
      m.scan_a_.assign(n_r, 1.0);
      m.scan_b_.assign(n_r, spec.lambda);
      break;
    }
    case Kind::L2Hierarchical: {
      m.basis_ = spec.summation;
      Matrix a = matmul(transpose(m.basis_), m.basis_);
      m.cache_ = linalg::eigen_decompose_symmetric(a);
      // u = Q' S' g = (S Q)' (-eps)
      Matrix sq = matmul(m.basis_, m.cache_.q);
      m.scan_rot_ = transpose(sq);
      for (std::size_t i = 0; i < m.scan_rot_.size(); ++i)
        m.scan_rot_.data()[i] = -m.scan_rot_.data()[i];
      m.scan_a_ = m.cache_.eigvals;
      m.scan_b_.assign(m.basis_.cols(), spec.lambda);
      break;
    }
    case Kind::L2Linear:
      break;
    case Kind::QuantileSmoothed:
    case Kind::QuantileLinQuad: {
      const int n_q = spec.n_q();
      m.tau_per_coord_.resize(static_cast<std::size_t>(n_t) * n_q);
      m.shift_per_coord_.resize(m.tau_per_coord_.size());
      for (int t = 0; t < n_t; ++t)
        for (int qi = 0; qi < n_q; ++qi) {
          m.tau_per_coord_[static_cast<std::size_t>(t) * n_q + qi] = spec.taus[qi];
          m.shift_per_coord_[static_cast<std::size_t>(t) * n_q + qi] =
              logit(spec.taus[qi]);
        }
      break;
    }
  }
  return m;
}

int ResponseModel::out_dim() const {
  return is_quantile(spec_.kind) ? n_t_ * spec_.n_q() : n_t_;
}

int ResponseModel::param_dim() const {
  switch (spec_.kind) {
    case Kind::L2Constant:
    case Kind::L2Smooth: return n_t_;
    case Kind::L2Fourier:
    case Kind::L2Hierarchical: return basis_.cols();
    case Kind::L2Linear: return n_p_ * n_t_;
    case Kind::QuantileSmoothed:
    case Kind::QuantileLinQuad: return n_t_ * spec_.n_q();
  }
  return 0;
}

int ResponseModel::stat_dim() const {
  switch (spec_.kind) {
    case Kind::L2Constant:
    case Kind::L2Smooth: return n_t_;
    case Kind::L2Fourier:
    case Kind::L2Hierarchical: return basis_.cols();
    case Kind::L2Linear: return n_p_ * n_p_ + n_p_ * n_t_;
    case Kind::QuantileSmoothed: return 2 * param_dim();
    case Kind::QuantileLinQuad: return 5 * param_dim();
  }
  return 0;
}

Matrix ResponseModel::residuals(const Matrix& y, const Matrix& f) const {
  if (y.rows() != f.rows() || y.cols() != n_t_ || f.cols() != out_dim())
    throw std::runtime_error("residuals: shape mismatch");
  Matrix r(y.rows(), out_dim());
  if (!is_quantile(spec_.kind)) {
    vec::active().sub(y.data(), f.data(), r.data(), r.size());
    return r;
  }
  const int n_q = spec_.n_q();
  for (int i = 0; i < y.rows(); ++i) {
    const double* yr = y.row(i);
    const double* fr = f.row(i);
    double* rr = r.row(i);
    for (int t = 0; t < n_t_; ++t)
      for (int qi = 0; qi < n_q; ++qi)
        rr[t * n_q + qi] = yr[t] - fr[t * n_q + qi];
  }
  return r;
}

Matrix ResponseModel::compute_row_stats(const Matrix& residual,
                                        const Matrix* x_lr) const {
  const int n = residual.rows();
  if (residual.cols() != out_dim())
    throw std::runtime_error("compute_row_stats: residual width mismatch");
  Matrix stats(n, stat_dim());
  const int n_r = param_dim();

  switch (spec_.kind) {
    case Kind::L2Constant:
    case Kind::L2Smooth:
    case Kind::L2Fourier:
    case Kind::L2Hierarchical: {
      parallel_for(n, [&](int i) {
        auto u = matvec(scan_rot_, residual.row_span(i));
        std::copy(u.begin(), u.end(), stats.row(i));
      });
      break;
    }
    case Kind::QuantileSmoothed: {
      parallel_for(n, [&](int i) {
        vec::active().logistic_grad_hess(
            residual.row(i), shift_per_coord_.data(), tau_per_coord_.data(),
            stats.row(i), stats.row(i) + n_r, static_cast<std::size_t>(n_r));
      });
      break;
    }
    case Kind::QuantileLinQuad: {
      parallel_for(n, [&](int i) {
        const double* e = residual.row(i);
        double* s = stats.row(i);
        for (int j = 0; j < n_r; ++j) {
          const bool neg = e[j] < 0.0;
          s[j] = neg ? 1.0 : 0.0;                 // neg_count
          s[n_r + j] = neg ? e[j] : 0.0;          // neg_sum
          s[2 * n_r + j] = neg ? 0.0 : e[j];      // pos_sum
        }
        vec::active().logistic_grad_hess(
            e, shift_per_coord_.data(), tau_per_coord_.data(), s + 3 * n_r,
            s + 4 * n_r, static_cast<std::size_t>(n_r));
      });
      break;
    }
    case Kind::L2Linear: {
      if (!x_lr || x_lr->rows() != n)
        throw std::runtime_error("compute_row_stats: linear kind needs x_lr");
      parallel_for(n, [&](int i) {
        const double* xr = x_lr->row(i);
        const double* e = residual.row(i);
        double* s = stats.row(i);
        for (int p = 0; p < n_p_; ++p)
          for (int q = 0; q < n_p_; ++q) s[p * n_p_ + q] = xr[p] * xr[q];
        double* c = s + n_p_ * n_p_;
        for (int p = 0; p < n_p_; ++p)
          for (int t = 0; t < n_t_; ++t) c[p * n_t_ + t] = xr[p] * (-e[t]);
      });
      break;
    }
  }
  return stats;
}

namespace {

// shared diagonal evaluation: loss and optional weights from per-
// coordinate (g, denom) pairs; denom <= 0 with g != 0 is singular
bool diag_eval(std::span<const double> g, std::span<const double> denom,
               double* loss, std::vector<double>* w) {
  double acc = 0.0;
  if (w) w->assign(g.size(), 0.0);
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (denom[j] <= 0.0) {
      if (g[j] != 0.0) return false;
      continue;
    }
    acc -= 0.5 * g[j] * g[j] / denom[j];
    if (w) (*w)[j] = -g[j] / denom[j];
  }
  if (loss) *loss = acc;
  return true;
}

}  // namespace

// Builds per-coordinate (G, H) for the linquad kind from its scan
// blocks; falls back to the smoothed stats for one-sided coordinates.
static void linquad_gh(const LossResponseSpec& spec,
                       std::span<const double> s, double count, int n_r,
                       std::vector<double>& g, std::vector<double>& h,
                       long long* fallbacks) {
  g.resize(n_r);
  h.resize(n_r);
  const int n_q = spec.n_q();
  for (int j = 0; j < n_r; ++j) {
    const double n_neg = s[j];
    const double neg_sum = s[n_r + j];
    const double pos_sum = s[2 * n_r + j];
    const double n_pos = count - n_neg;
    if (n_neg > 0.0 && n_pos > 0.0 && neg_sum < 0.0 && pos_sum > 0.0) {
      const double tj = spec.taus[j % n_q];
      g[j] = n_neg * (1.0 - tj) - n_pos * tj;
      h[j] = spec.k_coef * (n_neg / (-neg_sum) + n_pos / pos_sum);
    } else {
      g[j] = s[3 * n_r + j];
      h[j] = s[4 * n_r + j];
      if (fallbacks) ++(*fallbacks);
    }
  }
}

double ResponseModel::scan_loss(std::span<const double> s, double count) const {
  const int n_r = param_dim();
  double loss = 0.0;
  switch (spec_.kind) {
    case Kind::L2Constant:
    case Kind::L2Smooth:
    case Kind::L2Fourier:
    case Kind::L2Hierarchical: {
      std::vector<double> denom(n_r);
      for (int j = 0; j < n_r; ++j) denom[j] = scan_a_[j] * count + scan_b_[j];
      if (!diag_eval(s.subspan(0, n_r), denom, &loss, nullptr)) return kInf;
      return loss;
    }
    case Kind::QuantileSmoothed: {
      std::vector<double> denom(n_r);
      for (int j = 0; j < n_r; ++j) denom[j] = spec_.lambda + s[n_r + j];
      if (!diag_eval(s.subspan(0, n_r), denom, &loss, nullptr)) return kInf;
      return loss;
    }
    case Kind::QuantileLinQuad: {
      std::vector<double> g, h;
      linquad_gh(spec_, s, count, n_r, g, h, nullptr);
      for (auto& v : h) v += spec_.lambda;
      if (!diag_eval(g, h, &loss, nullptr)) return kInf;
      return loss;
    }
    case Kind::L2Linear: {
      Matrix m(n_p_, n_p_);
      for (int p = 0; p < n_p_; ++p)
        for (int q = 0; q < n_p_; ++q) m(p, q) = s[p * n_p_ + q];
      for (int p = 0; p < n_p_; ++p) m(p, p) += spec_.lambda;
      Matrix c(n_p_, n_t_);
      for (int p = 0; p < n_p_; ++p)
        for (int t = 0; t < n_t_; ++t) c(p, t) = s[n_p_ * n_p_ + p * n_t_ + t];
      try {
        Matrix x = linalg::solve_spd(m, c);
        double acc = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
          acc -= 0.5 * c.data()[i] * x.data()[i];
        return acc;
      } catch (const std::exception&) {
        return kInf;
      }
    }
  }
  return kInf;
}

LeafStats ResponseModel::stats_from_scan(std::span<const double> s,
                                         double count) const {
  LeafStats st;
  st.count = count;
  const int n_r = param_dim();
  switch (spec_.kind) {
    case Kind::L2Constant:
    case Kind::L2Smooth:
    case Kind::L2Fourier:
    case Kind::L2Hierarchical:
      // back to parameter space: g~ = Q u
      st.g = matvec(cache_.q, s.subspan(0, n_r));
      break;
    case Kind::QuantileSmoothed:
      st.g.assign(s.begin(), s.begin() + n_r);
      st.h_diag.assign(s.begin() + n_r, s.begin() + 2 * n_r);
      break;
    case Kind::QuantileLinQuad:
      st.neg_count.assign(s.begin(), s.begin() + n_r);
      st.neg_sum.assign(s.begin() + n_r, s.begin() + 2 * n_r);
      st.pos_sum.assign(s.begin() + 2 * n_r, s.begin() + 3 * n_r);
      st.g.assign(s.begin() + 3 * n_r, s.begin() + 4 * n_r);
      st.h_diag.assign(s.begin() + 4 * n_r, s.begin() + 5 * n_r);
      break;
    case Kind::L2Linear:
      st.gram.assign(s.begin(), s.begin() + n_p_ * n_p_);
      st.g.assign(s.begin() + n_p_ * n_p_, s.begin() + n_p_ * n_p_ + n_p_ * n_t_);
      break;
  }
  return st;
}

std::vector<double> ResponseModel::optimal_leaf_response(
    const LeafStats& stats) const {
  const int n_r = param_dim();
  switch (spec_.kind) {
    case Kind::L2Constant:
    case Kind::L2Fourier: {
      auto w = linalg::shifted_inverse_apply(cache_, spec_.lambda, stats.count,
                                             stats.g);
      for (auto& v : w) v = -v;
      return w;
    }
    case Kind::L2Smooth: {
      auto w = linalg::shifted_inverse_apply(cache_, stats.count, 1.0, stats.g);
      for (auto& v : w) v = -v;
      return w;
    }
    case Kind::L2Hierarchical: {
      auto w = linalg::shifted_inverse_apply(cache_, spec_.lambda, stats.count,
                                             stats.g);
      for (auto& v : w) v = -v;
      return w;
    }
    case Kind::QuantileSmoothed: {
      std::vector<double> denom(n_r), w;
      for (int j = 0; j < n_r; ++j) denom[j] = spec_.lambda + stats.h_diag[j];
      double loss;
      if (!diag_eval(stats.g, denom, &loss, &w))
        throw std::runtime_error("optimal_leaf_response: singular leaf system");
      return w;
    }
    case Kind::QuantileLinQuad: {
      std::vector<double> g, h, w;
      std::vector<double> s = linquad_scan(stats);
      linquad_gh(spec_, s, stats.count, n_r, g, h, &linquad_fallbacks);
      for (auto& v : h) v += spec_.lambda;
      double loss;
      if (!diag_eval(g, h, &loss, &w))
        throw std::runtime_error("optimal_leaf_response: singular leaf system");
      return w;
    }
    case Kind::L2Linear: {
      Matrix m(n_p_, n_p_);
      for (int p = 0; p < n_p_; ++p)
        for (int q = 0; q < n_p_; ++q) m(p, q) = stats.gram[p * n_p_ + q];
      for (int p = 0; p < n_p_; ++p) m(p, p) += spec_.lambda;
      Matrix c(n_p_, n_t_);
      for (int p = 0; p < n_p_; ++p)
        for (int t = 0; t < n_t_; ++t) c(p, t) = stats.g[p * n_t_ + t];
      Matrix x;
      try {
        x = linalg::solve_spd(m, c);
      } catch (const std::exception&) {
        throw std::runtime_error("optimal_leaf_response: singular leaf system");
      }
      std::vector<double> w(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) w[i] = -x.data()[i];
      return w;
    }
  }
  throw std::runtime_error("optimal_leaf_response: unknown kind");
}

// reassembles the scan-block layout from LeafStats for the linquad path
std::vector<double> ResponseModel::linquad_scan(const LeafStats& st) const {
  const int n_r = param_dim();
  std::vector<double> s(5 * static_cast<std::size_t>(n_r));
  std::copy(st.neg_count.begin(), st.neg_count.end(), s.begin());
  std::copy(st.neg_sum.begin(), st.neg_sum.end(), s.begin() + n_r);
  std::copy(st.pos_sum.begin(), st.pos_sum.end(), s.begin() + 2 * n_r);
  std::copy(st.g.begin(), st.g.end(), s.begin() + 3 * n_r);
  std::copy(st.h_diag.begin(), st.h_diag.end(), s.begin() + 4 * n_r);
  return s;
}

double ResponseModel::optimal_leaf_loss(const LeafStats& stats) const {
  switch (spec_.kind) {
    case Kind::L2Constant:
    case Kind::L2Smooth:
    case Kind::L2Fourier:
    case Kind::L2Hierarchical: {
      auto w = optimal_leaf_response(stats);
      return 0.5 * vec::active().dot(stats.g.data(), w.data(), w.size());
    }
    case Kind::QuantileSmoothed: {
      const int n_r = param_dim();
      std::vector<double> denom(n_r);
      for (int j = 0; j < n_r; ++j) denom[j] = spec_.lambda + stats.h_diag[j];
      double loss;
      if (!diag_eval(stats.g, denom, &loss, nullptr))
        throw std::runtime_error("optimal_leaf_loss: singular leaf system");
      return loss;
    }
    case Kind::QuantileLinQuad: {
      auto s = linquad_scan(stats);
      double l = scan_loss(s, stats.count);
      if (l == kInf)
        throw std::runtime_error("optimal_leaf_loss: singular leaf system");
      return l;
    }
    case Kind::L2Linear: {
      auto s = std::vector<double>();
      s.reserve(stats.gram.size() + stats.g.size());
      s.insert(s.end(), stats.gram.begin(), stats.gram.end());
      s.insert(s.end(), stats.g.begin(), stats.g.end());
      double l = scan_loss(s, stats.count);
      if (l == kInf)
        throw std::runtime_error("optimal_leaf_loss: singular leaf system");
      return l;
    }
  }
  throw std::runtime_error("optimal_leaf_loss: unknown kind");
}

std::vector<double> ResponseModel::leaf_output(std::span<const double> w) const {
  switch (spec_.kind) {
    case Kind::L2Constant:
    case Kind::L2Smooth:
    case Kind::QuantileSmoothed:
    case Kind::QuantileLinQuad:
      return {w.begin(), w.end()};
    case Kind::L2Fourier:
    case Kind::L2Hierarchical:
      return matvec(basis_, w);
    case Kind::L2Linear:
      throw std::runtime_error("leaf_output: linear kind needs x_lr");
  }
  throw std::runtime_error("leaf_output: unknown kind");
}

std::vector<double> ResponseModel::leaf_output_linear(
    std::span<const double> w, std::span<const double> x_lr_row) const {
  if (static_cast<int>(x_lr_row.size()) != n_p_)
    throw std::runtime_error("leaf_output_linear: x_lr width mismatch");
  std::vector<double> out(n_t_, 0.0);
  for (int p = 0; p < n_p_; ++p)
    vec::active().axpy(x_lr_row[p], w.data() + p * n_t_, out.data(), n_t_);
  return out;
}

// ---------------------------------------------------------------------

Matrix grad_hess_l2(const Matrix& residual, const Matrix& b) {
  if (b.empty()) {
    Matrix g(residual.rows(), residual.cols());
    for (std::size_t i = 0; i < g.size(); ++i) g.data()[i] = -residual.data()[i];
    return g;
  }
  if (b.rows() != residual.cols())
    throw std::runtime_error("grad_hess_l2: basis rows do not match residual width");
  Matrix g = matmul(residual, b);  // row i: eps_i' B = (B' eps_i)'
  for (std::size_t i = 0; i < g.size(); ++i) g.data()[i] = -g.data()[i];
  return g;
}

std::pair<double, double> smoothed_quantile_grad_hess(double residual,
                                                      double tau) {
  if (!(tau > 0.0 && tau < 1.0))
    throw std::runtime_error("smoothed_quantile_grad_hess: tau outside (0,1)");
  const double s = logit(tau);
  double g, h;
  vec::active().logistic_grad_hess(&residual, &s, &tau, &g, &h, 1);
  return {g, h};
}

std::vector<LinQuadRow> linquad_quantile_grad_hess(
    std::span<const double> leaf_residuals, double tau, double k_coef,
    bool* fell_back) {
  if (leaf_residuals.size() < 2)
    throw std::runtime_error("linquad_quantile_grad_hess: leaf needs >= 2 rows");
  if (!(k_coef > 0.0))
    throw std::runtime_error("linquad_quantile_grad_hess: k_coef must be > 0");
  double neg_sum = 0.0, pos_sum = 0.0;
  long long n_neg = 0;
  for (double e : leaf_residuals) {
    if (e < 0.0) {
      neg_sum += e;
      ++n_neg;
    } else {
      pos_sum += e;
    }
  }
  const long long n_pos = static_cast<long long>(leaf_residuals.size()) - n_neg;
  std::vector<LinQuadRow> out(leaf_residuals.size());
  if (n_neg == 0 || n_pos == 0 || !(neg_sum < 0.0) || !(pos_sum > 0.0)) {
    if (fell_back) *fell_back = true;
    for (std::size_t i = 0; i < leaf_residuals.size(); ++i) {
      auto [g, h] = smoothed_quantile_grad_hess(leaf_residuals[i], tau);
      out[i] = {g, h};
    }
    return out;
  }
  if (fell_back) *fell_back = false;
  const double hl = k_coef / (-neg_sum);
  const double hr = k_coef / pos_sum;
  for (std::size_t i = 0; i < leaf_residuals.size(); ++i) {
    const double e = leaf_residuals[i];
    if (e < 0.0)
      out[i] = {(1.0 - tau) - hl * e, hl};
    else
      out[i] = {-tau - hr * e, hr};
  }
  return out;
}

double exact_loss(const Matrix& y, const Matrix& yhat,
                  const LossResponseSpec& spec, long long n_leaves_total,
                  double gamma) {
  const double penalty = gamma * static_cast<double>(n_leaves_total);
  if (!is_quantile(spec.kind)) {
    if (y.rows() != yhat.rows() || y.cols() != yhat.cols())
      throw std::runtime_error("exact_loss: shape mismatch");
    if (y.rows() == 0) return penalty;
    double ss = vec::active().sumsq_diff(y.data(), yhat.data(), y.size());
    return 0.5 * ss / y.rows() + penalty;
  }
  const int n_q = spec.n_q();
  const int n_t = y.cols();
  if (yhat.cols() != n_t * n_q || y.rows() != yhat.rows())
    throw std::runtime_error("exact_loss: shape mismatch");
  if (y.rows() == 0) return penalty;
  std::vector<double> taus(static_cast<std::size_t>(n_t) * n_q);
  for (int t = 0; t < n_t; ++t)
    for (int qi = 0; qi < n_q; ++qi)
      taus[static_cast<std::size_t>(t) * n_q + qi] = spec.taus[qi];
  std::vector<double> eps(taus.size());
  double acc = 0.0;
  for (int i = 0; i < y.rows(); ++i) {
    const double* yr = y.row(i);
    const double* fr = yhat.row(i);
    for (int t = 0; t < n_t; ++t)
      for (int qi = 0; qi < n_q; ++qi)
        eps[static_cast<std::size_t>(t) * n_q + qi] = yr[t] - fr[t * n_q + qi];
    acc += vec::active().pinball_sum(eps.data(), taus.data(), eps.size());
  }
  return acc / (static_cast<double>(y.rows()) * n_t * n_q) + penalty;
}

double empirical_quantile(std::vector<double> values, double tau) {
  if (values.empty())
    throw std::runtime_error("empirical_quantile: empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n == 1) return values[0];
  double pos = tau * static_cast<double>(n - 1);
  auto lo = static_cast<std::size_t>(pos);
  if (lo >= n - 1) return values[n - 1];
  double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

std::vector<double> refit_quantile_leaf(const Matrix& leaf_residuals,
                                        std::span<const double> taus,
                                        int n_t) {
  const int n_q = static_cast<int>(taus.size());
  if (leaf_residuals.rows() < 1)
    throw std::runtime_error("refit_quantile_leaf: empty leaf");
  if (leaf_residuals.cols() != n_t * n_q)
    throw std::runtime_error("refit_quantile_leaf: width mismatch");
  std::vector<double> w(static_cast<std::size_t>(n_t) * n_q);
  std::vector<double> col(leaf_residuals.rows());
  for (int t = 0; t < n_t; ++t) {
    for (int qi = 0; qi < n_q; ++qi) {
      const int j = t * n_q + qi;
      for (int i = 0; i < leaf_residuals.rows(); ++i) col[i] = leaf_residuals(i, j);
      w[j] = empirical_quantile(col, taus[qi]);
    }
    // a tree never emits crossing quantiles
    std::sort(w.begin() + static_cast<std::size_t>(t) * n_q,
              w.begin() + static_cast<std::size_t>(t + 1) * n_q);
  }
  return w;
}

}  // namespace mbt::loss

#include "mbt/loss_spec.hpp"

#include <cmath>
#include <stdexcept>

#include "mbt/kernels.hpp"

namespace mbt::loss {

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::L2Constant: return "l2_constant";
    case Kind::L2Smooth: return "l2_smooth";
    case Kind::L2Fourier: return "l2_fourier";
    case Kind::L2Hierarchical: return "l2_hierarchical";
    case Kind::L2Linear: return "l2_linear";
    case Kind::QuantileSmoothed: return "quantile_smoothed";
    case Kind::QuantileLinQuad: return "quantile_linquad";
  }
  return "?";
}

Kind kind_from_name(const std::string& name) {
  for (Kind k : {Kind::L2Constant, Kind::L2Smooth, Kind::L2Fourier,
                 Kind::L2Hierarchical, Kind::L2Linear, Kind::QuantileSmoothed,
                 Kind::QuantileLinQuad})
    if (name == kind_name(k)) return k;
  throw std::runtime_error("unknown loss/response kind '" + name + "'");
}

bool is_quantile(Kind k) {
  return k == Kind::QuantileSmoothed || k == Kind::QuantileLinQuad;
}

void LossResponseSpec::validate(int n_t, int n_p) const {
  if (lambda < 0.0) throw std::runtime_error("spec: lambda must be >= 0");
  if (kind == Kind::L2Smooth && n_t < 3)
    throw std::runtime_error("spec: l2_smooth needs n_t >= 3");
  if (kind == Kind::L2Fourier && wavenumbers.empty())
    throw std::runtime_error("spec: l2_fourier needs wavenumbers");
  if (kind != Kind::L2Fourier && !wavenumbers.empty())
    throw std::runtime_error("spec: wavenumbers only valid for l2_fourier");
  if (kind == Kind::L2Hierarchical) {
    if (summation.empty())
      throw std::runtime_error("spec: l2_hierarchical needs a summation matrix");
    if (summation.rows() != n_t)
      throw std::runtime_error(
          "spec: summation matrix rows do not match target dimension");
  } else if (!summation.empty()) {
    throw std::runtime_error("spec: summation matrix only valid for l2_hierarchical");
  }
  if (kind == Kind::L2Linear && n_p < 1)
    throw std::runtime_error("spec: l2_linear needs linear-response features (x_lr)");
  if (is_quantile(kind)) {
    if (taus.empty()) throw std::runtime_error("spec: quantile kinds need taus");
    for (std::size_t i = 0; i < taus.size(); ++i) {
      if (!(taus[i] > 0.0 && taus[i] < 1.0))
        throw std::runtime_error("spec: taus must lie in (0,1)");
      if (i > 0 && !(taus[i] > taus[i - 1]))
        throw std::runtime_error("spec: taus must be strictly increasing");
    }
  } else if (!taus.empty()) {
    throw std::runtime_error("spec: taus only valid for quantile kinds");
  }
  if (kind == Kind::QuantileLinQuad && !(k_coef > 0.0))
    throw std::runtime_error("spec: k_coef must be > 0");
  if (refit && !is_quantile(kind))
    throw std::runtime_error("spec: refit only valid for quantile kinds");
}

Matrix second_difference_matrix(int n_t) {
  if (n_t < 3)
    throw std::runtime_error("second_difference_matrix: n_t must be >= 3");
  Matrix d(n_t - 2, n_t);
  for (int i = 0; i < n_t - 2; ++i) {
    d(i, i) = 1.0;
    d(i, i + 1) = -2.0;
    d(i, i + 2) = 1.0;
  }
  return d;
}

Matrix fourier_basis(int n_t, const std::vector<int>& wavenumbers) {
  if (wavenumbers.empty())
    throw std::runtime_error("fourier_basis: empty wavenumber set");
  const int k_max = n_t / 2 - 1;
  for (int k : wavenumbers)
    if (k < 1 || k > k_max)
      throw std::runtime_error("fourier_basis: wavenumber " +
                               std::to_string(k) + " outside [1," +
                               std::to_string(k_max) + "] (aliased)");
  Matrix p(n_t, 2 * static_cast<int>(wavenumbers.size()));
  const double norm = std::sqrt(2.0 / n_t);  // raw columns have norm sqrt(n_t/2)
  for (std::size_t c = 0; c < wavenumbers.size(); ++c) {
    const double w = 2.0 * M_PI * wavenumbers[c] / n_t;
    for (int t = 0; t < n_t; ++t) {
      p(t, 2 * static_cast<int>(c)) = norm * std::cos(w * (t + 1));
      p(t, 2 * static_cast<int>(c) + 1) = norm * std::sin(w * (t + 1));
    }
  }
  return p;
}

}  // namespace mbt::loss

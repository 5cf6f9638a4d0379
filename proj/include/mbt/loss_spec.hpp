#pragma once

#include <string>
#include <vector>

#include "mbt/matrix.hpp"

namespace mbt::loss {

enum class Kind {
  L2Constant,
  L2Smooth,
  L2Fourier,
  L2Hierarchical,
  L2Linear,
  QuantileSmoothed,
  QuantileLinQuad,
};

const char* kind_name(Kind k);
Kind kind_from_name(const std::string& name);
bool is_quantile(Kind k);

// One loss/response pairing with its parameters. Exactly the members
// required by `kind` may be set; validate() enforces that against the
// dataset dimensions.
struct LossResponseSpec {
  Kind kind = Kind::L2Constant;
  double lambda = 0.0;            // quadratic punishment weight
  std::vector<int> wavenumbers;   // L2Fourier
  Matrix summation;               // L2Hierarchical: n_t x n_b, 0/1
  std::vector<double> taus;       // quantile kinds, strictly increasing
  double k_coef = 1.0;            // QuantileLinQuad curvature constant
  bool refit = false;             // quantile kinds: exact leaf refitting

  int n_q() const { return static_cast<int>(taus.size()); }
  void validate(int n_t, int n_p) const;
};

// Rows (1,-2,1): the discrete second-derivative operator used by the
// smoothness penalty Lambda = lambda * D'D.
Matrix second_difference_matrix(int n_t);

// Unit-normalized cos/sin pairs at the given wavenumbers, columns
// ordered cos(k),sin(k) per k; P'P = I.
Matrix fourier_basis(int n_t, const std::vector<int>& wavenumbers);

}  // namespace mbt::loss

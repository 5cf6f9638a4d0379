#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mbt/matrix.hpp"

namespace mbt::linalg {

// Eigendecomposition of a symmetric matrix, cached so that the shifted
// solves (m*A + n*I)^-1 v reuse one factorization for any (m, n).
struct EigenCache {
  Matrix q;                     // eigenvectors as columns, k x k
  std::vector<double> eigvals;  // ascending
  std::uint64_t source_hash = 0;
  int dim() const { return q.rows(); }
};

// Cyclic Jacobi on (A + A')/2. Throws on non-finite entries or when the
// asymmetry of A exceeds 1e-10 relative.
EigenCache eigen_decompose_symmetric(const Matrix& a);

// Applies (m*A + n*I)^-1 using the cached eigenpairs. Throws when any
// m*lambda_i + n falls at or below 1e-12 * max|lambda|.
std::vector<double> shifted_inverse_apply(const EigenCache& cache, double n,
                                          double m, std::span<const double> v);
Matrix shifted_inverse_apply(const EigenCache& cache, double n, double m,
                             const Matrix& v);

// Moore-Penrose pseudo-inverse via one-sided Jacobi SVD; singular values
// below rcond * sigma_max are treated as zero.
Matrix pinv(const Matrix& a, double rcond = 1e-10);

// Gaussian elimination with partial pivoting, A X = B.
Matrix solve(const Matrix& a, const Matrix& b);
// Cholesky solve for symmetric positive definite A; throws otherwise.
Matrix solve_spd(const Matrix& a, const Matrix& b);

// Number of eigendecompositions performed by this process; lets tests
// assert that cached paths do not refactorize.
std::uint64_t eigen_decomposition_count();

}  // namespace mbt::linalg

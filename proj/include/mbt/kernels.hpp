#pragma once

#include <cstddef>
#include <string>

namespace mbt::vec {

// Double-precision array kernels behind the training inner loops
// (residual refresh, gradient/Hessian evaluation, leaf-statistic
// accumulation, loss reductions).
//
// Scalar reference implementations always exist. On x86-64 an AVX2
// variant is selected at runtime when the CPU supports it. Elementwise
// kernels must match the scalar reference bitwise; reductions and the
// logistic kernels are equivalence-tested to 1e-12 relative (summation
// order and the vector exp differ).
struct Kernels {
  const char* name;

  double (*sum)(const double* x, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  // sum of squared differences, sum((a-b)^2)
  double (*sumsq_diff)(const double* a, const double* b, std::size_t n);

  // acc += x
  void (*add)(double* acc, const double* x, std::size_t n);
  // out = a - b
  void (*sub)(const double* a, const double* b, double* out, std::size_t n);
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);

  // Smoothed pinball gradient/Hessian. With z = eps[i] - shift[i] and
  // F = e^z / (1 + e^z) evaluated overflow-safe:
  //   g[i] = 1 - tau[i] - F,   h[i] = F * (1 - F)
  void (*logistic_grad_hess)(const double* eps, const double* shift,
                             const double* tau, double* g, double* h,
                             std::size_t n);

  // sum over i of (1[eps>0] - tau[i]) * eps[i]
  double (*pinball_sum)(const double* eps, const double* tau, std::size_t n);
};

const Kernels& scalar();

#if defined(__x86_64__) || defined(_M_X64)
bool cpu_has_avx2();
const Kernels& avx2();  // valid only when cpu_has_avx2()
#endif

// Active kernel set: best available unless overridden. The MBT_KERNELS
// environment variable ("scalar" or "avx2") or force_kernels() pins a
// specific variant; force_kernels("") restores auto selection.
const Kernels& active();
void force_kernels(const std::string& name);

}  // namespace mbt::vec

#include "mbt/kernels.hpp"

#include <cmath>

#if defined(__x86_64__) && defined(MBT_BUILD_AVX2)

#include <immintrin.h>

namespace mbt::vec {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(lo) + _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo));
}

// exp for nonpositive arguments, Cephes rational approximation.
// Inputs below -708 flush to 0 through the clamp (2^-1021 scale).
inline __m256d exp_nonpos(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
  const __m256d c1 = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d c2 = _mm256_set1_pd(1.42860682030941723212e-6);
  x = _mm256_max_pd(x, _mm256_set1_pd(-708.0));
  __m256d n = _mm256_floor_pd(
      _mm256_add_pd(_mm256_mul_pd(log2e, x), _mm256_set1_pd(0.5)));
  x = _mm256_sub_pd(x, _mm256_mul_pd(n, c1));
  x = _mm256_sub_pd(x, _mm256_mul_pd(n, c2));
  __m256d xx = _mm256_mul_pd(x, x);
  __m256d p = _mm256_set1_pd(1.26177193074810590878e-4);
  p = _mm256_add_pd(_mm256_mul_pd(p, xx),
                    _mm256_set1_pd(3.02994407707441961300e-2));
  p = _mm256_add_pd(_mm256_mul_pd(p, xx),
                    _mm256_set1_pd(9.99999999999999999910e-1));
  __m256d px = _mm256_mul_pd(x, p);
  __m256d q = _mm256_set1_pd(3.00198505138664455042e-6);
  q = _mm256_add_pd(_mm256_mul_pd(q, xx),
                    _mm256_set1_pd(2.52448340349684104192e-3));
  q = _mm256_add_pd(_mm256_mul_pd(q, xx),
                    _mm256_set1_pd(2.27265548208155028766e-1));
  q = _mm256_add_pd(_mm256_mul_pd(q, xx),
                    _mm256_set1_pd(2.00000000000000000005e0));
  __m256d e = _mm256_div_pd(px, _mm256_sub_pd(q, px));
  e = _mm256_add_pd(_mm256_set1_pd(1.0), _mm256_add_pd(e, e));
  __m128i ni = _mm256_cvtpd_epi32(n);
  __m256i nl = _mm256_cvtepi32_epi64(ni);
  __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(nl, _mm256_set1_epi64x(1023)), 52);
  return _mm256_mul_pd(e, _mm256_castsi256_pd(bits));
}

double sum_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + i),
                                           _mm256_loadu_pd(y + i)));
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

double sumsq_diff_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void add_avx2(double* acc, const double* x, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i),
                                            _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) acc[i] += x[i];
}

void sub_avx2(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(a + i),
                                            _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(
        y + i, _mm256_add_pd(_mm256_loadu_pd(y + i),
                             _mm256_mul_pd(va, _mm256_loadu_pd(x + i))));
  for (; i < n; ++i) y[i] += a * x[i];
}

void logistic_grad_hess_avx2(const double* eps, const double* shift,
                             const double* tau, double* g, double* h,
                             std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d signbit = _mm256_set1_pd(-0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d z = _mm256_sub_pd(_mm256_loadu_pd(eps + i),
                              _mm256_loadu_pd(shift + i));
    __m256d az = _mm256_andnot_pd(signbit, z);
    __m256d t = exp_nonpos(_mm256_sub_pd(_mm256_setzero_pd(), az));
    __m256d inv = _mm256_div_pd(one, _mm256_add_pd(one, t));
    __m256d f_neg = _mm256_mul_pd(t, inv);
    __m256d nonneg = _mm256_cmp_pd(z, _mm256_setzero_pd(), _CMP_GE_OQ);
    __m256d f = _mm256_blendv_pd(f_neg, inv, nonneg);
    __m256d gv = _mm256_sub_pd(_mm256_sub_pd(one, _mm256_loadu_pd(tau + i)), f);
    __m256d hv = _mm256_mul_pd(t, _mm256_mul_pd(inv, inv));
    _mm256_storeu_pd(g + i, gv);
    _mm256_storeu_pd(h + i, hv);
  }
  if (i < n)
    scalar().logistic_grad_hess(eps + i, shift + i, tau + i, g + i, h + i,
                                n - i);
}

double pinball_sum_avx2(const double* eps, const double* tau, std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d e = _mm256_loadu_pd(eps + i);
    __m256d ind = _mm256_and_pd(
        _mm256_cmp_pd(e, _mm256_setzero_pd(), _CMP_GT_OQ), one);
    __m256d term =
        _mm256_mul_pd(_mm256_sub_pd(ind, _mm256_loadu_pd(tau + i)), e);
    acc = _mm256_add_pd(acc, term);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    double ind = eps[i] > 0.0 ? 1.0 : 0.0;
    s += (ind - tau[i]) * eps[i];
  }
  return s;
}

}  // namespace

const Kernels& avx2() {
  static const Kernels k = {
      "avx2",          sum_avx2,  dot_avx2,
      sumsq_diff_avx2, add_avx2,  sub_avx2,
      axpy_avx2,       logistic_grad_hess_avx2, pinball_sum_avx2,
  };
  return k;
}

}  // namespace mbt::vec

#elif defined(__x86_64__)

namespace mbt::vec {
// Toolchain without AVX2 support: alias the scalar set.
const Kernels& avx2() { return scalar(); }
}  // namespace mbt::vec

#endif

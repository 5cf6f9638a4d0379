#include <doctest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "mbt/kernels.hpp"

using namespace mbt;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n,
                               double lo = -10.0, double hi = 10.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

bool close_rel(double a, double b, double tol) {
  return std::fabs(a - b) <= tol * std::max({1.0, std::fabs(a), std::fabs(b)});
}

}  // namespace

TEST_CASE("scalar kernel basics") {
  const auto& k = vec::scalar();
  std::vector<double> a{1.0, 2.0, 3.0}, b{0.5, -1.0, 2.0};
  CHECK(k.sum(a.data(), 3) == doctest::Approx(6.0));
  CHECK(k.dot(a.data(), b.data(), 3) == doctest::Approx(4.5));
  CHECK(k.sumsq_diff(a.data(), b.data(), 3) == doctest::Approx(0.25 + 9.0 + 1.0));
  std::vector<double> out(3);
  k.sub(a.data(), b.data(), out.data(), 3);
  CHECK(out[1] == 3.0);
  k.axpy(2.0, a.data(), out.data(), 3);
  CHECK(out[0] == doctest::Approx(2.5));
}

TEST_CASE("smoothed pinball kernel endpoints") {
  const auto& k = vec::scalar();
  double eps = 0.0, shift = 0.0, tau = 0.5, g = 0, h = 0;
  k.logistic_grad_hess(&eps, &shift, &tau, &g, &h, 1);
  CHECK(g == doctest::Approx(0.0));
  CHECK(h == doctest::Approx(0.25));
  // saturation stays finite
  eps = 5000.0;
  k.logistic_grad_hess(&eps, &shift, &tau, &g, &h, 1);
  CHECK(g == doctest::Approx(-0.5));
  CHECK(h == 0.0);
  eps = -5000.0;
  k.logistic_grad_hess(&eps, &shift, &tau, &g, &h, 1);
  CHECK(g == doctest::Approx(0.5));
}

TEST_CASE("pinball sum") {
  const auto& k = vec::scalar();
  std::vector<double> eps{1.0, -1.0}, tau{0.2, 0.2};
  CHECK(k.pinball_sum(eps.data(), tau.data(), 2) ==
        doctest::Approx(0.8 + 0.2));
}

#if defined(__x86_64__)
TEST_CASE("avx2 variants match the scalar reference") {
  if (!vec::cpu_has_avx2()) return;
  const auto& s = vec::scalar();
  const auto& v = vec::avx2();
  std::mt19937_64 rng(7);

  for (std::size_t n : {1, 3, 4, 7, 64, 1001}) {
    CAPTURE(n);
    auto a = random_vec(rng, n), b = random_vec(rng, n);

    // elementwise kernels must match bitwise
    std::vector<double> r1(n), r2(n);
    v.sub(a.data(), b.data(), r1.data(), n);
    s.sub(a.data(), b.data(), r2.data(), n);
    CHECK(r1 == r2);

    r1 = b;
    r2 = b;
    v.axpy(1.7, a.data(), r1.data(), n);
    s.axpy(1.7, a.data(), r2.data(), n);
    CHECK(r1 == r2);

    r1 = b;
    r2 = b;
    v.add(r1.data(), a.data(), n);
    s.add(r2.data(), a.data(), n);
    CHECK(r1 == r2);

    // reductions: summation order differs
    CHECK(close_rel(v.sum(a.data(), n), s.sum(a.data(), n), 1e-12));
    CHECK(close_rel(v.dot(a.data(), b.data(), n), s.dot(a.data(), b.data(), n),
                    1e-12));
    CHECK(close_rel(v.sumsq_diff(a.data(), b.data(), n),
                    s.sumsq_diff(a.data(), b.data(), n), 1e-12));

    // transcendental: vector exp differs from libm in the last ulps
    auto eps = random_vec(rng, n, -60.0, 60.0);
    auto shift = random_vec(rng, n, -3.0, 3.0);
    std::vector<double> tau(n, 0.3);
    std::vector<double> g1(n), h1(n), g2(n), h2(n);
    v.logistic_grad_hess(eps.data(), shift.data(), tau.data(), g1.data(),
                         h1.data(), n);
    s.logistic_grad_hess(eps.data(), shift.data(), tau.data(), g2.data(),
                         h2.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(close_rel(g1[i], g2[i], 1e-12));
      CHECK(close_rel(h1[i], h2[i], 1e-12));
    }

    CHECK(close_rel(v.pinball_sum(eps.data(), tau.data(), n),
                    s.pinball_sum(eps.data(), tau.data(), n), 1e-12));
  }
}

TEST_CASE("kernel override") {
  vec::force_kernels("scalar");
  CHECK(std::string(vec::active().name) == "scalar");
  vec::force_kernels("");
  if (vec::cpu_has_avx2()) CHECK(std::string(vec::active().name) == "avx2");
}
#endif

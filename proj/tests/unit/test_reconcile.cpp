#include <doctest.h>

#include <cmath>
#include <random>

#include "mbt/errors.hpp"
#include "mbt/reconcile.hpp"

using namespace mbt;

namespace {

reconcile::Hierarchy two_by_two() {
  return reconcile::build_summation_matrix({
      {"total", {"g1", "g2"}},
      {"g1", {"b1", "b2"}},
      {"g2", {"b3", "b4"}},
  });
}

}  // namespace

TEST_CASE("summation matrix: displayed 3-level example") {
  auto h = two_by_two();
  REQUIRE(h.s.rows() == 7);
  REQUIRE(h.s.cols() == 4);
  const double expect[7][4] = {
      {1, 1, 1, 1}, {1, 1, 0, 0}, {0, 0, 1, 1},
      {1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1},
  };
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 4; ++j) CHECK(h.s(i, j) == expect[i][j]);
  CHECK(h.labels[0] == "total");
  CHECK(h.labels[3] == "b1");
}

TEST_CASE("summation matrix: degenerate single bottom") {
  auto h = reconcile::build_summation_matrix({{"root", {"b"}}});
  REQUIRE(h.s.rows() == 2);
  REQUIRE(h.s.cols() == 1);
  CHECK(h.s(0, 0) == 1.0);
  CHECK(h.s(1, 0) == 1.0);
}

TEST_CASE("summation matrix: kronecker structure of 31 x 24") {
  // 1 total, 2 halves, 4 quarters, 24 bottoms
  std::vector<std::pair<std::string, std::vector<std::string>>> spec;
  spec.push_back({"total", {"h0", "h1"}});
  for (int i = 0; i < 2; ++i)
    spec.push_back({"h" + std::to_string(i),
                    {"q" + std::to_string(2 * i), "q" + std::to_string(2 * i + 1)}});
  for (int q = 0; q < 4; ++q) {
    std::vector<std::string> kids;
    for (int b = 0; b < 6; ++b)
      kids.push_back("b" + std::to_string(6 * q + b));
    spec.push_back({"q" + std::to_string(q), kids});
  }
  auto h = reconcile::build_summation_matrix(spec);
  REQUIRE(h.s.rows() == 31);
  REQUIRE(h.s.cols() == 24);
  CHECK(h.n_upper() == 7);
  // row 0: all ones; rows 1-2: I_2 (x) 1_12; rows 3-6: I_4 (x) 1_6
  for (int b = 0; b < 24; ++b) {
    CHECK(h.s(0, b) == 1.0);
    CHECK(h.s(1 + b / 12, b) == 1.0);
    CHECK(h.s(3 + b / 6, b) == 1.0);
    CHECK(h.s(7 + b, b) == 1.0);
  }
  double sum = 0;
  for (std::size_t i = 0; i < h.s.size(); ++i) sum += h.s.data()[i];
  CHECK(sum == 24 + 24 + 24 + 24);  // each level covers every bottom once
}

TEST_CASE("summation matrix rejects malformed specs") {
  CHECK_THROWS_AS(reconcile::build_summation_matrix(
                      {{"a", {"b"}}, {"b", {"a"}}}),
                  SchemaError);  // no root
  CHECK_THROWS_AS(reconcile::build_summation_matrix(
                      {{"r", {"a", "b"}}, {"x", {"c"}}}),
                  SchemaError);  // two roots
  CHECK_THROWS_AS(reconcile::build_summation_matrix(
                      {{"r", {"a", "b"}}, {"r2", {"a"}}}),
                  SchemaError);  // multiple parents
}

TEST_CASE("bottom_up sums as displayed") {
  auto h = two_by_two();
  Matrix yb(1, 4);
  for (int b = 0; b < 4; ++b) yb(0, b) = b + 1;
  Matrix full = reconcile::bottom_up(yb, h);
  CHECK(full(0, 0) == 10.0);
  CHECK(full(0, 1) == 3.0);
  CHECK(full(0, 2) == 7.0);
  CHECK(full(0, 3) == 1.0);

  Matrix zeros(3, 4);
  Matrix z = reconcile::bottom_up(zeros, h);
  for (std::size_t i = 0; i < z.size(); ++i) CHECK(z.data()[i] == 0.0);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix rnd(20, 4);
  for (std::size_t i = 0; i < rnd.size(); ++i) rnd.data()[i] = g(rng);
  CHECK(reconcile::consistency_residual(reconcile::bottom_up(rnd, h), h) == 0.0);
}

TEST_CASE("gls with identity omega is an orthogonal projection") {
  auto h = two_by_two();
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix yhat(30, 7);
  for (std::size_t i = 0; i < yhat.size(); ++i) yhat.data()[i] = g(rng);
  Matrix omega = reconcile::omega_identity(7);

  Matrix rec = reconcile::gls_reconcile(yhat, h, omega);
  CHECK(reconcile::consistency_residual(rec, h) < 1e-9);

  // explicit OLS formula S (S'S)^-1 S' yhat'
  Matrix sts = matmul(transpose(h.s), h.s);
  Matrix proj = transpose(matmul(
      h.s, linalg::solve(sts, matmul(transpose(h.s), transpose(yhat)))));
  for (std::size_t i = 0; i < rec.size(); ++i)
    CHECK(std::fabs(rec.data()[i] - proj.data()[i]) < 1e-9);

  // idempotent, and a fixed point on already-consistent input
  Matrix twice = reconcile::gls_reconcile(rec, h, omega);
  for (std::size_t i = 0; i < rec.size(); ++i)
    CHECK(std::fabs(twice.data()[i] - rec.data()[i]) < 1e-9);

  Matrix yb(10, 4);
  for (std::size_t i = 0; i < yb.size(); ++i) yb.data()[i] = g(rng);
  Matrix consistent = reconcile::bottom_up(yb, h);
  Matrix fixed = reconcile::gls_reconcile(consistent, h, omega);
  for (std::size_t i = 0; i < fixed.size(); ++i)
    CHECK(std::fabs(fixed.data()[i] - consistent.data()[i]) < 1e-9);
}

TEST_CASE("gls downweights a huge-variance aggregate") {
  auto h = two_by_two();
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix yhat(50, 7);
  for (std::size_t i = 0; i < yhat.size(); ++i) yhat.data()[i] = g(rng);

  // noisy total: variance ratio 1e6 on row 0
  Matrix omega = reconcile::omega_identity(7);
  omega(0, 0) = 1e6;
  Matrix with_noise = reconcile::gls_reconcile(yhat, h, omega);

  // reference: reconcile without the total at all (drop row 0)
  Matrix s_rest(6, 4);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 4; ++j) s_rest(i, j) = h.s(i + 1, j);
  Matrix yhat_rest(50, 6);
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 6; ++j) yhat_rest(i, j) = yhat(i, j + 1);
  Matrix sts = matmul(transpose(s_rest), s_rest);
  Matrix zb = linalg::solve(sts, matmul(transpose(s_rest), transpose(yhat_rest)));
  Matrix ref = transpose(matmul(h.s, zb));

  double worst = 0;
  for (std::size_t i = 0; i < ref.size(); ++i)
    worst = std::max(worst,
                     std::fabs(with_noise.data()[i] - ref.data()[i]));
  CHECK(worst < 1e-3);
}

TEST_CASE("gls accepts a near-singular omega via the pseudo-inverse") {
  auto h = two_by_two();
  Matrix omega(7, 7);  // rank-deficient PSD
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) omega(i, j) = (i == j ? 1.0 : 0.0);
  omega(6, 6) = 0.0;  // exactly singular
  Matrix yhat(5, 7);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 7; ++j) yhat(i, j) = i + 0.1 * j;
  Matrix rec = reconcile::gls_reconcile(yhat, h, omega);
  CHECK(reconcile::consistency_residual(rec, h) < 1e-9);
}

TEST_CASE("omega estimators") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix err(500, 3);
  for (int i = 0; i < 500; ++i) {
    err(i, 0) = g(rng);
    err(i, 1) = 2.0 * g(rng);
    err(i, 2) = err(i, 0) + 0.1 * g(rng);
  }
  Matrix diag = reconcile::omega_diagonal(err);
  CHECK(diag(0, 0) == doctest::Approx(1.0).epsilon(0.2));
  CHECK(diag(1, 1) == doctest::Approx(4.0).epsilon(0.2));
  CHECK(diag(0, 1) == 0.0);

  Matrix full = reconcile::omega_full_ridge(err);
  CHECK(full(0, 2) == doctest::Approx(1.0).epsilon(0.2));
  CHECK(full(2, 0) == full(0, 2));
  // ridge keeps it invertible
  CHECK_NOTHROW(linalg::solve(full, Matrix::identity(3)));
}

TEST_CASE("mbt reconciliation: zero-residual fixed point") {
  auto h = two_by_two();
  std::mt19937_64 rng(13);
  std::normal_distribution<double> g(0.0, 1.0);
  const int t_all = 120;
  Matrix yb(t_all, 4);
  for (std::size_t i = 0; i < yb.size(); ++i) yb.data()[i] = g(rng);
  Matrix y = reconcile::bottom_up(yb, h);  // truth
  Matrix yhat = y;                         // perfect base forecasts

  reconcile::MbtReconcileConfig cfg;
  cfg.n_rounds = 5;
  cfg.n_min = 10;
  auto model = reconcile::mbt_reconcile_fit(yhat, y, Matrix(), h, cfg);
  Matrix rec = reconcile::mbt_reconcile_predict(model, yhat, y, Matrix(), h);
  // residual target is identically zero: reconciled = bottom-up
  for (int t = 0; t < t_all; ++t)
    for (int j = 0; j < 7; ++j)
      CHECK(std::fabs(rec(t, j) - y(t, j)) < 1e-9);
  CHECK(reconcile::consistency_residual(rec, h) < 1e-9);
}

TEST_CASE("mbt reconciliation beats bottom-up and gls on a biased forecaster") {
  auto h = two_by_two();
  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 1.0);
  const int t_all = 600;
  const int n_t = 7, n_b = 4, n_u = 3;

  // true bottoms, base forecasts = truth + small noise, except bottom 0
  // whose forecaster carries a regime-switching bias readable from the
  // previous step's error
  Matrix yb(t_all, n_b), yhat_b(t_all, n_b);
  for (int t = 0; t < t_all; ++t) {
    double sign = ((t / 60) % 2 == 0) ? 1.0 : -1.0;
    for (int b = 0; b < n_b; ++b) {
      yb(t, b) = std::sin(0.05 * t + b) + 0.05 * g(rng);
      yhat_b(t, b) = yb(t, b) + 0.05 * g(rng);
    }
    yhat_b(t, 0) += sign * 2.0;
  }
  Matrix y = reconcile::bottom_up(yb, h);
  Matrix yhat(t_all, n_t);
  for (int t = 0; t < t_all; ++t) {
    auto full = matvec(h.s, yhat_b.row_span(t));
    for (int j = 0; j < n_t; ++j) yhat(t, j) = full[j];
  }

  const int split = t_all / 2;
  auto head = [&](const Matrix& m, int from, int to) {
    Matrix out(to - from, m.cols());
    for (int i = from; i < to; ++i)
      for (int j = 0; j < m.cols(); ++j) out(i - from, j) = m(i, j);
    return out;
  };
  Matrix yhat_tr = head(yhat, 0, split), y_tr = head(y, 0, split);
  Matrix yhat_te = head(yhat, split, t_all), y_te = head(y, split, t_all);

  reconcile::MbtReconcileConfig cfg;
  cfg.n_rounds = 40;
  cfg.n_min = 10;
  cfg.max_depth = 3;
  auto model = reconcile::mbt_reconcile_fit(yhat_tr, y_tr, Matrix(), h, cfg);
  Matrix rec_mbt = reconcile::mbt_reconcile_predict(model, yhat_te, y_te,
                                                    Matrix(), h);

  Matrix yhat_te_b(yhat_te.rows(), n_b);
  for (int t = 0; t < yhat_te.rows(); ++t)
    for (int b = 0; b < n_b; ++b) yhat_te_b(t, b) = yhat_te(t, n_u + b);
  Matrix rec_bu = reconcile::bottom_up(yhat_te_b, h);
  Matrix train_err(split, n_t);
  for (int t = 0; t < split; ++t)
    for (int j = 0; j < n_t; ++j) train_err(t, j) = yhat(t, j) - y(t, j);
  Matrix rec_gls =
      reconcile::gls_reconcile(yhat_te, h, reconcile::omega_full_ridge(train_err));

  auto rmse = [&](const Matrix& rec) {
    double ss = 0;
    int cnt = 0;
    for (int t = 1; t < rec.rows(); ++t)
      for (int j = 0; j < n_t; ++j) {
        double e = rec(t, j) - y_te(t, j);
        ss += e * e;
        ++cnt;
      }
    return std::sqrt(ss / cnt);
  };
  double e_mbt = rmse(rec_mbt), e_bu = rmse(rec_bu), e_gls = rmse(rec_gls);
  CHECK(e_mbt < 0.95 * e_bu);
  CHECK(e_mbt < 0.95 * e_gls);
  CHECK(reconcile::consistency_residual(rec_mbt, h) < 1e-9);
}

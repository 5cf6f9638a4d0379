#include "mbt/booster.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "mbt/kernels.hpp"
#include "mbt/parallel.hpp"

namespace mbt::boosting {

namespace {

// per-leaf constant outputs (every kind but linear)
std::vector<std::vector<double>> cache_leaf_outputs(
    const tree::Tree& t, const loss::ResponseModel& model) {
  std::vector<std::vector<double>> out(t.nodes.size());
  for (std::size_t id = 0; id < t.nodes.size(); ++id)
    if (t.is_leaf(static_cast<int>(id)))
      out[id] = model.leaf_output(t.nodes[id].w);
  return out;
}

void add_tree_outputs(const tree::Tree& t, const loss::ResponseModel& model,
                      const Matrix& x, const Matrix* x_lr, double rho,
                      Matrix& f) {
  const bool linear = model.kind() == loss::Kind::L2Linear;
  std::vector<std::vector<double>> cached;
  if (!linear) cached = cache_leaf_outputs(t, model);
  parallel_for(f.rows(), [&](int i) {
    int leaf = t.route(x.row_span(i));
    if (linear) {
      auto out = model.leaf_output_linear(t.nodes[leaf].w, x_lr->row_span(i));
      vec::active().axpy(rho, out.data(), f.row(i), out.size());
    } else {
      const auto& out = cached[leaf];
      vec::active().axpy(rho, out.data(), f.row(i), out.size());
    }
  });
}

Matrix broadcast_rows(const std::vector<double>& v, int n) {
  Matrix f(n, static_cast<int>(v.size()));
  for (int i = 0; i < n; ++i)
    std::copy(v.begin(), v.end(), f.row(i));
  return f;
}

}  // namespace

void BoostedModel::bind_response() {
  response_ = loss::ResponseModel::prepare(config.spec, n_t, n_p);
}

Matrix BoostedModel::predict(const Matrix& x, const Matrix* x_lr) const {
  if (x.cols() != n_features)
    throw std::runtime_error("predict: feature width " +
                             std::to_string(x.cols()) + " does not match " +
                             std::to_string(n_features));
  if (config.spec.kind == loss::Kind::L2Linear) {
    if (!x_lr || x_lr->cols() != n_p)
      throw std::runtime_error("predict: linear kind needs x_lr with " +
                               std::to_string(n_p) + " columns");
    if (x_lr->rows() != x.rows())
      throw std::runtime_error("predict: x and x_lr row counts differ");
  }
  Matrix f = broadcast_rows(y0, x.rows());
  for (const auto& t : trees)
    add_tree_outputs(t, response_, x, x_lr, config.learning_rate, f);
  return f;
}

BoostedModel fit(const data::Dataset& d, const BoostConfig& config) {
  if (d.n_rows() == 0) throw std::runtime_error("fit: empty dataset");
  if (!(config.learning_rate > 0.0 && config.learning_rate <= 1.0))
    throw std::runtime_error("fit: learning_rate must be in (0,1]");
  if (config.n_rounds < 1) throw std::runtime_error("fit: n_rounds must be >= 1");
  if (config.leaf_penalty < 0.0)
    throw std::runtime_error("fit: leaf_penalty must be >= 0");
  const int n_p = d.x_lr.empty() ? 0 : d.x_lr.cols();
  if (config.spec.kind != loss::Kind::L2Linear && n_p > 0)
    throw std::runtime_error("fit: x_lr provided but kind is not l2_linear");
  if (!all_finite(d.x) || !all_finite(d.y) ||
      (!d.x_lr.empty() && !all_finite(d.x_lr)))
    throw std::runtime_error("fit: dataset contains non-finite values");

  BoostedModel m;
  m.config = config;
  m.n_features = d.n_features();
  m.n_t = d.n_targets();
  m.n_p = n_p;
  m.feature_names = d.feature_names;
  m.target_names = d.target_names;
  m.bind_response();
  const loss::ResponseModel& model = m.response();

  int n_train = d.n_rows();
  int n_stop_begin = n_train;  // [n_stop_begin, n_rows): validation rows
  if (config.validation_fraction > 0.0) {
    if (config.validation_fraction >= 1.0)
      throw std::runtime_error("fit: validation_fraction must be < 1");
    n_train = std::max(1, static_cast<int>(std::floor(
                              d.n_rows() * (1.0 - config.validation_fraction))));
    n_stop_begin = n_train;
    if (n_stop_begin >= d.n_rows())
      throw std::runtime_error("fit: validation window is empty");
  }
  const bool use_val = n_stop_begin < d.n_rows();
  data::Dataset train = use_val ? data::slice_rows(d, 0, n_train) : d;
  data::Dataset val;
  if (use_val) val = data::slice_rows(d, n_stop_begin, d.n_rows());

  // initial guess: column expectations of the training targets
  const int out_dim = model.out_dim();
  m.y0.assign(out_dim, 0.0);
  {
    std::vector<double> col_mean(m.n_t, 0.0);
    for (int i = 0; i < train.n_rows(); ++i)
      vec::active().add(col_mean.data(), train.y.row(i), col_mean.size());
    for (auto& v : col_mean) v /= train.n_rows();
    if (loss::is_quantile(config.spec.kind)) {
      const int n_q = config.spec.n_q();
      for (int t = 0; t < m.n_t; ++t)
        for (int qi = 0; qi < n_q; ++qi) m.y0[t * n_q + qi] = col_mean[t];
    } else {
      m.y0 = col_mean;
    }
  }

  Matrix f = broadcast_rows(m.y0, train.n_rows());
  Matrix f_stop;
  if (use_val) f_stop = broadcast_rows(m.y0, val.n_rows());
  const Matrix& y_stop = use_val ? val.y : train.y;

  long long n_leaves_total = 0;
  m.loss_trace.push_back(loss::exact_loss(y_stop, use_val ? f_stop : f,
                                          config.spec, 0, config.leaf_penalty));

  Matrix xt = transpose(train.x);
  const Matrix* x_lr = train.x_lr.empty() ? nullptr : &train.x_lr;
  const bool refit = config.spec.refit && loss::is_quantile(config.spec.kind);

  for (int round = 0; round < config.n_rounds; ++round) {
    Matrix residual = model.residuals(train.y, f);
    Matrix stats = model.compute_row_stats(residual, x_lr);
    std::vector<int> leaf_of_row;
    tree::Tree t = tree::fit_tree(xt, stats, model, config.tree, &leaf_of_row);

    if (refit) {
      // replace approximate leaf values with exact per-leaf quantiles
      std::vector<std::vector<int>> rows_of_leaf(t.nodes.size());
      for (int i = 0; i < train.n_rows(); ++i)
        rows_of_leaf[leaf_of_row[i]].push_back(i);
      for (std::size_t id = 0; id < t.nodes.size(); ++id) {
        if (!t.is_leaf(static_cast<int>(id))) continue;
        const auto& rows = rows_of_leaf[id];
        Matrix leaf_res(static_cast<int>(rows.size()), residual.cols());
        for (std::size_t r = 0; r < rows.size(); ++r)
          std::copy(residual.row(rows[r]), residual.row(rows[r]) + residual.cols(),
                    leaf_res.row(static_cast<int>(r)));
        t.nodes[id].w =
            loss::refit_quantile_leaf(leaf_res, config.spec.taus, m.n_t);
      }
    }

    Matrix f_cand = f;
    add_tree_outputs(t, model, train.x, x_lr, config.learning_rate, f_cand);
    Matrix f_stop_cand;
    if (use_val) {
      f_stop_cand = f_stop;
      add_tree_outputs(t, model, val.x, val.x_lr.empty() ? nullptr : &val.x_lr,
                       config.learning_rate, f_stop_cand);
    }
    const long long t_cand = n_leaves_total + t.n_leaves;
    const double eps =
        loss::exact_loss(y_stop, use_val ? f_stop_cand : f_cand, config.spec,
                         t_cand, config.leaf_penalty);
    if (!(eps < m.loss_trace.back())) break;  // non-improving tree is discarded

    f = std::move(f_cand);
    if (use_val) f_stop = std::move(f_stop_cand);
    n_leaves_total = t_cand;
    m.trees.push_back(std::move(t));
    m.loss_trace.push_back(eps);
  }

  if (model.linquad_fallbacks > 0)
    std::cerr << "fit: linear-quadratic loss fell back to the smoothed loss on "
              << model.linquad_fallbacks << " coordinate(s)\n";
  return m;
}

}  // namespace mbt::boosting

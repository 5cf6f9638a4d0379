#pragma once

#include <string>
#include <vector>

#include "mbt/dataset.hpp"
#include "mbt/loss.hpp"
#include "mbt/tree.hpp"

namespace mbt::boosting {

struct BoostConfig {
  int n_rounds = 200;
  double learning_rate = 0.1;  // rho, in (0, 1]
  double leaf_penalty = 0.0;   // gamma, weights the total leaf count
  tree::TreeConfig tree;
  loss::LossResponseSpec spec;
  long long seed = 0;  // recorded in artifacts; fitting is deterministic
  // Off by default: hold out this tail fraction of the rows and stop on
  // its exact loss instead of the training loss.
  double validation_fraction = 0.0;
};

// y0 plus shrunken tree corrections: predict = y0 + rho * sum f_k(x).
class BoostedModel {
 public:
  BoostConfig config;
  int n_features = 0, n_t = 0, n_p = 0;
  std::vector<double> y0;
  std::vector<tree::Tree> trees;
  // penalized stopping loss per retained round; [0] is the initial guess
  std::vector<double> loss_trace;
  std::vector<std::string> feature_names, target_names;
  // opaque data-pipeline description stored by the CLI so predict can
  // rebuild the training features (JSON text; empty when unused)
  std::string pipeline_json;

  Matrix predict(const Matrix& x, const Matrix* x_lr = nullptr) const;
  const loss::ResponseModel& response() const { return response_; }
  int out_dim() const { return response_.out_dim(); }

  void bind_response();  // prepares the response model from config/dims

 private:
  loss::ResponseModel response_;
};

BoostedModel fit(const data::Dataset& d, const BoostConfig& config);

// "mbt-1" JSON model format; load(save(m)) predicts bitwise-identically.
void save(const BoostedModel& m, const std::string& path);
BoostedModel load(const std::string& path);

}  // namespace mbt::boosting

#pragma once

#include <string>
#include <vector>

#include "mbt/matrix.hpp"

namespace mbt::data {

// Feature/target pair with optional linear-response features and the
// row timestamps, kept in ascending time order.
struct Dataset {
  Matrix x;     // N x n_f
  Matrix y;     // N x n_t
  Matrix x_lr;  // N x n_p, empty when unused
  std::vector<std::string> feature_names;
  std::vector<std::string> target_names;
  std::vector<long long> timestamps;  // epoch seconds, may be empty

  int n_rows() const { return y.rows(); }
  int n_features() const { return x.cols(); }
  int n_targets() const { return y.cols(); }
};

// Chronological fold: [train_begin, train_end) immediately followed by
// [test_begin, test_end).
struct CvSplit {
  int fold = 0;
  int train_begin = 0, train_end = 0;
  int test_begin = 0, test_end = 0;
};

// Parses ISO-8601 ("2021-01-04 00:10:00", 'T' separator accepted, time
// part optional) or plain integer epoch seconds.
long long parse_timestamp(const std::string& s);
int weekday_from_epoch(long long ts);  // 0 = Monday
int hour_from_epoch(long long ts);     // 0..23

Dataset load_csv(const std::string& path,
                 const std::vector<std::string>& target_columns,
                 const std::string& timestamp_column);

// Turns a raw series dataset into a supervised one: lagged target
// vectors as features (plus weekday/hour when calendar is set) and the
// next `horizon` target vectors, step-major, as the target.
Dataset build_lag_features(const Dataset& raw, const std::vector<int>& lags,
                           int horizon, bool calendar);

// Univariate-MIMO layout: rows replicated `horizon` times with a
// step-ahead feature and a scalar target.
Dataset encode_step_ahead(const Dataset& mimo_input, int horizon);

std::vector<CvSplit> sliding_window_cv(int n_rows, int n_folds,
                                       double test_fraction);

Dataset slice_rows(const Dataset& d, int begin, int end);

}  // namespace mbt::data

#include "mbt/dataset.hpp"

#include "mbt/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace mbt::data {

namespace {

long long days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                       static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  return era * 146097LL + static_cast<long long>(doe) - 719468LL;
}

bool is_integer_literal(const std::string& s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(trim(cur));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

long long parse_timestamp(const std::string& raw) {
  std::string s = trim(raw);
  if (is_integer_literal(s)) return std::stoll(s);
  // YYYY-MM-DD[ T]HH:MM[:SS]
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  if (s.size() < 10 || s[4] != '-' || s[7] != '-')
    throw SchemaError("cannot parse timestamp '" + raw + "'");
  y = std::stoi(s.substr(0, 4));
  mo = std::stoi(s.substr(5, 2));
  d = std::stoi(s.substr(8, 2));
  if (s.size() > 10) {
    if ((s[10] != ' ' && s[10] != 'T') || s.size() < 16 || s[13] != ':')
      throw SchemaError("cannot parse timestamp '" + raw + "'");
    h = std::stoi(s.substr(11, 2));
    mi = std::stoi(s.substr(14, 2));
    if (s.size() >= 19 && s[16] == ':') sec = std::stoi(s.substr(17, 2));
  }
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || sec > 60)
    throw SchemaError("cannot parse timestamp '" + raw + "'");
  return days_from_civil(y, mo, d) * 86400LL + h * 3600LL + mi * 60LL + sec;
}

int weekday_from_epoch(long long ts) {
  long long days = ts / 86400;
  if (ts < 0 && ts % 86400 != 0) --days;
  return static_cast<int>(((days % 7) + 7 + 3) % 7);  // epoch day was a Thursday
}

int hour_from_epoch(long long ts) {
  long long sod = ((ts % 86400) + 86400) % 86400;
  return static_cast<int>(sod / 3600);
}

Dataset load_csv(const std::string& path,
                 const std::vector<std::string>& target_columns,
                 const std::string& timestamp_column) {
  std::ifstream in(path);
  if (!in) throw SchemaError("load_csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    throw SchemaError("load_csv: '" + path + "' is empty");
  std::vector<std::string> header = split_csv_line(line);

  auto col_index = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw SchemaError("load_csv: missing column '" + name + "'");
    return static_cast<int>(it - header.begin());
  };

  int ts_col = -1;
  if (!timestamp_column.empty()) ts_col = col_index(timestamp_column);
  std::vector<int> tgt_cols;
  for (const auto& name : target_columns) tgt_cols.push_back(col_index(name));
  std::vector<int> feat_cols;
  std::vector<std::string> feat_names;
  for (int j = 0; j < static_cast<int>(header.size()); ++j) {
    if (j == ts_col) continue;
    if (std::find(tgt_cols.begin(), tgt_cols.end(), j) != tgt_cols.end())
      continue;
    feat_cols.push_back(j);
    feat_names.push_back(header[j]);
  }

  struct Row {
    long long ts;
    std::vector<double> feats, tgts;
  };
  std::vector<Row> rows;
  long long dropped = 0;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw SchemaError("load_csv: line " + std::to_string(line_no) +
                               " has " + std::to_string(cells.size()) +
                               " cells, expected " +
                               std::to_string(header.size()));
    bool missing = false;
    auto parse_cell = [&](int j) {
      const std::string& cell = cells[j];
      if (cell.empty()) {
        missing = true;
        return 0.0;
      }
      char* end = nullptr;
      double v = std::strtod(cell.c_str(), &end);
      if (end != cell.c_str() + cell.size())
        throw SchemaError("load_csv: non-numeric cell at line " +
                                 std::to_string(line_no) + ", column '" +
                                 header[j] + "'");
      if (!std::isfinite(v))
        throw SchemaError("load_csv: non-finite cell at line " +
                                 std::to_string(line_no) + ", column '" +
                                 header[j] + "'");
      return v;
    };
    Row r;
    r.ts = ts_col >= 0 ? parse_timestamp(cells[ts_col])
                       : static_cast<long long>(rows.size());
    for (int j : feat_cols) r.feats.push_back(parse_cell(j));
    for (int j : tgt_cols) r.tgts.push_back(parse_cell(j));
    if (missing) {
      ++dropped;
      continue;
    }
    rows.push_back(std::move(r));
  }
  if (dropped > 0)
    std::cerr << "load_csv: dropped " << dropped
              << " row(s) with missing values\n";

  bool sorted = std::is_sorted(
      rows.begin(), rows.end(),
      [](const Row& a, const Row& b) { return a.ts < b.ts; });
  if (!sorted) {
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.ts < b.ts; });
    for (std::size_t i = 1; i < rows.size(); ++i)
      if (rows[i].ts == rows[i - 1].ts)
        throw std::runtime_error(
            "load_csv: unsorted duplicate timestamps (ambiguous order) at epoch " +
            std::to_string(rows[i].ts));
  }

  Dataset d;
  d.feature_names = feat_names;
  d.target_names = target_columns;
  const int n = static_cast<int>(rows.size());
  d.x = Matrix(n, static_cast<int>(feat_cols.size()));
  d.y = Matrix(n, static_cast<int>(tgt_cols.size()));
  d.timestamps.resize(n);
  for (int i = 0; i < n; ++i) {
    d.timestamps[i] = rows[i].ts;
    for (int j = 0; j < d.x.cols(); ++j) d.x(i, j) = rows[i].feats[j];
    for (int j = 0; j < d.y.cols(); ++j) d.y(i, j) = rows[i].tgts[j];
  }
  return d;
}

Dataset build_lag_features(const Dataset& raw, const std::vector<int>& lags,
                           int horizon, bool calendar) {
  const int n = raw.n_rows();
  const int n_series = raw.n_targets();
  if (horizon < 1) throw SchemaError("build_lag_features: horizon must be >= 1");
  for (int j : lags)
    if (j < 1) throw SchemaError("build_lag_features: lags must be >= 1");
  const int max_lag = lags.empty() ? 0 : *std::max_element(lags.begin(), lags.end());
  if (horizon + max_lag >= n)
    throw SchemaError("build_lag_features: insufficient history");
  if (calendar && raw.timestamps.empty())
    throw SchemaError("build_lag_features: calendar features need timestamps");

  const int n_out = n - max_lag - horizon + 1;
  const int n_feat = static_cast<int>(lags.size()) * n_series + (calendar ? 2 : 0);

  Dataset d;
  d.x = Matrix(n_out, n_feat);
  d.y = Matrix(n_out, horizon * n_series);
  for (int j : lags)
    for (const auto& name : raw.target_names)
      d.feature_names.push_back(name + "_lag" + std::to_string(j));
  if (calendar) {
    d.feature_names.push_back("weekday");
    d.feature_names.push_back("hour");
  }
  for (int k = 0; k < horizon; ++k)
    for (const auto& name : raw.target_names)
      d.target_names.push_back(name + "_h" + std::to_string(k + 1));

  if (!raw.timestamps.empty()) d.timestamps.resize(n_out);
  for (int r = 0; r < n_out; ++r) {
    const int t = r + max_lag;
    int c = 0;
    for (int j : lags)
      for (int s = 0; s < n_series; ++s) d.x(r, c++) = raw.y(t - j, s);
    if (calendar) {
      d.x(r, c++) = weekday_from_epoch(raw.timestamps[t]);
      d.x(r, c++) = hour_from_epoch(raw.timestamps[t]);
    }
    for (int k = 0; k < horizon; ++k)
      for (int s = 0; s < n_series; ++s)
        d.y(r, k * n_series + s) = raw.y(t + k, s);
    if (!raw.timestamps.empty()) d.timestamps[r] = raw.timestamps[t];
  }
  return d;
}

Dataset encode_step_ahead(const Dataset& mimo_input, int horizon) {
  if (mimo_input.n_targets() != horizon)
    throw std::runtime_error(
        "encode_step_ahead: target dimension does not equal horizon");
  const int n = mimo_input.n_rows();
  Dataset d;
  d.feature_names = mimo_input.feature_names;
  d.feature_names.push_back("step_ahead");
  d.target_names = {"y"};
  d.x = Matrix(n * horizon, mimo_input.n_features() + 1);
  d.y = Matrix(n * horizon, 1);
  if (!mimo_input.timestamps.empty()) d.timestamps.resize(n * horizon);
  int r = 0;
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < horizon; ++k, ++r) {
      for (int j = 0; j < mimo_input.n_features(); ++j)
        d.x(r, j) = mimo_input.x(i, j);
      d.x(r, mimo_input.n_features()) = k;
      d.y(r, 0) = mimo_input.y(i, k);
      if (!mimo_input.timestamps.empty())
        d.timestamps[r] = mimo_input.timestamps[i];
    }
  }
  return d;
}

std::vector<CvSplit> sliding_window_cv(int n_rows, int n_folds,
                                       double test_fraction) {
  if (n_folds < 1) throw SchemaError("sliding_window_cv: n_folds must be >= 1");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw SchemaError("sliding_window_cv: test_fraction must be in (0,1)");
  // window = train + test slides forward by the test length; the last
  // test window ends exactly at n_rows
  const int test_len = static_cast<int>(
      std::floor(test_fraction * n_rows / (1.0 + test_fraction * (n_folds - 1))));
  const int window = n_rows - (n_folds - 1) * test_len;
  const int train_len = window - test_len;
  if (test_len < 1 || train_len < 1)
    throw SchemaError("sliding_window_cv: infeasible partition");
  std::vector<CvSplit> folds;
  for (int i = 0; i < n_folds; ++i) {
    CvSplit s;
    s.fold = i;
    s.train_begin = i * test_len;
    s.train_end = s.train_begin + train_len;
    s.test_begin = s.train_end;
    s.test_end = s.test_begin + test_len;
    folds.push_back(s);
  }
  return folds;
}

Dataset slice_rows(const Dataset& d, int begin, int end) {
  if (begin < 0 || end > d.n_rows() || begin > end)
    throw std::runtime_error("slice_rows: range out of bounds");
  Dataset out;
  out.feature_names = d.feature_names;
  out.target_names = d.target_names;
  const int n = end - begin;
  out.x = Matrix(n, d.x.cols());
  out.y = Matrix(n, d.y.cols());
  if (!d.x_lr.empty()) out.x_lr = Matrix(n, d.x_lr.cols());
  if (!d.timestamps.empty()) out.timestamps.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d.x.cols(); ++j) out.x(i, j) = d.x(begin + i, j);
    for (int j = 0; j < d.y.cols(); ++j) out.y(i, j) = d.y(begin + i, j);
    if (!d.x_lr.empty())
      for (int j = 0; j < d.x_lr.cols(); ++j) out.x_lr(i, j) = d.x_lr(begin + i, j);
    if (!d.timestamps.empty()) out.timestamps[i] = d.timestamps[begin + i];
  }
  return out;
}

}  // namespace mbt::data

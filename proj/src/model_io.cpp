#include <fstream>

#include <json.hpp>

#include "mbt/booster.hpp"
#include "mbt/errors.hpp"

namespace mbt::boosting {

namespace {

using nlohmann::json;

json tree_to_json(const tree::Tree& t, int id) {
  const tree::TreeNode& n = t.nodes[id];
  if (t.is_leaf(id))
    return json{{"leaf", {{"w", n.w}, {"n_rows", n.n_rows}}}};
  return json{{"split", {{"feature", n.feature}, {"threshold", n.threshold}}},
              {"n_rows", n.n_rows},
              {"left", tree_to_json(t, n.left)},
              {"right", tree_to_json(t, n.right)}};
}

const json& require(const json& j, const char* key, const char* ctx) {
  auto it = j.find(key);
  if (it == j.end())
    throw SchemaError(std::string("model schema: missing '") + key + "' in " + ctx);
  return *it;
}

int tree_from_json(const json& j, tree::Tree& t) {
  int id = static_cast<int>(t.nodes.size());
  t.nodes.emplace_back();
  if (j.contains("leaf")) {
    const json& leaf = j["leaf"];
    t.nodes[id].w = require(leaf, "w", "leaf").get<std::vector<double>>();
    t.nodes[id].n_rows = require(leaf, "n_rows", "leaf").get<int>();
    ++t.n_leaves;
    return id;
  }
  if (!j.contains("split"))
    throw SchemaError("model schema: node is neither leaf nor split");
  const json& split = j["split"];
  t.nodes[id].feature = require(split, "feature", "split").get<int>();
  t.nodes[id].threshold = require(split, "threshold", "split").get<double>();
  t.nodes[id].n_rows = j.value("n_rows", 0);
  if (t.nodes[id].feature < 0)
    throw SchemaError("model schema: split feature must be >= 0");
  int l = tree_from_json(require(j, "left", "split node"), t);
  int r = tree_from_json(require(j, "right", "split node"), t);
  t.nodes[id].left = l;
  t.nodes[id].right = r;
  return id;
}

json spec_to_json(const loss::LossResponseSpec& s) {
  json j{{"kind", loss::kind_name(s.kind)},
         {"lambda", s.lambda},
         {"k_coef", s.k_coef},
         {"refit", s.refit}};
  if (!s.wavenumbers.empty()) j["wavenumbers"] = s.wavenumbers;
  if (!s.taus.empty()) j["taus"] = s.taus;
  if (!s.summation.empty()) {
    json rows = json::array();
    for (int i = 0; i < s.summation.rows(); ++i) {
      json row = json::array();
      for (int c = 0; c < s.summation.cols(); ++c) row.push_back(s.summation(i, c));
      rows.push_back(std::move(row));
    }
    j["summation"] = std::move(rows);
  }
  return j;
}

loss::LossResponseSpec spec_from_json(const json& j) {
  loss::LossResponseSpec s;
  s.kind = loss::kind_from_name(require(j, "kind", "spec").get<std::string>());
  s.lambda = require(j, "lambda", "spec").get<double>();
  s.k_coef = j.value("k_coef", 1.0);
  s.refit = j.value("refit", false);
  if (j.contains("wavenumbers"))
    s.wavenumbers = j["wavenumbers"].get<std::vector<int>>();
  if (j.contains("taus")) s.taus = j["taus"].get<std::vector<double>>();
  if (j.contains("summation")) {
    const json& rows = j["summation"];
    if (!rows.is_array() || rows.empty())
      throw SchemaError("model schema: summation must be a non-empty array");
    int nr = static_cast<int>(rows.size());
    int nc = static_cast<int>(rows[0].size());
    s.summation = Matrix(nr, nc);
    for (int i = 0; i < nr; ++i) {
      if (static_cast<int>(rows[i].size()) != nc)
        throw SchemaError("model schema: ragged summation matrix");
      for (int c = 0; c < nc; ++c) s.summation(i, c) = rows[i][c].get<double>();
    }
  }
  return s;
}

}  // namespace

void save(const BoostedModel& m, const std::string& path) {
  json j;
  j["format"] = "mbt-1";
  j["config"] = {{"n_rounds", m.config.n_rounds},
                 {"learning_rate", m.config.learning_rate},
                 {"leaf_penalty", m.config.leaf_penalty},
                 {"n_min", m.config.tree.n_min},
                 {"max_depth", m.config.tree.max_depth},
                 {"n_bins", m.config.tree.n_bins},
                 {"seed", m.config.seed},
                 {"validation_fraction", m.config.validation_fraction}};
  j["spec"] = spec_to_json(m.config.spec);
  j["n_features"] = m.n_features;
  j["n_t"] = m.n_t;
  j["n_p"] = m.n_p;
  j["feature_names"] = m.feature_names;
  j["target_names"] = m.target_names;
  j["y0"] = m.y0;
  j["loss_trace"] = m.loss_trace;
  if (!m.pipeline_json.empty())
    j["pipeline"] = json::parse(m.pipeline_json);
  json trees = json::array();
  for (const auto& t : m.trees) trees.push_back(tree_to_json(t, 0));
  j["trees"] = std::move(trees);

  std::ofstream out(path);
  if (!out) throw std::runtime_error("save: cannot write '" + path + "'");
  out << j.dump(1) << "\n";
  if (!out) throw std::runtime_error("save: write failed for '" + path + "'");
}

BoostedModel load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("load: cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw SchemaError(std::string("load: malformed model file: ") + e.what());
  }
  try {
    if (!j.is_object() || !j.contains("format"))
      throw SchemaError("model schema: missing 'format'");
    if (j["format"].get<std::string>() != "mbt-1")
      throw SchemaError("model schema: unsupported format version '" +
                        j["format"].get<std::string>() + "'");
    BoostedModel m;
    const json& cfg = require(j, "config", "model");
    m.config.n_rounds = require(cfg, "n_rounds", "config").get<int>();
    m.config.learning_rate = require(cfg, "learning_rate", "config").get<double>();
    m.config.leaf_penalty = require(cfg, "leaf_penalty", "config").get<double>();
    m.config.tree.n_min = require(cfg, "n_min", "config").get<int>();
    m.config.tree.max_depth = require(cfg, "max_depth", "config").get<int>();
    m.config.tree.n_bins = require(cfg, "n_bins", "config").get<int>();
    m.config.seed = cfg.value("seed", 0LL);
    m.config.validation_fraction = cfg.value("validation_fraction", 0.0);
    m.config.spec = spec_from_json(require(j, "spec", "model"));
    m.n_features = require(j, "n_features", "model").get<int>();
    m.n_t = require(j, "n_t", "model").get<int>();
    m.n_p = require(j, "n_p", "model").get<int>();
    m.feature_names =
        require(j, "feature_names", "model").get<std::vector<std::string>>();
    m.target_names =
        require(j, "target_names", "model").get<std::vector<std::string>>();
    m.y0 = require(j, "y0", "model").get<std::vector<double>>();
    m.loss_trace =
        require(j, "loss_trace", "model").get<std::vector<double>>();
    if (j.contains("pipeline")) m.pipeline_json = j["pipeline"].dump();
    m.bind_response();
    if (static_cast<int>(m.y0.size()) != m.response().out_dim())
      throw SchemaError("model schema: y0 length does not match output width");
    for (const json& tj : require(j, "trees", "model")) {
      tree::Tree t;
      tree_from_json(tj, t);
      m.trees.push_back(std::move(t));
    }
    const int n_r = m.response().param_dim();
    for (const auto& t : m.trees)
      for (const auto& node : t.nodes) {
        if (node.feature >= m.n_features)
          throw SchemaError("model schema: split feature out of range");
        if (node.feature < 0 && static_cast<int>(node.w.size()) != n_r)
          throw SchemaError("model schema: leaf parameter width mismatch");
      }
    return m;
  } catch (const SchemaError&) {
    throw;
  } catch (const std::exception& e) {
    throw SchemaError(std::string("model schema: ") + e.what());
  }
}

}  // namespace mbt::boosting

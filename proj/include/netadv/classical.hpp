#ifndef NETADV_CLASSICAL_HPP
#define NETADV_CLASSICAL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "netadv/classifier.hpp"
#include "netadv/matrix.hpp"
#include "netadv/random.hpp"

namespace netadv {

// ----------------------------------------------------------------------- knn

class KnnClassifier : public Classifier {
 public:
  KnnClassifier() = default;
  KnnClassifier(Matrix train_x, std::vector<int> train_y, std::size_t k)
      : x_(std::move(train_x)), y_(std::move(train_y)), k_(k) {}

  std::string kind() const override { return "knn"; }
  std::size_t input_dim() const override { return x_.cols(); }

  // fraction of malicious labels among the k nearest neighbours; distance
  // ties break toward the lower row index
  double predict_proba(std::span<const double> q) const override {
    check_dim(q);
    std::vector<std::pair<double, std::size_t>> dist(x_.rows());
    for (std::size_t i = 0; i < x_.rows(); ++i) {
      auto row = x_.row(i);
      double d = 0.0;
      for (std::size_t c = 0; c < row.size(); ++c) {
        double diff = row[c] - q[c];
        d += diff * diff;
      }
      dist[i] = {d, i};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k_), dist.end());
    std::size_t malicious = 0;
    for (std::size_t j = 0; j < k_; ++j) malicious += y_[dist[j].second] ? 1 : 0;
    return static_cast<double>(malicious) / static_cast<double>(k_);
  }

  nlohmann::ordered_json to_json() const override {
    nlohmann::ordered_json doc;
    doc["kind"] = "knn";
    doc["version"] = 1;
    doc["schema_dim"] = x_.cols();
    doc["hyperparameters"] = {{"k", k_}};
    doc["parameters"] = {{"rows", x_.rows()},
                         {"features", x_.data()},
                         {"labels", y_}};
    return doc;
  }

  static KnnClassifier from_json(const nlohmann::ordered_json& doc) {
    std::size_t dim = doc.at("schema_dim").get<std::size_t>();
    std::size_t rows = doc.at("parameters").at("rows").get<std::size_t>();
    Matrix x(rows, dim);
    x.data() = doc.at("parameters").at("features").get<std::vector<double>>();
    if (x.data().size() != rows * dim)
      throw DataError("knn model file: feature block size mismatch");
    auto labels = doc.at("parameters").at("labels").get<std::vector<int>>();
    if (labels.size() != rows)
      throw DataError("knn model file: label count mismatch");
    return KnnClassifier(std::move(x), std::move(labels),
                         doc.at("hyperparameters").at("k").get<std::size_t>());
  }

 private:
  Matrix x_;
  std::vector<int> y_;
  std::size_t k_ = 0;
};

inline KnnClassifier train_knn(const EncodedDataset& data, std::size_t k) {
  if (k == 0) throw DataError("train_knn: k must be positive");
  if (data.size() == 0) throw DataError("train_knn: empty dataset");
  if (k > data.size()) throw DataError("train_knn: k exceeds dataset size");
  return KnnClassifier(data.features, data.labels, k);
}

// -------------------------------------------------------------- decision tree

struct TreeNode {
  int feature = -1;        // -1 marks a leaf
  double threshold = 0.0;  // x[feature] <= threshold goes left
  int left = -1;
  int right = -1;
  double proba = 0.0;      // leaf: malicious fraction of its training rows

  bool is_leaf() const { return feature < 0; }
};

class DecisionTree : public Classifier {
 public:
  DecisionTree() = default;

  std::string kind() const override { return "tree"; }
  std::size_t input_dim() const override { return dim_; }

  double predict_proba(std::span<const double> x) const override {
    check_dim(x);
    int node = 0;
    while (!nodes_[static_cast<std::size_t>(node)].is_leaf()) {
      const TreeNode& n = nodes_[static_cast<std::size_t>(node)];
      node = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes_[static_cast<std::size_t>(node)].proba;
  }

  // Greedy Gini construction. Candidate thresholds are midpoints between
  // consecutive distinct sorted values; ties in impurity break toward the
  // lower feature index, then the lower threshold.
  void fit(const Matrix& x, const std::vector<int>& y,
           const std::vector<std::size_t>& rows,
           const std::vector<std::size_t>& features, std::size_t max_depth,
           std::size_t min_leaf) {
    dim_ = x.cols();
    max_depth_ = max_depth;
    min_leaf_ = min_leaf;
    nodes_.clear();
    build(x, y, rows, features, 0);
  }

  nlohmann::ordered_json to_json() const override {
    nlohmann::ordered_json doc;
    doc["kind"] = "tree";
    doc["version"] = 1;
    doc["schema_dim"] = dim_;
    doc["hyperparameters"] = {{"max_depth", max_depth_}, {"min_leaf", min_leaf_}};
    doc["parameters"]["nodes"] = nlohmann::ordered_json::array();
    for (const auto& n : nodes_) {
      doc["parameters"]["nodes"].push_back(
          {{"feature", n.feature},
           {"threshold", n.threshold},
           {"left", n.left},
           {"right", n.right},
           {"proba", n.proba}});
    }
    return doc;
  }

  static DecisionTree from_json(const nlohmann::ordered_json& doc) {
    DecisionTree t;
    t.dim_ = doc.at("schema_dim").get<std::size_t>();
    const auto& hp = doc.at("hyperparameters");
    t.max_depth_ = hp.at("max_depth").get<std::size_t>();
    t.min_leaf_ = hp.at("min_leaf").get<std::size_t>();
    for (const auto& j : doc.at("parameters").at("nodes")) {
      TreeNode n;
      n.feature = j.at("feature").get<int>();
      n.threshold = j.at("threshold").get<double>();
      n.left = j.at("left").get<int>();
      n.right = j.at("right").get<int>();
      n.proba = j.at("proba").get<double>();
      t.nodes_.push_back(n);
    }
    if (t.nodes_.empty()) throw DataError("tree model file: no nodes");
    return t;
  }

 private:
  static double gini(std::size_t pos, std::size_t total) {
    if (total == 0) return 0.0;
    double p = static_cast<double>(pos) / static_cast<double>(total);
    return 2.0 * p * (1.0 - p);
  }

  int build(const Matrix& x, const std::vector<int>& y,
            const std::vector<std::size_t>& rows,
            const std::vector<std::size_t>& features, std::size_t depth) {
    std::size_t pos = 0;
    for (std::size_t r : rows) pos += y[r] ? 1 : 0;

    int index = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    nodes_.back().proba = rows.empty()
                              ? 0.0
                              : static_cast<double>(pos) / static_cast<double>(rows.size());

    bool pure = pos == 0 || pos == rows.size();
    if (depth >= max_depth_ || pure || rows.size() < 2 * min_leaf_) return index;

    double parent = gini(pos, rows.size());
    double best_score = parent - 1e-12;
    int best_feature = -1;
    double best_threshold = 0.0;

    std::vector<std::pair<double, int>> vals;
    for (std::size_t f : features) {
      vals.clear();
      for (std::size_t r : rows) vals.emplace_back(x(r, f), y[r]);
      std::sort(vals.begin(), vals.end());
      std::size_t left_n = 0, left_pos = 0;
      for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
        ++left_n;
        left_pos += vals[i].second ? 1 : 0;
        if (vals[i].first == vals[i + 1].first) continue;
        std::size_t right_n = vals.size() - left_n;
        if (left_n < min_leaf_ || right_n < min_leaf_) continue;
        double score =
            (static_cast<double>(left_n) * gini(left_pos, left_n) +
             static_cast<double>(right_n) * gini(pos - left_pos, right_n)) /
            static_cast<double>(vals.size());
        if (score < best_score) {
          best_score = score;
          best_feature = static_cast<int>(f);
          best_threshold = (vals[i].first + vals[i + 1].first) / 2.0;
        }
      }
    }
    if (best_feature < 0) return index;

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows)
      (x(r, static_cast<std::size_t>(best_feature)) <= best_threshold ? left_rows
                                                                      : right_rows)
          .push_back(r);

    nodes_[static_cast<std::size_t>(index)].feature = best_feature;
    nodes_[static_cast<std::size_t>(index)].threshold = best_threshold;
    int left = build(x, y, left_rows, features, depth + 1);
    nodes_[static_cast<std::size_t>(index)].left = left;
    int right = build(x, y, right_rows, features, depth + 1);
    nodes_[static_cast<std::size_t>(index)].right = right;
    return index;
  }

  std::vector<TreeNode> nodes_;
  std::size_t dim_ = 0;
  std::size_t max_depth_ = 0;
  std::size_t min_leaf_ = 1;
};

inline DecisionTree train_tree(const EncodedDataset& data, std::size_t max_depth,
                               std::size_t min_leaf) {
  if (max_depth == 0 || min_leaf == 0)
    throw DataError("train_tree: max_depth and min_leaf must be positive");
  require_both_classes(data, "train_tree");
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), 0);
  std::vector<std::size_t> features(data.schema.dim());
  std::iota(features.begin(), features.end(), 0);
  DecisionTree tree;
  tree.fit(data.features, data.labels, rows, features, max_depth, min_leaf);
  return tree;
}

// -------------------------------------------------------------- random forest

class RandomForest : public Classifier {
 public:
  RandomForest() = default;
  explicit RandomForest(std::vector<DecisionTree> trees) : trees_(std::move(trees)) {}

  std::string kind() const override { return "forest"; }
  std::size_t input_dim() const override { return trees_.at(0).input_dim(); }

  // arithmetic mean of member-tree probabilities
  double predict_proba(std::span<const double> x) const override {
    double sum = 0.0;
    for (const auto& t : trees_) sum += t.predict_proba(x);
    return sum / static_cast<double>(trees_.size());
  }

  const std::vector<DecisionTree>& trees() const { return trees_; }

  nlohmann::ordered_json to_json() const override {
    nlohmann::ordered_json doc;
    doc["kind"] = "forest";
    doc["version"] = 1;
    doc["schema_dim"] = input_dim();
    doc["hyperparameters"] = {{"n_trees", trees_.size()}};
    doc["parameters"]["trees"] = nlohmann::ordered_json::array();
    for (const auto& t : trees_) doc["parameters"]["trees"].push_back(t.to_json());
    return doc;
  }

  static RandomForest from_json(const nlohmann::ordered_json& doc) {
    std::vector<DecisionTree> trees;
    for (const auto& t : doc.at("parameters").at("trees"))
      trees.push_back(DecisionTree::from_json(t));
    if (trees.empty()) throw DataError("forest model file: no trees");
    return RandomForest(std::move(trees));
  }

 private:
  std::vector<DecisionTree> trees_;
};

// Bagging with per-tree bootstrap and sqrt(d) feature subsampling; per-tree
// seeds derive from the master seed, so tree t is reproducible in isolation.
inline RandomForest train_forest(const EncodedDataset& data, std::size_t n_trees,
                                 std::size_t max_depth, std::uint64_t seed,
                                 bool feature_subsampling = true) {
  if (n_trees == 0) throw DataError("train_forest: n_trees must be positive");
  if (max_depth == 0) throw DataError("train_forest: max_depth must be positive");
  require_both_classes(data, "train_forest");
  std::size_t d = data.schema.dim();
  std::size_t subset = feature_subsampling
                           ? static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))))
                           : d;
  std::vector<DecisionTree> trees(n_trees);
  for (std::size_t t = 0; t < n_trees; ++t) {
    Rng rng(mix_seed(seed, t));
    std::vector<std::size_t> rows(data.size());
    if (feature_subsampling) {
      for (auto& r : rows)
        r = static_cast<std::size_t>(rng.next_int(0, static_cast<long>(data.size()) - 1));
    } else {
      std::iota(rows.begin(), rows.end(), 0);  // degenerate mode used by tests
    }
    std::vector<std::size_t> features(d);
    std::iota(features.begin(), features.end(), 0);
    rng.shuffle(features);
    features.resize(subset);
    std::sort(features.begin(), features.end());
    trees[t].fit(data.features, data.labels, rows, features, max_depth, 1);
  }
  return RandomForest(std::move(trees));
}

// ----------------------------------------------------------------- linear svm

// Linear SVM trained with deterministic epoch-wise subgradient descent on the
// hinge loss with L2 regularization. The sigmoid of the margin serves as an
// uncalibrated probability for thresholding.
class LinearSvm : public Classifier {
 public:
  LinearSvm() = default;
  LinearSvm(std::vector<double> w, double b) : w_(std::move(w)), b_(b) {}

  std::string kind() const override { return "svm"; }
  std::size_t input_dim() const override { return w_.size(); }

  double margin(std::span<const double> x) const {
    check_dim(x);
    double m = b_;
    for (std::size_t i = 0; i < w_.size(); ++i) m += w_[i] * x[i];
    return m;
  }

  double predict_proba(std::span<const double> x) const override {
    return sigmoid(margin(x));
  }

  void fit(const EncodedDataset& data, std::size_t epochs, double lr, double reg) {
    w_.assign(data.schema.dim(), 0.0);
    b_ = 0.0;
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
      for (std::size_t i = 0; i < data.size(); ++i) {
        double y = data.labels[i] ? 1.0 : -1.0;
        auto x = data.row(i);
        if (y * margin(x) < 1.0) {
          for (std::size_t c = 0; c < w_.size(); ++c)
            w_[c] -= lr * (reg * w_[c] - y * x[c]);
          b_ += lr * y;
        } else {
          for (std::size_t c = 0; c < w_.size(); ++c) w_[c] -= lr * reg * w_[c];
        }
      }
    }
  }

  const std::vector<double>& weights() const { return w_; }
  double bias() const { return b_; }

  nlohmann::ordered_json to_json() const override {
    nlohmann::ordered_json doc;
    doc["kind"] = "svm";
    doc["version"] = 1;
    doc["schema_dim"] = w_.size();
    doc["hyperparameters"] = nlohmann::ordered_json::object();
    doc["parameters"] = {{"weights", w_}, {"bias", b_}};
    return doc;
  }

  static LinearSvm from_json(const nlohmann::ordered_json& doc) {
    LinearSvm m;
    m.w_ = doc.at("parameters").at("weights").get<std::vector<double>>();
    m.b_ = doc.at("parameters").at("bias").get<double>();
    if (m.w_.size() != doc.at("schema_dim").get<std::size_t>())
      throw DataError("svm model file: dimension mismatch");
    return m;
  }

 private:
  std::vector<double> w_;
  double b_ = 0.0;
};

inline LinearSvm train_svm(const EncodedDataset& data, std::size_t epochs,
                           double lr, double reg) {
  if (epochs == 0) throw DataError("train_svm: epochs must be positive");
  require_both_classes(data, "train_svm");
  LinearSvm svm;
  svm.fit(data, epochs, lr, reg);
  return svm;
}

}  // namespace netadv

#endif  // NETADV_CLASSICAL_HPP

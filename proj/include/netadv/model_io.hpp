#ifndef NETADV_MODEL_IO_HPP
#define NETADV_MODEL_IO_HPP

#include <memory>
#include <string>

#include "netadv/classical.hpp"
#include "netadv/dataset_io.hpp"
#include "netadv/mlp.hpp"

namespace netadv {

inline void save_model(const Classifier& model, const std::string& path) {
  save_json_file(path, model.to_json());
}

// round-trip contract: the loaded model predicts identically to the saved one
inline std::unique_ptr<Classifier> load_model(const std::string& path) {
  ordered_json doc = load_json_file(path);
  if (!doc.contains("kind") || !doc.contains("version"))
    throw DataError(path + ": not a model file");
  if (doc.at("version").get<int>() != 1)
    throw DataError(path + ": unsupported model version " +
                    doc.at("version").dump());
  const std::string kind = doc.at("kind").get<std::string>();
  try {
    if (kind == "mlp") return std::make_unique<MlpModel>(MlpModel::from_json(doc));
    if (kind == "linear") return std::make_unique<LinearModel>(LinearModel::from_json(doc));
    if (kind == "knn") return std::make_unique<KnnClassifier>(KnnClassifier::from_json(doc));
    if (kind == "tree") return std::make_unique<DecisionTree>(DecisionTree::from_json(doc));
    if (kind == "forest") return std::make_unique<RandomForest>(RandomForest::from_json(doc));
    if (kind == "svm") return std::make_unique<LinearSvm>(LinearSvm::from_json(doc));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path + ": malformed model file: " + e.what());
  }
  throw DataError(path + ": unknown model kind '" + kind + "'");
}

}  // namespace netadv

#endif  // NETADV_MODEL_IO_HPP

#ifndef NETADV_CLASSIFIER_HPP
#define NETADV_CLASSIFIER_HPP

#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "netadv/dataset.hpp"
#include "netadv/error.hpp"

namespace netadv {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// binary cross-entropy with the probability clamped away from 0/1
inline double bce_loss(double p, int y) {
  const double eps = 1e-12;
  p = std::clamp(p, eps, 1.0 - eps);
  return y ? -std::log(p) : -std::log(1.0 - p);
}

// Common contract for trained models. predict_proba returns the probability
// of the malicious class; gradients are available only on models that report
// differentiable() == true.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual std::string kind() const = 0;
  virtual std::size_t input_dim() const = 0;

  virtual double predict_proba(std::span<const double> x) const = 0;

  int predict(std::span<const double> x) const {
    return predict_proba(x) >= 0.5 ? 1 : 0;
  }

  virtual bool differentiable() const { return false; }

  // gradient of the binary cross-entropy at (x, y) w.r.t. x
  virtual std::vector<double> loss_gradient(std::span<const double> x, int y) const {
    (void)x;
    (void)y;
    throw CapabilityError(kind() + ": model provides no gradients");
  }

  // gradient of the pre-sigmoid logit f(x); the decision boundary is f(x) = 0
  virtual std::vector<double> logit_gradient(std::span<const double> x) const {
    (void)x;
    throw CapabilityError(kind() + ": model provides no gradients");
  }

  // pre-sigmoid logit; only meaningful on differentiable models
  virtual double logit(std::span<const double> x) const {
    throw CapabilityError(kind() + ": model exposes no logit");
  }

  virtual void check_dim(std::span<const double> x) const {
    if (x.size() != input_dim())
      throw DataError(kind() + ": input has dimension " + std::to_string(x.size()) +
                      ", model expects " + std::to_string(input_dim()));
  }

  virtual nlohmann::ordered_json to_json() const = 0;
};

struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
};

inline Metrics evaluate_accuracy(const Classifier& model, const EncodedDataset& data) {
  if (data.size() == 0) throw DataError("evaluate_accuracy: empty dataset");
  Metrics m;
  for (std::size_t i = 0; i < data.size(); ++i) {
    int pred = model.predict(data.row(i));
    int truth = data.labels[i];
    if (pred == 1 && truth == 1) ++m.tp;
    else if (pred == 0 && truth == 0) ++m.tn;
    else if (pred == 1 && truth == 0) ++m.fp;
    else ++m.fn;
  }
  double n = static_cast<double>(data.size());
  m.accuracy = static_cast<double>(m.tp + m.tn) / n;
  m.precision = (m.tp + m.fp) ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp) : 0.0;
  m.recall = (m.tp + m.fn) ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn) : 0.0;
  m.f1 = (m.precision + m.recall > 0.0)
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

inline void require_both_classes(const EncodedDataset& data, const std::string& who) {
  bool has0 = false, has1 = false;
  for (int y : data.labels) (y ? has1 : has0) = true;
  if (!has0 || !has1)
    throw DataError(who + ": training data must contain both classes");
}

}  // namespace netadv

#endif  // NETADV_CLASSIFIER_HPP

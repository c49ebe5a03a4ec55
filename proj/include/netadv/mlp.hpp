#ifndef NETADV_MLP_HPP
#define NETADV_MLP_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "netadv/classifier.hpp"
#include "netadv/matrix.hpp"
#include "netadv/random.hpp"

namespace netadv {

struct MlpConfig {
  std::vector<std::size_t> hidden_sizes = {512, 256, 64};
  double dropout_rate = 0.01;
  double learning_rate = 1e-3;
  std::size_t epochs = 30;
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;

  void validate() const {
    if (hidden_sizes.empty()) throw DataError("MlpConfig: hidden_sizes empty");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
      throw DataError("MlpConfig: dropout_rate must be in [0, 1)");
    if (epochs == 0 || batch_size == 0)
      throw DataError("MlpConfig: epochs and batch_size must be positive");
  }
};

// Dense rectifier network with a single sigmoid output unit. Dropout
// (inverted scaling) is applied after each hidden layer during training
// only; inference is a pure function of the parameters.
class MlpModel : public Classifier {
 public:
  MlpModel() = default;

  MlpModel(std::size_t input_dim, const MlpConfig& config)
      : config_(config), input_dim_(input_dim) {
    config_.validate();
    Rng rng(config.seed);
    std::size_t in = input_dim;
    for (std::size_t out : config.hidden_sizes) {
      push_layer(in, out, rng);
      in = out;
    }
    push_layer(in, 1, rng);
  }

  std::string kind() const override { return "mlp"; }
  std::size_t input_dim() const override { return input_dim_; }
  bool differentiable() const override { return true; }
  const MlpConfig& config() const { return config_; }
  std::size_t layer_count() const { return weights_.size(); }
  const Matrix& layer_weights(std::size_t l) const { return weights_[l]; }

  double logit(std::span<const double> x) const override {
    check_dim(x);
    std::vector<double> a(x.begin(), x.end());
    std::vector<double> next;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      affine(l, a, next);
      if (l + 1 < weights_.size())
        for (double& v : next) v = v > 0.0 ? v : 0.0;
      a.swap(next);
    }
    return a[0];
  }

  double predict_proba(std::span<const double> x) const override {
    return sigmoid(logit(x));
  }

  std::vector<double> logit_gradient(std::span<const double> x) const override {
    return input_gradient(x, 1.0);
  }

  std::vector<double> loss_gradient(std::span<const double> x, int y) const override {
    double f = logit(x);
    return input_gradient(x, sigmoid(f) - static_cast<double>(y));
  }

  // mini-batch Adam on binary cross-entropy
  void train(const EncodedDataset& data) {
    require_both_classes(data, "train_mlp");
    if (data.schema.dim() != input_dim_)
      throw DataError("train_mlp: schema dimension mismatch");
    Rng rng(mix_seed(config_.seed, 1));

    std::vector<Matrix> m_w, v_w;
    std::vector<std::vector<double>> m_b, v_b;
    for (const auto& w : weights_) {
      m_w.emplace_back(w.rows(), w.cols());
      v_w.emplace_back(w.rows(), w.cols());
    }
    for (const auto& b : biases_) {
      m_b.emplace_back(b.size(), 0.0);
      v_b.emplace_back(b.size(), 0.0);
    }

    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::size_t step = 0;

    std::vector<Matrix> grad_w(weights_.size());
    std::vector<std::vector<double>> grad_b(biases_.size());

    for (std::size_t epoch = 0; epoch < config_.epochs; ++epoch) {
      rng.shuffle(order);
      for (std::size_t start = 0, batch_no = 0; start < order.size();
           start += config_.batch_size, ++batch_no) {
        std::size_t end = std::min(order.size(), start + config_.batch_size);
        double inv_n = 1.0 / static_cast<double>(end - start);

        for (std::size_t l = 0; l < weights_.size(); ++l) {
          grad_w[l] = Matrix(weights_[l].rows(), weights_[l].cols());
          grad_b[l].assign(biases_[l].size(), 0.0);
        }

        double batch_loss = 0.0;
        for (std::size_t k = start; k < end; ++k) {
          batch_loss +=
              accumulate_sample(data.row(order[k]), data.labels[order[k]],
                                inv_n, rng, grad_w, grad_b);
        }
        if (!std::isfinite(batch_loss))
          throw DataError("train_mlp: non-finite loss at epoch " +
                          std::to_string(epoch) + ", batch " +
                          std::to_string(batch_no));

        ++step;
        double corr1 = 1.0 - std::pow(beta1, static_cast<double>(step));
        double corr2 = 1.0 - std::pow(beta2, static_cast<double>(step));
        for (std::size_t l = 0; l < weights_.size(); ++l) {
          auto& w = weights_[l].data();
          auto& g = grad_w[l].data();
          auto& mw = m_w[l].data();
          auto& vw = v_w[l].data();
          for (std::size_t i = 0; i < w.size(); ++i) {
            mw[i] = beta1 * mw[i] + (1.0 - beta1) * g[i];
            vw[i] = beta2 * vw[i] + (1.0 - beta2) * g[i] * g[i];
            w[i] -= config_.learning_rate * (mw[i] / corr1) /
                    (std::sqrt(vw[i] / corr2) + eps);
          }
          for (std::size_t i = 0; i < biases_[l].size(); ++i) {
            m_b[l][i] = beta1 * m_b[l][i] + (1.0 - beta1) * grad_b[l][i];
            v_b[l][i] = beta2 * v_b[l][i] + (1.0 - beta2) * grad_b[l][i] * grad_b[l][i];
            biases_[l][i] -= config_.learning_rate * (m_b[l][i] / corr1) /
                             (std::sqrt(v_b[l][i] / corr2) + eps);
          }
        }
      }
    }
  }

  nlohmann::ordered_json to_json() const override {
    nlohmann::ordered_json doc;
    doc["kind"] = "mlp";
    doc["version"] = 1;
    doc["schema_dim"] = input_dim_;
    doc["hyperparameters"] = {{"hidden_sizes", config_.hidden_sizes},
                              {"dropout_rate", config_.dropout_rate},
                              {"learning_rate", config_.learning_rate},
                              {"epochs", config_.epochs},
                              {"batch_size", config_.batch_size},
                              {"seed", config_.seed}};
    doc["parameters"]["weights"] = nlohmann::ordered_json::array();
    doc["parameters"]["biases"] = nlohmann::ordered_json::array();
    for (const auto& w : weights_) doc["parameters"]["weights"].push_back(w.data());
    for (const auto& b : biases_) doc["parameters"]["biases"].push_back(b);
    return doc;
  }

  static MlpModel from_json(const nlohmann::ordered_json& doc) {
    MlpModel model;
    const auto& hp = doc.at("hyperparameters");
    model.config_.hidden_sizes = hp.at("hidden_sizes").get<std::vector<std::size_t>>();
    model.config_.dropout_rate = hp.at("dropout_rate").get<double>();
    model.config_.learning_rate = hp.at("learning_rate").get<double>();
    model.config_.epochs = hp.at("epochs").get<std::size_t>();
    model.config_.batch_size = hp.at("batch_size").get<std::size_t>();
    model.config_.seed = hp.at("seed").get<std::uint64_t>();
    model.input_dim_ = doc.at("schema_dim").get<std::size_t>();
    std::size_t in = model.input_dim_;
    std::vector<std::size_t> outs = model.config_.hidden_sizes;
    outs.push_back(1);
    const auto& weights = doc.at("parameters").at("weights");
    const auto& biases = doc.at("parameters").at("biases");
    if (weights.size() != outs.size() || biases.size() != outs.size())
      throw DataError("mlp model file: layer count mismatch");
    for (std::size_t l = 0; l < outs.size(); ++l) {
      Matrix w(outs[l], in);
      auto flat = weights.at(l).get<std::vector<double>>();
      if (flat.size() != w.data().size())
        throw DataError("mlp model file: weight shape mismatch");
      w.data() = std::move(flat);
      model.weights_.push_back(std::move(w));
      auto b = biases.at(l).get<std::vector<double>>();
      if (b.size() != outs[l])
        throw DataError("mlp model file: bias shape mismatch");
      model.biases_.push_back(std::move(b));
      in = outs[l];
    }
    return model;
  }

 private:
  void push_layer(std::size_t in, std::size_t out, Rng& rng) {
    Matrix w(out, in);
    double bound = 1.0 / std::sqrt(static_cast<double>(in));
    for (double& v : w.data()) v = rng.next_real(-bound, bound);
    weights_.push_back(std::move(w));
    biases_.emplace_back(out, 0.0);
  }

  void affine(std::size_t l, const std::vector<double>& a,
              std::vector<double>& out) const {
    const Matrix& w = weights_[l];
    out.assign(w.rows(), 0.0);
    for (std::size_t o = 0; o < w.rows(); ++o) {
      const double* row = w.data().data() + o * w.cols();
      double sum = biases_[l][o];
      for (std::size_t i = 0; i < w.cols(); ++i) sum += row[i] * a[i];
      out[o] = sum;
    }
  }

  // backprop of a scalar seed at the logit down to the input, dropout off
  std::vector<double> input_gradient(std::span<const double> x, double seed) const {
    check_dim(x);
    std::vector<std::vector<double>> pre;  // pre-activation per layer
    std::vector<double> a(x.begin(), x.end());
    std::vector<double> next;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      affine(l, a, next);
      pre.push_back(next);
      if (l + 1 < weights_.size())
        for (double& v : next) v = v > 0.0 ? v : 0.0;
      a.swap(next);
    }
    std::vector<double> delta{seed};
    for (std::size_t l = weights_.size(); l-- > 0;) {
      const Matrix& w = weights_[l];
      std::vector<double> prev(w.cols(), 0.0);
      for (std::size_t o = 0; o < w.rows(); ++o) {
        const double* row = w.data().data() + o * w.cols();
        for (std::size_t i = 0; i < w.cols(); ++i) prev[i] += delta[o] * row[i];
      }
      if (l > 0)
        for (std::size_t i = 0; i < prev.size(); ++i)
          if (pre[l - 1][i] <= 0.0) prev[i] = 0.0;
      delta.swap(prev);
    }
    return delta;
  }

  // forward with dropout, backprop into the gradient accumulators;
  // returns the sample's weighted loss contribution
  double accumulate_sample(std::span<const double> x, int y, double weight,
                           Rng& rng, std::vector<Matrix>& grad_w,
                           std::vector<std::vector<double>>& grad_b) const {
    std::size_t layers = weights_.size();
    std::vector<std::vector<double>> act(layers + 1);  // post-activation values
    std::vector<std::vector<double>> pre(layers);
    std::vector<std::vector<double>> mask(layers);
    act[0].assign(x.begin(), x.end());
    double keep = 1.0 - config_.dropout_rate;
    for (std::size_t l = 0; l < layers; ++l) {
      affine(l, act[l], pre[l]);
      act[l + 1] = pre[l];
      if (l + 1 < layers) {
        auto& v = act[l + 1];
        mask[l].assign(v.size(), 1.0);
        for (std::size_t i = 0; i < v.size(); ++i) {
          v[i] = v[i] > 0.0 ? v[i] : 0.0;
          if (config_.dropout_rate > 0.0) {
            mask[l][i] = rng.next_unit() < keep ? 1.0 / keep : 0.0;
            v[i] *= mask[l][i];
          }
        }
      }
    }
    double p = sigmoid(act[layers][0]);
    double loss = bce_loss(p, y) * weight;

    std::vector<double> delta{(p - static_cast<double>(y)) * weight};
    for (std::size_t l = layers; l-- > 0;) {
      const Matrix& w = weights_[l];
      auto& gw = grad_w[l].data();
      for (std::size_t o = 0; o < w.rows(); ++o) {
        double d = delta[o];
        grad_b[l][o] += d;
        double* grow = gw.data() + o * w.cols();
        const double* in = act[l].data();
        for (std::size_t i = 0; i < w.cols(); ++i) grow[i] += d * in[i];
      }
      if (l == 0) break;
      std::vector<double> prev(w.cols(), 0.0);
      for (std::size_t o = 0; o < w.rows(); ++o) {
        const double* row = w.data().data() + o * w.cols();
        double d = delta[o];
        for (std::size_t i = 0; i < w.cols(); ++i) prev[i] += d * row[i];
      }
      for (std::size_t i = 0; i < prev.size(); ++i) {
        prev[i] *= mask[l - 1].empty() ? 1.0 : mask[l - 1][i];
        if (pre[l - 1][i] <= 0.0) prev[i] = 0.0;
      }
      delta.swap(prev);
    }
    return loss;
  }

  std::vector<Matrix> weights_;
  std::vector<std::vector<double>> biases_;
  MlpConfig config_;
  std::size_t input_dim_ = 0;
};

inline MlpModel train_mlp(const EncodedDataset& data, const MlpConfig& config) {
  MlpModel model(data.schema.dim(), config);
  model.train(data);
  return model;
}

// single linear unit with a sigmoid output; the smallest differentiable model
class LinearModel : public Classifier {
 public:
  LinearModel() = default;
  LinearModel(std::vector<double> weights, double bias)
      : weights_(std::move(weights)), bias_(bias) {}

  std::string kind() const override { return "linear"; }
  std::size_t input_dim() const override { return weights_.size(); }
  bool differentiable() const override { return true; }

  double logit(std::span<const double> x) const override {
    check_dim(x);
    double z = bias_;
    for (std::size_t i = 0; i < weights_.size(); ++i) z += weights_[i] * x[i];
    return z;
  }

  double predict_proba(std::span<const double> x) const override {
    return sigmoid(logit(x));
  }

  std::vector<double> logit_gradient(std::span<const double> x) const override {
    check_dim(x);
    return weights_;
  }

  std::vector<double> loss_gradient(std::span<const double> x, int y) const override {
    double scale = sigmoid(logit(x)) - static_cast<double>(y);
    std::vector<double> g = weights_;
    for (double& v : g) v *= scale;
    return g;
  }

  const std::vector<double>& weights() const { return weights_; }
  double bias() const { return bias_; }

  nlohmann::ordered_json to_json() const override {
    nlohmann::ordered_json doc;
    doc["kind"] = "linear";
    doc["version"] = 1;
    doc["schema_dim"] = weights_.size();
    doc["hyperparameters"] = nlohmann::ordered_json::object();
    doc["parameters"] = {{"weights", weights_}, {"bias", bias_}};
    return doc;
  }

  static LinearModel from_json(const nlohmann::ordered_json& doc) {
    LinearModel m;
    m.weights_ = doc.at("parameters").at("weights").get<std::vector<double>>();
    m.bias_ = doc.at("parameters").at("bias").get<double>();
    if (m.weights_.size() != doc.at("schema_dim").get<std::size_t>())
      throw DataError("linear model file: dimension mismatch");
    return m;
  }

 private:
  std::vector<double> weights_;
  double bias_ = 0.0;
};

}  // namespace netadv

#endif  // NETADV_MLP_HPP

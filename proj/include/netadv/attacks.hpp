#ifndef NETADV_ATTACKS_HPP
#define NETADV_ATTACKS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "netadv/classifier.hpp"
#include "netadv/constraints.hpp"
#include "netadv/csv.hpp"
#include "netadv/random.hpp"
#include "netadv/threads.hpp"

namespace netadv {

// ------------------------------------------------------------- configuration

enum class AttackKind { fgsm, bim, pgd, jsma, deepfool, cw, zoo };

inline const char* attack_kind_name(AttackKind k) {
  switch (k) {
    case AttackKind::fgsm: return "FGSM";
    case AttackKind::bim: return "BIM";
    case AttackKind::pgd: return "PGD";
    case AttackKind::jsma: return "JSMA";
    case AttackKind::deepfool: return "DEEPFOOL";
    case AttackKind::cw: return "CW";
    case AttackKind::zoo: return "ZOO";
  }
  return "?";
}

inline AttackKind attack_kind_from(const std::string& name) {
  if (name == "FGSM") return AttackKind::fgsm;
  if (name == "BIM") return AttackKind::bim;
  if (name == "PGD") return AttackKind::pgd;
  if (name == "JSMA") return AttackKind::jsma;
  if (name == "DEEPFOOL") return AttackKind::deepfool;
  if (name == "CW") return AttackKind::cw;
  if (name == "ZOO") return AttackKind::zoo;
  throw DataError("unknown attack kind: " + name);
}

struct AttackConfig {
  AttackKind kind = AttackKind::fgsm;
  double epsilon = 0.6;          // ∞-norm budget (FGSM/BIM/PGD)
  std::size_t steps = 1;
  double step_size = 0.0;        // BIM/PGD per-step size
  double jsma_theta = 0.2;
  double jsma_gamma = 0.15;
  double deepfool_overshoot = 0.02;
  double cw_c = 1.0;
  double cw_kappa = 0.0;
  std::size_t cw_binary_search_steps = 9;
  double cw_lr = 1e-2;
  double zoo_h = 1e-4;
  double zoo_lr = 0.1;
  bool pgd_random_init = true;  // disabled, PGD degenerates to BIM
  std::uint64_t seed = 0;

  // A single-step sign attack only crosses the 0.5 rounding threshold of a
  // discrete feature when epsilon exceeds 0.5, so FGSM gets a budget past
  // that threshold while the iterative attacks stay below it.
  static AttackConfig defaults(AttackKind kind) {
    AttackConfig cfg;
    cfg.kind = kind;
    switch (kind) {
      case AttackKind::fgsm:
        cfg.epsilon = 0.6;
        cfg.steps = 1;
        break;
      case AttackKind::bim:
      case AttackKind::pgd:
        cfg.epsilon = 0.25;
        cfg.steps = 10;
        cfg.step_size = 0.0625;
        break;
      case AttackKind::jsma:
        cfg.steps = 200;
        break;
      case AttackKind::deepfool:
        cfg.steps = 50;
        break;
      case AttackKind::cw:
        cfg.steps = 100;
        break;
      case AttackKind::zoo:
        cfg.steps = 1000;
        break;
    }
    return cfg;
  }

  void validate() const {
    if (epsilon < 0.0) throw DataError("AttackConfig: epsilon must be >= 0");
    if (steps < 1) throw DataError("AttackConfig: steps must be >= 1");
    if (jsma_gamma <= 0.0 || jsma_gamma > 1.0)
      throw DataError("AttackConfig: jsma_gamma must be in (0, 1]");
  }
};

// --------------------------------------------------------------- primitives

inline double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

inline void clip_box(std::vector<double>& x) {
  for (double& v : x) v = std::clamp(v, 0.0, 1.0);
}

inline void clip_ball(std::vector<double>& x, std::span<const double> center,
                      double radius) {
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = std::clamp(x[i], center[i] - radius, center[i] + radius);
}

// central finite difference of an arbitrary scalar function along coordinate i
template <typename F>
double central_difference(F&& f, std::vector<double> x, std::size_t i, double h) {
  x[i] += h;
  double up = f(x);
  x[i] -= 2.0 * h;
  double down = f(x);
  return (up - down) / (2.0 * h);
}

// ------------------------------------------------------------------- attacks

// All attacks perturb away from the malicious class (y = 1) and keep every
// iterate inside the [0,1] feature box.

inline std::vector<double> fgsm(const Classifier& model, std::span<const double> x,
                                const AttackConfig& cfg) {
  std::vector<double> g = model.loss_gradient(x, 1);
  std::vector<double> adv(x.begin(), x.end());
  for (std::size_t i = 0; i < adv.size(); ++i) adv[i] += cfg.epsilon * sign_of(g[i]);
  clip_box(adv);
  return adv;
}

inline std::vector<double> bim(const Classifier& model, std::span<const double> x,
                               const AttackConfig& cfg) {
  std::vector<double> adv(x.begin(), x.end());
  for (std::size_t t = 0; t < cfg.steps; ++t) {
    std::vector<double> g = model.loss_gradient(adv, 1);
    for (std::size_t i = 0; i < adv.size(); ++i)
      adv[i] += cfg.step_size * sign_of(g[i]);
    clip_box(adv);
    clip_ball(adv, x, cfg.epsilon);
  }
  return adv;
}

inline std::vector<double> pgd(const Classifier& model, std::span<const double> x,
                               const AttackConfig& cfg) {
  Rng rng(mix_seed(cfg.seed, 0x96d));
  std::vector<double> adv(x.begin(), x.end());
  if (cfg.pgd_random_init) {
    for (double& v : adv) v += rng.next_real(-cfg.epsilon, cfg.epsilon);
    clip_box(adv);
  }
  for (std::size_t t = 0; t < cfg.steps; ++t) {
    std::vector<double> g = model.loss_gradient(adv, 1);
    for (std::size_t i = 0; i < adv.size(); ++i)
      adv[i] += cfg.step_size * sign_of(g[i]);
    clip_box(adv);
    clip_ball(adv, x, cfg.epsilon);
  }
  return adv;
}

// Binary-case saliency: with a single logit the saliency of feature i reduces
// to |df/dx_i|, pushed in the direction that lowers f. Saturated features are
// skipped; at most ceil(gamma * d) distinct features are touched.
inline std::vector<double> jsma(const Classifier& model, std::span<const double> x,
                                const AttackConfig& cfg) {
  const std::size_t d = x.size();
  const std::size_t budget = static_cast<std::size_t>(
      std::ceil(cfg.jsma_gamma * static_cast<double>(d)));
  const std::size_t max_iters =
      budget * (static_cast<std::size_t>(std::ceil(1.0 / cfg.jsma_theta)) + 1) * 2;
  std::vector<double> adv(x.begin(), x.end());
  std::set<std::size_t> modified;
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    if (model.predict(adv) == 0) break;
    std::vector<double> g = model.logit_gradient(adv);
    long best = -1;
    double best_mag = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      if (g[i] == 0.0) continue;
      double dir = -sign_of(g[i]);
      if (dir < 0.0 && adv[i] <= 0.0) continue;  // saturated
      if (dir > 0.0 && adv[i] >= 1.0) continue;
      if (!modified.count(i) && modified.size() >= budget) continue;
      double mag = std::fabs(g[i]);
      if (mag > best_mag) {
        best_mag = mag;
        best = static_cast<long>(i);
      }
    }
    if (best < 0) break;
    std::size_t i = static_cast<std::size_t>(best);
    adv[i] = std::clamp(adv[i] - sign_of(g[i]) * cfg.jsma_theta, 0.0, 1.0);
    modified.insert(i);
  }
  return adv;
}

// Binary DeepFool: repeated first-order steps onto the f(x) = 0 boundary,
// then a small overshoot past it.
inline std::vector<double> deepfool(const Classifier& model,
                                    std::span<const double> x,
                                    const AttackConfig& cfg) {
  std::vector<double> orig(x.begin(), x.end());
  if (model.logit(orig) <= 0.0) return orig;  // already benign
  std::vector<double> cur = orig;
  for (std::size_t t = 0; t < cfg.steps; ++t) {
    double f = model.logit(cur);
    if (f <= 0.0) break;
    std::vector<double> g = model.logit_gradient(cur);
    double norm2 = 0.0;
    for (double v : g) norm2 += v * v;
    if (std::sqrt(norm2) < 1e-12) return orig;  // flat gradient, give up
    double scale = f / norm2;
    for (std::size_t i = 0; i < cur.size(); ++i) cur[i] -= scale * g[i];
  }
  std::vector<double> adv(orig.size());
  for (std::size_t i = 0; i < adv.size(); ++i)
    adv[i] = orig[i] + (1.0 + cfg.deepfool_overshoot) * (cur[i] - orig[i]);
  clip_box(adv);
  return adv;
}

// Carlini-Wagner L2: optimize in tanh space (the box constraint holds by
// construction), with an outer binary search over the trade-off constant c.
inline std::vector<double> cw(const Classifier& model, std::span<const double> x,
                              const AttackConfig& cfg) {
  const std::size_t d = x.size();
  const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;

  std::vector<double> w_init(d);
  for (std::size_t i = 0; i < d; ++i) {
    double xi = std::clamp(x[i], 1e-6, 1.0 - 1e-6);
    w_init[i] = std::atanh(2.0 * xi - 1.0);
  }

  auto l2_to_x = [&](const std::vector<double>& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      double diff = p[i] - x[i];
      s += diff * diff;
    }
    return s;
  };

  std::vector<double> best;
  double best_l2 = std::numeric_limits<double>::infinity();
  std::vector<double> last;

  double lower = 0.0;
  double upper = std::numeric_limits<double>::infinity();
  double c = cfg.cw_c;

  std::vector<double> w(d), m(d), v(d), point(d), grad(d);
  for (std::size_t round = 0; round < cfg.cw_binary_search_steps; ++round) {
    w = w_init;
    std::fill(m.begin(), m.end(), 0.0);
    std::fill(v.begin(), v.end(), 0.0);
    bool round_success = false;
    for (std::size_t step = 1; step <= cfg.steps; ++step) {
      for (std::size_t i = 0; i < d; ++i)
        point[i] = (std::tanh(w[i]) + 1.0) / 2.0;
      double f = model.logit(point);
      if (f < -cfg.cw_kappa) {
        round_success = true;
        double l2 = l2_to_x(point);
        if (l2 < best_l2) {
          best_l2 = l2;
          best = point;
        }
      }
      bool attack_term = f + cfg.cw_kappa > 0.0;
      std::vector<double> fg;
      if (attack_term && c > 0.0) fg = model.logit_gradient(point);
      for (std::size_t i = 0; i < d; ++i) {
        grad[i] = 2.0 * (point[i] - x[i]);
        if (attack_term && c > 0.0) grad[i] += c * fg[i];
        double th = std::tanh(w[i]);
        grad[i] *= (1.0 - th * th) / 2.0;
      }
      double corr1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      double corr2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      for (std::size_t i = 0; i < d; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i];
        w[i] -= cfg.cw_lr * (m[i] / corr1) / (std::sqrt(v[i] / corr2) + adam_eps);
      }
    }
    last = point;
    if (round_success) {
      upper = c;
      c = (lower + upper) / 2.0;
    } else {
      lower = c;
      c = std::isinf(upper) ? c * 10.0 : (lower + upper) / 2.0;
    }
  }
  return best.empty() ? last : best;
}

// Black-box coordinate attack: ascend the cross-entropy against the malicious
// label using symmetric-difference gradient estimates and per-coordinate Adam
// moments. Only predict_proba is ever called.
inline std::vector<double> zoo(const Classifier& model, std::span<const double> x,
                               const AttackConfig& cfg) {
  const std::size_t d = x.size();
  Rng rng(mix_seed(cfg.seed, 0x200));
  std::vector<double> adv(x.begin(), x.end());
  std::vector<double> m(d, 0.0), v(d, 0.0);
  std::vector<std::size_t> t(d, 0);
  const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;

  auto loss_at = [&](std::vector<double>& p) {
    return bce_loss(model.predict_proba(p), 1);
  };

  for (std::size_t iter = 0; iter < cfg.steps; ++iter) {
    std::size_t i = static_cast<std::size_t>(rng.next_int(0, static_cast<long>(d) - 1));
    double keep = adv[i];
    adv[i] = keep + cfg.zoo_h;
    double up = loss_at(adv);
    adv[i] = keep - cfg.zoo_h;
    double down = loss_at(adv);
    adv[i] = keep;
    double g = (up - down) / (2.0 * cfg.zoo_h);

    ++t[i];
    m[i] = beta1 * m[i] + (1.0 - beta1) * g;
    v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
    double corr1 = 1.0 - std::pow(beta1, static_cast<double>(t[i]));
    double corr2 = 1.0 - std::pow(beta2, static_cast<double>(t[i]));
    adv[i] = std::clamp(
        adv[i] + cfg.zoo_lr * (m[i] / corr1) / (std::sqrt(v[i] / corr2) + adam_eps),
        0.0, 1.0);
  }
  return adv;
}

inline std::vector<double> run_attack(const Classifier& model,
                                      std::span<const double> x,
                                      const AttackConfig& cfg) {
  cfg.validate();
  switch (cfg.kind) {
    case AttackKind::fgsm: return fgsm(model, x, cfg);
    case AttackKind::bim: return bim(model, x, cfg);
    case AttackKind::pgd: return pgd(model, x, cfg);
    case AttackKind::jsma: return jsma(model, x, cfg);
    case AttackKind::deepfool: return deepfool(model, x, cfg);
    case AttackKind::cw: return cw(model, x, cfg);
    case AttackKind::zoo: return zoo(model, x, cfg);
  }
  throw InternalError("run_attack: unhandled attack kind");
}

// --------------------------------------------------------------------- batch

struct AdversarialBatch {
  AttackConfig config;
  std::string surrogate_id;
  Matrix originals;
  Matrix adversarials;
  std::vector<std::uint8_t> success;      // surrogate predicts benign
  std::size_t excluded_count = 0;         // inputs the surrogate already missed
  std::vector<ValidityVerdict> validity;  // filled by filter_batch

  std::string attack_name() const { return attack_kind_name(config.kind); }
  std::size_t size() const { return adversarials.rows(); }
};

// One batch per config. Only samples the surrogate classifies as malicious
// are attacked; the rest are counted as excluded. Per-sample seeds derive
// from (config seed, sample index), so the fan-out order cannot change the
// output.
inline std::vector<AdversarialBatch> run_attack_suite(
    const Classifier& model, const EncodedDataset& samples,
    const std::vector<AttackConfig>& cfgs, const std::string& surrogate_id = "") {
  if (samples.size() == 0)
    throw DataError("run_attack_suite: no samples to attack");
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (model.predict(samples.row(i)) == 1) eligible.push_back(i);
  std::size_t excluded = samples.size() - eligible.size();

  std::vector<AdversarialBatch> batches;
  for (const AttackConfig& cfg : cfgs) {
    cfg.validate();
    AdversarialBatch batch;
    batch.config = cfg;
    batch.surrogate_id = surrogate_id;
    batch.excluded_count = excluded;
    batch.originals = Matrix(eligible.size(), samples.schema.dim());
    batch.adversarials = Matrix(eligible.size(), samples.schema.dim());
    batch.success.assign(eligible.size(), 0);
    parallel_for(eligible.size(), [&](std::size_t k) {
      auto x = samples.row(eligible[k]);
      AttackConfig sample_cfg = cfg;
      sample_cfg.seed = mix_seed(cfg.seed, k);
      std::vector<double> adv = run_attack(model, x, sample_cfg);
      std::copy(x.begin(), x.end(), batch.originals.row(k).begin());
      std::copy(adv.begin(), adv.end(), batch.adversarials.row(k).begin());
      batch.success[k] = model.predict(adv) == 0 ? 1 : 0;
    });
    batches.push_back(std::move(batch));
  }
  return batches;
}

// ------------------------------------------------------------- batch filter

struct FilterBatchResult {
  AdversarialBatch valid;
  AdversarialBatch invalid;
  FilterStats stats;
};

// Algorithm-1 style filter: project the discrete features of every sample,
// check the categorical and numerical dependencies, and split the batch.
// Samples in the valid part carry the projected vectors.
inline FilterBatchResult filter_batch(const AdversarialBatch& batch,
                                      const ConstraintSet& cs,
                                      const FeatureSchema& schema) {
  RowFilterOutcome rows = filter_rows(batch.adversarials, cs, schema);
  FilterBatchResult result;
  result.stats = rows.stats;
  for (AdversarialBatch* part : {&result.valid, &result.invalid}) {
    part->config = batch.config;
    part->surrogate_id = batch.surrogate_id;
    part->excluded_count = batch.excluded_count;
    part->originals = Matrix(0, batch.originals.cols());
    part->adversarials = Matrix(0, batch.adversarials.cols());
  }
  for (std::size_t i = 0; i < batch.size(); ++i) {
    AdversarialBatch& part = rows.verdicts[i].valid ? result.valid : result.invalid;
    part.originals.append_row(batch.originals.row(i));
    part.adversarials.append_row(rows.projected.row(i));
    part.success.push_back(i < batch.success.size() ? batch.success[i] : 0);
    part.validity.push_back(rows.verdicts[i]);
  }
  return result;
}

// -------------------------------------------------------------- config files

inline ordered_json attack_config_to_json(const AttackConfig& cfg) {
  ordered_json doc;
  doc["attack"] = attack_kind_name(cfg.kind);
  doc["epsilon"] = cfg.epsilon;
  doc["steps"] = cfg.steps;
  doc["step_size"] = cfg.step_size;
  doc["jsma_theta"] = cfg.jsma_theta;
  doc["jsma_gamma"] = cfg.jsma_gamma;
  doc["deepfool_overshoot"] = cfg.deepfool_overshoot;
  doc["cw_c"] = cfg.cw_c;
  doc["cw_kappa"] = cfg.cw_kappa;
  doc["cw_binary_search_steps"] = cfg.cw_binary_search_steps;
  doc["cw_lr"] = cfg.cw_lr;
  doc["zoo_h"] = cfg.zoo_h;
  doc["zoo_lr"] = cfg.zoo_lr;
  doc["pgd_random_init"] = cfg.pgd_random_init;
  doc["seed"] = cfg.seed;
  return doc;
}

// omitted fields take the per-kind defaults
inline AttackConfig attack_config_from_json(const ordered_json& doc) {
  AttackConfig cfg = AttackConfig::defaults(
      attack_kind_from(doc.at("attack").get<std::string>()));
  auto opt = [&](const char* key, auto& slot) {
    if (doc.contains(key)) slot = doc.at(key).get<std::decay_t<decltype(slot)>>();
  };
  opt("epsilon", cfg.epsilon);
  opt("steps", cfg.steps);
  opt("step_size", cfg.step_size);
  opt("jsma_theta", cfg.jsma_theta);
  opt("jsma_gamma", cfg.jsma_gamma);
  opt("deepfool_overshoot", cfg.deepfool_overshoot);
  opt("cw_c", cfg.cw_c);
  opt("cw_kappa", cfg.cw_kappa);
  opt("cw_binary_search_steps", cfg.cw_binary_search_steps);
  opt("cw_lr", cfg.cw_lr);
  opt("zoo_h", cfg.zoo_h);
  opt("zoo_lr", cfg.zoo_lr);
  opt("pgd_random_init", cfg.pgd_random_init);
  opt("seed", cfg.seed);
  cfg.validate();
  return cfg;
}

inline std::vector<AttackConfig> default_attack_suite(std::uint64_t seed) {
  std::vector<AttackConfig> cfgs;
  for (AttackKind kind : {AttackKind::jsma, AttackKind::fgsm, AttackKind::deepfool,
                          AttackKind::cw, AttackKind::pgd, AttackKind::bim,
                          AttackKind::zoo}) {
    AttackConfig cfg = AttackConfig::defaults(kind);
    cfg.seed = seed;
    cfgs.push_back(cfg);
  }
  return cfgs;
}

inline std::vector<AttackConfig> load_attack_configs(const std::string& path) {
  ordered_json doc = load_json_file(path);
  if (!doc.is_array()) throw DataError(path + ": expected a JSON array of configs");
  std::vector<AttackConfig> cfgs;
  for (const auto& entry : doc) cfgs.push_back(attack_config_from_json(entry));
  if (cfgs.empty()) throw DataError(path + ": no attack configs");
  return cfgs;
}

// ------------------------------------------------------------- batch on disk

inline void save_matrix_csv(const Matrix& m, const std::string& path) {
  std::ostringstream out;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      out << format_double(row[c]);
    }
    out << '\n';
  }
  write_text_file(path, out.str());
}

inline Matrix load_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open matrix file: " + path);
  Matrix m;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    std::vector<double> row(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c)
      row[c] = parse_double(fields[c], path + ": line " + std::to_string(line_no));
    m.append_row(row);
  }
  return m;
}

inline void save_batch(const AdversarialBatch& batch, const std::string& dir) {
  std::filesystem::create_directories(dir);
  save_matrix_csv(batch.originals, dir + "/originals.csv");
  save_matrix_csv(batch.adversarials, dir + "/adversarials.csv");
  ordered_json meta;
  meta["config"] = attack_config_to_json(batch.config);
  meta["surrogate_id"] = batch.surrogate_id;
  meta["excluded_count"] = batch.excluded_count;
  meta["success"] = batch.success;
  save_json_file(dir + "/meta.json", meta);
}

inline AdversarialBatch load_batch(const std::string& dir) {
  AdversarialBatch batch;
  batch.originals = load_matrix_csv(dir + "/originals.csv");
  batch.adversarials = load_matrix_csv(dir + "/adversarials.csv");
  ordered_json meta = load_json_file(dir + "/meta.json");
  batch.config = attack_config_from_json(meta.at("config"));
  batch.surrogate_id = meta.at("surrogate_id").get<std::string>();
  batch.excluded_count = meta.at("excluded_count").get<std::size_t>();
  batch.success = meta.at("success").get<std::vector<std::uint8_t>>();
  if (batch.originals.rows() != batch.adversarials.rows() ||
      batch.success.size() != batch.adversarials.rows())
    throw DataError(dir + ": inconsistent batch files");
  return batch;
}

}  // namespace netadv

#endif  // NETADV_ATTACKS_HPP

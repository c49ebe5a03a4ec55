#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "netadv/attacks.hpp"
#include "netadv/mlp.hpp"
#include "netadv/classical.hpp"
#include "support/fixtures.hpp"

using namespace netadv;
using netadv::testing::make_synth_fixture;

namespace {

// counts gradient-capability invocations; used to prove black-box purity
class CountingClassifier : public Classifier {
 public:
  explicit CountingClassifier(const Classifier& inner) : inner_(inner) {}

  std::string kind() const override { return inner_.kind(); }
  std::size_t input_dim() const override { return inner_.input_dim(); }
  bool differentiable() const override { return inner_.differentiable(); }

  double predict_proba(std::span<const double> x) const override {
    ++proba_calls;
    return inner_.predict_proba(x);
  }
  std::vector<double> loss_gradient(std::span<const double> x, int y) const override {
    ++gradient_calls;
    return inner_.loss_gradient(x, y);
  }
  std::vector<double> logit_gradient(std::span<const double> x) const override {
    ++gradient_calls;
    return inner_.logit_gradient(x);
  }
  double logit(std::span<const double> x) const override {
    ++gradient_calls;
    return inner_.logit(x);
  }
  nlohmann::ordered_json to_json() const override { return inner_.to_json(); }

  mutable std::size_t proba_calls = 0;
  mutable std::size_t gradient_calls = 0;

 private:
  const Classifier& inner_;
};

MlpModel random_mlp(std::size_t dim, std::uint64_t seed) {
  MlpConfig cfg;
  cfg.hidden_sizes = {8, 4};
  cfg.seed = seed;
  return MlpModel(dim, cfg);
}

double linf(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

double l2(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

std::vector<double> random_box_point(Rng& rng, std::size_t d) {
  std::vector<double> x(d);
  for (double& v : x) v = rng.next_unit();
  return x;
}

}  // namespace

TEST_CASE("fgsm") {
  LinearModel unit({2.0}, 0.0);
  AttackConfig cfg = AttackConfig::defaults(AttackKind::fgsm);

  SUBCASE("zero budget leaves the input unchanged") {
    cfg.epsilon = 0.0;
    std::vector<double> x{0.5};
    CHECK(fgsm(unit, x, cfg) == x);
  }

  SUBCASE("1-D linear example moves against the loss gradient sign") {
    cfg.epsilon = 0.1;
    std::vector<double> x{0.5};
    // dL/dx = (sigmoid(1) - 1) * 2 < 0, so the step is -epsilon
    auto adv = fgsm(unit, x, cfg);
    CHECK(adv[0] == doctest::Approx(0.4).epsilon(1e-12));
  }

  SUBCASE("sign(0) = 0: dead coordinates stay put") {
    LinearModel dead({0.0, 3.0}, 0.0);
    cfg.epsilon = 0.2;
    std::vector<double> x{0.5, 0.9};
    auto adv = fgsm(dead, x, cfg);
    CHECK(adv[0] == 0.5);
    CHECK(adv[1] == doctest::Approx(0.7));
  }

  SUBCASE("infinity-norm budget holds over random inputs") {
    MlpModel mlp = random_mlp(6, 2);
    Rng rng(3);
    cfg.epsilon = 0.3;
    for (int i = 0; i < 100; ++i) {
      auto x = random_box_point(rng, 6);
      auto adv = fgsm(mlp, x, cfg);
      CHECK(linf(adv, x) <= cfg.epsilon + 1e-9);
      for (double v : adv) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
    }
  }
}

TEST_CASE("bim") {
  SUBCASE("one step with alpha = epsilon reduces exactly to fgsm") {
    MlpModel mlp = random_mlp(5, 7);
    Rng rng(11);
    AttackConfig f = AttackConfig::defaults(AttackKind::fgsm);
    f.epsilon = 0.25;
    AttackConfig b = AttackConfig::defaults(AttackKind::bim);
    b.epsilon = 0.25;
    b.step_size = 0.25;
    b.steps = 1;
    for (int i = 0; i < 50; ++i) {
      auto x = random_box_point(rng, 5);
      CHECK(fgsm(mlp, x, f) == bim(mlp, x, b));
    }
  }

  SUBCASE("1-D linear example descends monotonically to the ball edge") {
    LinearModel unit({2.0}, 0.0);
    AttackConfig cfg = AttackConfig::defaults(AttackKind::bim);
    cfg.epsilon = 0.1;
    cfg.step_size = 0.02;
    cfg.steps = 5;
    std::vector<double> x{0.5};
    auto adv = bim(unit, x, cfg);
    CHECK(adv[0] == doctest::Approx(0.4).epsilon(1e-12));
  }

  SUBCASE("iterates respect both the ball and the box") {
    MlpModel mlp = random_mlp(6, 13);
    Rng rng(17);
    AttackConfig cfg = AttackConfig::defaults(AttackKind::bim);
    for (int i = 0; i < 50; ++i) {
      auto x = random_box_point(rng, 6);
      auto adv = bim(mlp, x, cfg);
      CHECK(linf(adv, x) <= cfg.epsilon + 1e-9);
      for (double v : adv) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
    }
  }
}

TEST_CASE("pgd") {
  MlpModel mlp = random_mlp(6, 19);
  AttackConfig cfg = AttackConfig::defaults(AttackKind::pgd);
  cfg.seed = 5;
  Rng rng(23);

  SUBCASE("zero budget collapses to the input") {
    cfg.epsilon = 0.0;
    cfg.step_size = 0.0;
    auto x = random_box_point(rng, 6);
    CHECK(pgd(mlp, x, cfg) == x);
  }

  SUBCASE("fixed seed gives identical output; budget holds") {
    for (int i = 0; i < 30; ++i) {
      auto x = random_box_point(rng, 6);
      auto a = pgd(mlp, x, cfg);
      auto b = pgd(mlp, x, cfg);
      CHECK(a == b);
      CHECK(linf(a, x) <= cfg.epsilon + 1e-9);
    }
  }

  SUBCASE("different seeds explore different starts") {
    auto x = random_box_point(rng, 6);
    AttackConfig other = cfg;
    other.seed = 6;
    CHECK(pgd(mlp, x, cfg) != pgd(mlp, x, other));
  }

  SUBCASE("with the random start disabled, pgd equals bim exactly") {
    AttackConfig no_init = cfg;
    no_init.pgd_random_init = false;
    AttackConfig b = AttackConfig::defaults(AttackKind::bim);
    for (int i = 0; i < 30; ++i) {
      auto x = random_box_point(rng, 6);
      CHECK(pgd(mlp, x, no_init) == bim(mlp, x, b));
    }
  }
}

TEST_CASE("jsma") {
  AttackConfig cfg = AttackConfig::defaults(AttackKind::jsma);

  SUBCASE("zero gradient everywhere returns the input unchanged") {
    LinearModel flat({0.0, 0.0}, 2.0);
    std::vector<double> x{0.5, 0.5};
    CHECK(jsma(flat, x, cfg) == x);
  }

  SUBCASE("highest-saliency feature is modified first and gamma caps the set") {
    LinearModel unit({5.0, 0.1}, 0.0);
    std::vector<double> x{0.8, 0.8};
    cfg.jsma_gamma = 0.5;  // budget = 1 of 2 features
    auto adv = jsma(unit, x, cfg);
    CHECK(adv[1] == 0.8);   // never touched
    CHECK(adv[0] < 0.8);    // pushed down toward benign
  }

  SUBCASE("number of modified features never exceeds ceil(gamma * d)") {
    MlpModel mlp = random_mlp(10, 29);
    Rng rng(31);
    cfg = AttackConfig::defaults(AttackKind::jsma);
    std::size_t budget = static_cast<std::size_t>(std::ceil(cfg.jsma_gamma * 10));
    for (int i = 0; i < 50; ++i) {
      auto x = random_box_point(rng, 10);
      auto adv = jsma(mlp, x, cfg);
      std::size_t modified = 0;
      for (std::size_t c = 0; c < x.size(); ++c) modified += adv[c] != x[c] ? 1 : 0;
      CHECK(modified <= budget);
    }
  }
}

TEST_CASE("deepfool") {
  AttackConfig cfg = AttackConfig::defaults(AttackKind::deepfool);

  SUBCASE("already-benign input returns unchanged") {
    LinearModel unit({1.0}, -2.0);
    std::vector<double> x{0.5};
    CHECK(deepfool(unit, x, cfg) == x);
  }

  SUBCASE("flat gradient aborts and returns the input") {
    LinearModel flat({0.0}, 1.0);
    std::vector<double> x{0.5};
    CHECK(deepfool(flat, x, cfg) == x);
  }

  SUBCASE("closed form on random linear models") {
    Rng rng(37);
    for (int trial = 0; trial < 20; ++trial) {
      std::size_t d = 4 + static_cast<std::size_t>(rng.next_int(0, 4));
      std::vector<double> w(d);
      double norm2 = 0.0;
      for (double& v : w) {
        v = rng.next_real(-1.0, 1.0);
        norm2 += v * v;
      }
      if (norm2 < 1e-3) continue;
      std::vector<double> x(d, 0.5);
      double target_f = 0.05 * std::sqrt(norm2);
      double b = target_f;
      for (std::size_t i = 0; i < d; ++i) b -= w[i] * x[i];
      LinearModel model(w, b);
      auto adv = deepfool(model, x, cfg);
      for (std::size_t i = 0; i < d; ++i) {
        double expected =
            x[i] - (1.0 + cfg.deepfool_overshoot) * target_f * w[i] / norm2;
        CHECK(adv[i] == doctest::Approx(expected).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("cw") {
  AttackConfig cfg = AttackConfig::defaults(AttackKind::cw);

  SUBCASE("c = 0 keeps the point near the input and fails on a confident model") {
    LinearModel confident({4.0}, 0.0);
    cfg.cw_c = 0.0;
    cfg.cw_binary_search_steps = 2;
    std::vector<double> x{0.9};
    auto adv = cw(confident, x, cfg);
    CHECK(std::fabs(adv[0] - 0.9) < 0.05);
    CHECK(confident.predict(adv) == 1);  // not fooled
  }

  SUBCASE("output lies strictly inside the open box") {
    MlpModel mlp = random_mlp(5, 41);
    Rng rng(43);
    cfg = AttackConfig::defaults(AttackKind::cw);
    cfg.steps = 30;
    cfg.cw_binary_search_steps = 3;
    for (int i = 0; i < 10; ++i) {
      auto x = random_box_point(rng, 5);
      for (double v : cw(mlp, x, cfg)) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
      }
    }
  }

  SUBCASE("distortion is smaller than FGSM at equal success on a linear model") {
    // w = 1^10, b = -4; x = 0.45^10 has margin 0.5 above the boundary
    std::vector<double> w(10, 1.0);
    LinearModel model(w, -4.0);
    std::vector<double> x(10, 0.45);
    REQUIRE(model.predict(x) == 1);

    AttackConfig f = AttackConfig::defaults(AttackKind::fgsm);
    f.epsilon = 0.1;
    auto fgsm_adv = fgsm(model, x, f);
    REQUIRE(model.predict(fgsm_adv) == 0);

    auto cw_adv = cw(model, x, AttackConfig::defaults(AttackKind::cw));
    REQUIRE(model.predict(cw_adv) == 0);
    CHECK(l2(cw_adv, x) < l2(fgsm_adv, x));
  }
}

TEST_CASE("zoo") {
  SUBCASE("central difference estimator on f(x) = x^2") {
    auto square = [](const std::vector<double>& v) { return v[0] * v[0]; };
    double g = central_difference(square, std::vector<double>{1.0}, 0, 1e-4);
    CHECK(g == doctest::Approx(2.0).epsilon(1e-6));
  }

  SUBCASE("black-box purity: completes on a KNN with zero gradient calls") {
    auto f = make_synth_fixture(120, 61);
    KnnClassifier knn = train_knn(f.data, 3);
    CountingClassifier counted(knn);
    AttackConfig cfg = AttackConfig::defaults(AttackKind::zoo);
    cfg.steps = 60;
    cfg.seed = 1;
    auto adv = zoo(counted, f.data.row(0), cfg);
    CHECK(adv.size() == f.schema.dim());
    CHECK(counted.gradient_calls == 0);
    CHECK(counted.proba_calls > 0);
  }

  SUBCASE("coordinate estimates agree with backprop on a smooth model") {
    MlpModel mlp = random_mlp(8, 47);
    Rng rng(53);
    auto x = random_box_point(rng, 8);
    auto grad = mlp.loss_gradient(x, 1);
    auto loss = [&](const std::vector<double>& v) {
      return bce_loss(mlp.predict_proba(v), 1);
    };
    for (std::size_t i = 0; i < 8; ++i) {
      double est = central_difference(loss, x, i, 1e-4);
      double denom = std::max(std::fabs(grad[i]), 1e-6);
      CHECK(std::fabs(est - grad[i]) / denom < 1e-3);
    }
  }

  SUBCASE("deterministic for a fixed seed") {
    auto f = make_synth_fixture(80, 67);
    KnnClassifier knn = train_knn(f.data, 3);
    AttackConfig cfg = AttackConfig::defaults(AttackKind::zoo);
    cfg.steps = 40;
    cfg.seed = 9;
    auto a = zoo(knn, f.data.row(1), cfg);
    auto b = zoo(knn, f.data.row(1), cfg);
    CHECK(a == b);
  }
}

TEST_CASE("run_attack_suite") {
  auto f = make_synth_fixture(200, 71);
  MlpConfig small;
  small.hidden_sizes = {16, 8};
  small.epochs = 8;
  small.seed = 3;
  MlpModel mlp = train_mlp(f.data, small);
  auto [benign, malicious] = split_traffic(f.data);
  REQUIRE(malicious.size() > 10);

  SUBCASE("empty sample set is an error") {
    EncodedDataset empty;
    empty.schema = f.schema;
    empty.features = Matrix(0, f.schema.dim());
    CHECK_THROWS_AS(run_attack_suite(mlp, empty, default_attack_suite(1)), DataError);
  }

  SUBCASE("one batch per config, each no larger than the sample count") {
    auto cfgs = default_attack_suite(1);
    // shrink the slow ones for test speed
    for (auto& c : cfgs) {
      if (c.kind == AttackKind::cw) { c.steps = 10; c.cw_binary_search_steps = 2; }
      if (c.kind == AttackKind::zoo) c.steps = 30;
    }
    auto batches = run_attack_suite(mlp, malicious, cfgs, "mlp-test");
    REQUIRE(batches.size() == 7);
    for (const auto& b : batches) {
      CHECK(b.size() <= malicious.size());
      CHECK(b.originals.rows() == b.adversarials.rows());
      CHECK(b.success.size() == b.size());
      CHECK(b.surrogate_id == "mlp-test");
    }
  }

  SUBCASE("samples the surrogate already misclassifies are excluded and counted") {
    std::size_t eligible = 0;
    for (std::size_t i = 0; i < malicious.size(); ++i)
      eligible += mlp.predict(malicious.row(i)) == 1 ? 1 : 0;
    AttackConfig cfg = AttackConfig::defaults(AttackKind::fgsm);
    auto batches = run_attack_suite(mlp, malicious, {cfg});
    CHECK(batches[0].size() == eligible);
    CHECK(batches[0].excluded_count == malicious.size() - eligible);
  }

  SUBCASE("reproducible bit for bit under a fixed seed") {
    AttackConfig cfg = AttackConfig::defaults(AttackKind::pgd);
    cfg.seed = 77;
    auto a = run_attack_suite(mlp, malicious, {cfg});
    auto b = run_attack_suite(mlp, malicious, {cfg});
    CHECK(a[0].adversarials == b[0].adversarials);
    CHECK(a[0].success == b[0].success);
  }
}

TEST_CASE("batch directory round-trip") {
  auto f = make_synth_fixture(60, 73);
  AdversarialBatch batch;
  batch.config = AttackConfig::defaults(AttackKind::bim);
  batch.config.seed = 12;
  batch.surrogate_id = "mlp:abc";
  batch.excluded_count = 4;
  batch.originals = Matrix(0, f.schema.dim());
  batch.adversarials = Matrix(0, f.schema.dim());
  Rng rng(79);
  for (std::size_t i = 0; i < 10; ++i) {
    batch.originals.append_row(f.data.row(i));
    std::vector<double> adv(f.data.row(i).begin(), f.data.row(i).end());
    for (double& v : adv) v = std::clamp(v + rng.next_real(-0.2, 0.2), 0.0, 1.0);
    batch.adversarials.append_row(adv);
    batch.success.push_back(i % 2);
  }

  std::string dir =
      (std::filesystem::temp_directory_path() / "netadv_batch_test").string();
  save_batch(batch, dir);
  CHECK(std::filesystem::exists(dir + "/originals.csv"));
  CHECK(std::filesystem::exists(dir + "/adversarials.csv"));
  CHECK(std::filesystem::exists(dir + "/meta.json"));

  AdversarialBatch loaded = load_batch(dir);
  CHECK(loaded.originals == batch.originals);
  CHECK(loaded.adversarials == batch.adversarials);
  CHECK(loaded.success == batch.success);
  CHECK(loaded.excluded_count == batch.excluded_count);
  CHECK(loaded.surrogate_id == batch.surrogate_id);
  CHECK(loaded.config.kind == batch.config.kind);
  CHECK(loaded.config.seed == batch.config.seed);

  std::filesystem::remove_all(dir);
}

TEST_CASE("attack config files materialize defaults") {
  AttackConfig cfg = attack_config_from_json(ordered_json{{"attack", "BIM"}});
  CHECK(cfg.kind == AttackKind::bim);
  CHECK(cfg.epsilon == 0.25);
  CHECK(cfg.steps == 10);

  AttackConfig tuned = attack_config_from_json(
      ordered_json{{"attack", "BIM"}, {"epsilon", 0.5}, {"steps", 3}});
  CHECK(tuned.epsilon == 0.5);
  CHECK(tuned.steps == 3);

  CHECK_THROWS_AS(attack_config_from_json(ordered_json{{"attack", "NOPE"}}),
                  DataError);
  CHECK_THROWS_AS(
      attack_config_from_json(ordered_json{{"attack", "FGSM"}, {"epsilon", -1.0}}),
      DataError);
}

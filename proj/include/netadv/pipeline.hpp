#ifndef NETADV_PIPELINE_HPP
#define NETADV_PIPELINE_HPP

#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "netadv/attacks.hpp"
#include "netadv/constraints.hpp"
#include "netadv/dataset.hpp"
#include "netadv/dataset_io.hpp"
#include "netadv/evaluation.hpp"
#include "netadv/model_io.hpp"

namespace netadv {

namespace fs = std::filesystem;

// Every subcommand writes a manifest next to its outputs; re-running a
// subcommand from its manifest reproduces the outputs byte for byte.
inline void write_manifest(const std::string& path, const std::string& subcommand,
                           const ordered_json& options,
                           const std::vector<std::string>& inputs,
                           const std::vector<std::string>& outputs,
                           const ordered_json& extra = ordered_json::object()) {
  ordered_json doc;
  doc["manifest_version"] = 1;
  doc["subcommand"] = subcommand;
  doc["options"] = options;
  doc["inputs"] = inputs;
  doc["outputs"] = outputs;
  if (!extra.empty()) doc["results"] = extra;
  save_json_file(path, doc);
}

// ------------------------------------------------------------------- prepare

struct PrepareOptions {
  std::string input_path;      // empty: use the synthetic generator
  std::size_t synthetic_n = 0;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
  std::string out_dir;

  ordered_json to_json() const {
    return {{"input", input_path},
            {"synthetic", synthetic_n},
            {"test_fraction", test_fraction},
            {"seed", seed},
            {"out", out_dir}};
  }

  static PrepareOptions from_json(const ordered_json& j) {
    PrepareOptions o;
    o.input_path = j.at("input").get<std::string>();
    o.synthetic_n = j.at("synthetic").get<std::size_t>();
    o.test_fraction = j.at("test_fraction").get<double>();
    o.seed = j.at("seed").get<std::uint64_t>();
    o.out_dir = j.at("out").get<std::string>();
    return o;
  }
};

struct PrepareResult {
  std::string schema_path;
  std::string train_path;
  std::string test_path;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
};

inline PrepareResult run_prepare(const PrepareOptions& opts) {
  std::vector<RawRecord> records;
  if (!opts.input_path.empty()) {
    records = parse_nslkdd_file(opts.input_path);
  } else {
    if (opts.synthetic_n == 0)
      throw DataError("prepare: either an input file or a synthetic size is required");
    records = synth_dataset(opts.seed, opts.synthetic_n);
  }
  if (records.empty()) throw DataError("prepare: no records");

  auto [train_records, test_records] =
      train_test_split(records, opts.test_fraction, opts.seed);
  if (train_records.empty()) throw DataError("prepare: empty training split");

  FeatureSchema schema = build_schema(train_records);
  EncodedDataset train = encode(train_records, schema);
  EncodedDataset test = encode(test_records, schema);

  fs::create_directories(opts.out_dir);
  PrepareResult result;
  result.schema_path = opts.out_dir + "/schema.json";
  result.train_path = opts.out_dir + "/train.csv";
  result.test_path = opts.out_dir + "/test.csv";
  result.train_rows = train.size();
  result.test_rows = test.size();
  save_schema(schema, result.schema_path);
  save_encoded_csv(train, result.train_path);
  save_encoded_csv(test, result.test_path);
  write_manifest(opts.out_dir + "/manifest.json", "prepare", opts.to_json(),
                 opts.input_path.empty() ? std::vector<std::string>{}
                                         : std::vector<std::string>{opts.input_path},
                 {result.schema_path, result.train_path, result.test_path},
                 {{"train_rows", result.train_rows}, {"test_rows", result.test_rows}});
  return result;
}

inline EncodedDataset load_split(const std::string& data_dir, const std::string& split) {
  FeatureSchema schema = load_schema(data_dir + "/schema.json");
  return load_encoded_csv(data_dir + "/" + split + ".csv", schema);
}

// -------------------------------------------------------------------- derive

struct DeriveOptions {
  std::string data_dir;
  std::string out_path;

  ordered_json to_json() const {
    return {{"data", data_dir}, {"out", out_path}};
  }

  static DeriveOptions from_json(const ordered_json& j) {
    DeriveOptions o;
    o.data_dir = j.at("data").get<std::string>();
    o.out_path = j.at("out").get<std::string>();
    return o;
  }
};

struct DeriveResult {
  ConstraintSet constraints;
  std::vector<std::string> warnings;  // protocols with no derived implication
};

inline DeriveResult run_derive(const DeriveOptions& opts) {
  EncodedDataset train = load_split(opts.data_dir, "train");
  DeriveResult result;
  result.constraints = derive_constraints(train);
  const OneHotGroup* primary = train.schema.find_group("protocol_type");
  for (std::size_t c : primary->members) {
    const std::string& protocol = train.schema.columns[c].source_category;
    if (!result.constraints.implications.count(protocol))
      result.warnings.push_back("no implication derived for protocol '" + protocol +
                                "' (no rows observed)");
  }
  save_constraints(result.constraints, train.schema, opts.out_path);
  write_manifest(opts.out_path + ".manifest.json", "derive", opts.to_json(),
                 {opts.data_dir + "/train.csv", opts.data_dir + "/schema.json"},
                 {opts.out_path});
  return result;
}

// --------------------------------------------------------------------- train

struct TrainOptions {
  std::string data_dir;
  std::string model_kind;    // mlp | knn | tree | forest | svm
  std::string config_path;   // optional JSON overriding hyperparameters
  std::string out_path;
  std::uint64_t seed = 0;

  ordered_json to_json() const {
    return {{"data", data_dir},
            {"model", model_kind},
            {"config", config_path},
            {"out", out_path},
            {"seed", seed}};
  }

  static TrainOptions from_json(const ordered_json& j) {
    TrainOptions o;
    o.data_dir = j.at("data").get<std::string>();
    o.model_kind = j.at("model").get<std::string>();
    o.config_path = j.at("config").get<std::string>();
    o.out_path = j.at("out").get<std::string>();
    o.seed = j.at("seed").get<std::uint64_t>();
    return o;
  }
};

struct TrainResult {
  std::unique_ptr<Classifier> model;
  Metrics train_metrics;
  Metrics test_metrics;
  std::string metrics_line;
};

inline std::unique_ptr<Classifier> train_model_kind(
    const std::string& kind, const EncodedDataset& train, std::uint64_t seed,
    const ordered_json& cfg) {
  auto get_or = [&](const char* key, auto fallback) {
    using T = decltype(fallback);
    return cfg.contains(key) ? cfg.at(key).get<T>() : fallback;
  };
  if (kind == "mlp") {
    MlpConfig mc;
    mc.hidden_sizes = get_or("hidden_sizes", std::vector<std::size_t>{512, 256, 64});
    mc.dropout_rate = get_or("dropout_rate", 0.01);
    mc.learning_rate = get_or("learning_rate", 1e-3);
    mc.epochs = get_or("epochs", std::size_t{30});
    mc.batch_size = get_or("batch_size", std::size_t{128});
    mc.seed = seed;
    return std::make_unique<MlpModel>(train_mlp(train, mc));
  }
  if (kind == "knn")
    return std::make_unique<KnnClassifier>(train_knn(train, get_or("k", std::size_t{5})));
  if (kind == "tree")
    return std::make_unique<DecisionTree>(train_tree(
        train, get_or("max_depth", std::size_t{12}), get_or("min_leaf", std::size_t{2})));
  if (kind == "forest")
    return std::make_unique<RandomForest>(
        train_forest(train, get_or("n_trees", std::size_t{50}),
                     get_or("max_depth", std::size_t{12}), seed));
  if (kind == "svm")
    return std::make_unique<LinearSvm>(
        train_svm(train, get_or("epochs", std::size_t{20}),
                  get_or("learning_rate", 0.01), get_or("regularization", 1e-4)));
  throw DataError("train: unknown model kind '" + kind + "'");
}

inline TrainResult run_train(const TrainOptions& opts) {
  EncodedDataset train = load_split(opts.data_dir, "train");
  EncodedDataset test = load_split(opts.data_dir, "test");
  ordered_json cfg = ordered_json::object();
  if (!opts.config_path.empty()) cfg = load_json_file(opts.config_path);

  TrainResult result;
  result.model = train_model_kind(opts.model_kind, train, opts.seed, cfg);
  result.train_metrics = evaluate_accuracy(*result.model, train);
  result.test_metrics = evaluate_accuracy(*result.model, test);

  std::ostringstream line;
  line << "model=" << opts.model_kind;
  if (opts.model_kind == "mlp") {
    const auto* mlp = dynamic_cast<const MlpModel*>(result.model.get());
    line << " hidden=[";
    for (std::size_t i = 0; i < mlp->config().hidden_sizes.size(); ++i)
      line << (i ? "," : "") << mlp->config().hidden_sizes[i];
    line << "]";
  }
  line << " seed=" << opts.seed << " train_acc=" << format_pct(100.0 * result.train_metrics.accuracy)
       << " test_acc=" << format_pct(100.0 * result.test_metrics.accuracy)
       << " test_f1=" << format_pct(100.0 * result.test_metrics.f1);
  result.metrics_line = line.str();

  save_model(*result.model, opts.out_path);
  write_manifest(opts.out_path + ".manifest.json", "train", opts.to_json(),
                 {opts.data_dir + "/train.csv", opts.data_dir + "/test.csv"},
                 {opts.out_path},
                 {{"metrics", result.metrics_line},
                  {"test_accuracy", result.test_metrics.accuracy}});
  return result;
}

// -------------------------------------------------------------------- attack

struct AttackOptions {
  std::string model_path;
  std::string data_dir;
  std::string attacks_path;   // optional config file; empty: all seven defaults
  std::string out_dir;
  std::size_t max_samples = 500;  // 0: attack every malicious test row
  std::uint64_t seed = 0;

  ordered_json to_json() const {
    return {{"model", model_path}, {"data", data_dir},     {"attacks", attacks_path},
            {"out", out_dir},      {"max_samples", max_samples}, {"seed", seed}};
  }

  static AttackOptions from_json(const ordered_json& j) {
    AttackOptions o;
    o.model_path = j.at("model").get<std::string>();
    o.data_dir = j.at("data").get<std::string>();
    o.attacks_path = j.at("attacks").get<std::string>();
    o.out_dir = j.at("out").get<std::string>();
    o.max_samples = j.at("max_samples").get<std::size_t>();
    o.seed = j.at("seed").get<std::uint64_t>();
    return o;
  }
};

struct AttackRunResult {
  std::vector<std::string> batch_dirs;
  std::vector<std::string> skipped;  // attacks the model cannot support
};

inline std::string model_id(const Classifier& model) {
  Fnv1a h;
  h.update(model.to_json().dump());
  return model.kind() + ":" + h.hex();
}

inline AttackRunResult run_attack_cmd(const AttackOptions& opts) {
  std::unique_ptr<Classifier> model = load_model(opts.model_path);
  EncodedDataset test = load_split(opts.data_dir, "test");
  auto [benign, malicious] = split_traffic(test);
  if (malicious.size() == 0)
    throw DataError("attack: no malicious samples in the test split");

  EncodedDataset samples = malicious;
  if (opts.max_samples > 0 && samples.size() > opts.max_samples) {
    samples.features = Matrix(0, samples.schema.dim());
    samples.labels.clear();
    for (std::size_t i = 0; i < opts.max_samples; ++i) {
      samples.features.append_row(malicious.row(i));
      samples.labels.push_back(1);
    }
  }

  std::vector<AttackConfig> cfgs;
  if (opts.attacks_path.empty()) {
    cfgs = default_attack_suite(opts.seed);
  } else {
    cfgs = load_attack_configs(opts.attacks_path);
    for (auto& cfg : cfgs) cfg.seed = mix_seed(opts.seed, cfg.seed);
  }

  AttackRunResult result;
  std::vector<AttackConfig> runnable;
  for (const auto& cfg : cfgs) {
    if (cfg.kind != AttackKind::zoo && !model->differentiable()) {
      result.skipped.push_back(attack_kind_name(cfg.kind));
      continue;
    }
    runnable.push_back(cfg);
  }
  if (runnable.empty())
    throw DataError("attack: no runnable attacks for this model");

  std::vector<AdversarialBatch> batches =
      run_attack_suite(*model, samples, runnable, model_id(*model));

  fs::create_directories(opts.out_dir);
  std::map<std::string, int> name_use;
  for (const auto& batch : batches) {
    std::string name = batch.attack_name();
    int use = ++name_use[name];
    if (use > 1) name += "_" + std::to_string(use);
    std::string dir = opts.out_dir + "/" + name;
    save_batch(batch, dir);
    result.batch_dirs.push_back(dir);
  }
  ordered_json extra;
  extra["skipped"] = result.skipped;
  extra["attacked_samples"] = samples.size();
  write_manifest(opts.out_dir + "/manifest.json", "attack", opts.to_json(),
                 {opts.model_path, opts.data_dir + "/test.csv"}, result.batch_dirs,
                 extra);
  return result;
}

// ------------------------------------------------------------------ evaluate

struct EvaluateOptions {
  std::string batches_dir;
  std::string constraints_path;
  std::string data_dir;
  std::vector<std::string> target_paths;
  std::string out_path = "report.json";
  std::vector<std::string> render_formats;  // csv, markdown, svg
  std::uint64_t seed = 0;

  ordered_json to_json() const {
    return {{"batches", batches_dir}, {"constraints", constraints_path},
            {"data", data_dir},       {"targets", target_paths},
            {"out", out_path},        {"render", render_formats},
            {"seed", seed}};
  }

  static EvaluateOptions from_json(const ordered_json& j) {
    EvaluateOptions o;
    o.batches_dir = j.at("batches").get<std::string>();
    o.constraints_path = j.at("constraints").get<std::string>();
    o.data_dir = j.at("data").get<std::string>();
    o.target_paths = j.at("targets").get<std::vector<std::string>>();
    o.out_path = j.at("out").get<std::string>();
    o.render_formats = j.at("render").get<std::vector<std::string>>();
    o.seed = j.at("seed").get<std::uint64_t>();
    return o;
  }
};

// canonical attack ordering for reports, extras alphabetical at the end
inline int attack_order_rank(const std::string& dir_name) {
  static const std::vector<std::string> order = {"JSMA", "FGSM", "DEEPFOOL", "CW",
                                                 "PGD", "BIM", "ZOO"};
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (dir_name == order[i] || dir_name.rfind(order[i] + "_", 0) == 0)
      return static_cast<int>(i);
  }
  return static_cast<int>(order.size());
}

inline std::string path_stem(const std::string& path) {
  return fs::path(path).stem().string();
}

inline EvaluationReport run_evaluate(const EvaluateOptions& opts) {
  FeatureSchema schema = load_schema(opts.data_dir + "/schema.json");
  ConstraintSet cs = load_constraints(opts.constraints_path, schema);

  std::vector<std::string> batch_names;
  for (const auto& entry : fs::directory_iterator(opts.batches_dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "meta.json"))
      batch_names.push_back(entry.path().filename().string());
  }
  if (batch_names.empty())
    throw DataError("evaluate: no batches under " + opts.batches_dir);
  std::sort(batch_names.begin(), batch_names.end(),
            [](const std::string& a, const std::string& b) {
              int ra = attack_order_rank(a), rb = attack_order_rank(b);
              return ra != rb ? ra < rb : a < b;
            });

  std::vector<AdversarialBatch> batches;
  for (const auto& name : batch_names)
    batches.push_back(load_batch(opts.batches_dir + "/" + name));

  std::vector<std::unique_ptr<Classifier>> models;
  std::vector<NamedTarget> targets;
  for (const auto& path : opts.target_paths) {
    models.push_back(load_model(path));
    targets.push_back({path_stem(path), models.back().get()});
  }
  if (targets.empty()) throw DataError("evaluate: no target models");

  EvaluationReport report;
  report.surrogate_id = batches.front().surrogate_id;
  report.seed = opts.seed;
  EncodedDataset train = load_split(opts.data_dir, "train");
  report.dataset_fingerprint = dataset_fingerprint(train);
  for (const auto& b : batches)
    report.attack_configs.push_back(attack_config_to_json(b.config));
  for (const auto& t : targets) report.targets.push_back(t.id);
  for (const auto& b : batches) report.validity.push_back(validity_rate(b, cs, schema));
  report.severity_table = transferability_matrix(batches, targets, cs, schema);

  std::vector<std::string> written =
      render_report(report, opts.out_path, opts.render_formats);
  std::vector<std::string> inputs = {opts.batches_dir, opts.constraints_path,
                                     opts.data_dir + "/schema.json"};
  for (const auto& p : opts.target_paths) inputs.push_back(p);
  write_manifest(opts.out_path + ".manifest.json", "evaluate", opts.to_json(),
                 inputs, written);
  return report;
}

// ------------------------------------------------------------------ pipeline

struct PipelineOptions {
  std::string input_path;  // empty: synthetic corpus
  std::size_t synthetic_n = 5000;
  std::size_t max_samples = 500;
  std::uint64_t seed = 42;
  std::string out_dir;

  ordered_json to_json() const {
    return {{"input", input_path},
            {"synthetic", synthetic_n},
            {"max_samples", max_samples},
            {"seed", seed},
            {"out", out_dir}};
  }

  static PipelineOptions from_json(const ordered_json& j) {
    PipelineOptions o;
    o.input_path = j.at("input").get<std::string>();
    o.synthetic_n = j.at("synthetic").get<std::size_t>();
    o.max_samples = j.at("max_samples").get<std::size_t>();
    o.seed = j.at("seed").get<std::uint64_t>();
    o.out_dir = j.at("out").get<std::string>();
    return o;
  }
};

struct PipelineResult {
  std::string report_path;
  EvaluationReport report;
  std::map<std::string, std::string> model_paths;
  std::map<std::string, double> test_accuracy;
};

// prepare -> derive -> train (surrogate + targets) -> attack -> evaluate,
// all reproducible from the single seed
inline PipelineResult run_pipeline(const PipelineOptions& opts,
                                   std::ostream& log = std::cerr) {
  const std::string& out = opts.out_dir;
  fs::create_directories(out);

  PrepareOptions prep;
  prep.input_path = opts.input_path;
  prep.synthetic_n = opts.synthetic_n;
  prep.seed = opts.seed;
  prep.out_dir = out + "/data";
  log << "[pipeline] prepare\n";
  run_prepare(prep);

  DeriveOptions derive;
  derive.data_dir = prep.out_dir;
  derive.out_path = out + "/constraints.json";
  log << "[pipeline] derive constraints\n";
  DeriveResult derived = run_derive(derive);
  for (const auto& w : derived.warnings) log << "[pipeline] warning: " << w << "\n";

  fs::create_directories(out + "/models");
  PipelineResult result;
  struct Spec {
    const char* file;
    const char* kind;
    std::uint64_t seed_salt;
  };
  const Spec specs[] = {{"mlp", "mlp", 0},     {"svm", "svm", 0},
                        {"tree", "tree", 0},   {"forest", "forest", 0},
                        {"knn", "knn", 0},     {"mlp2", "mlp", 1}};
  for (const auto& s : specs) {
    TrainOptions train;
    train.data_dir = prep.out_dir;
    train.model_kind = s.kind;
    train.out_path = out + "/models/" + s.file + ".json";
    train.seed = opts.seed + s.seed_salt;
    log << "[pipeline] train " << s.file << "\n";
    TrainResult tr = run_train(train);
    log << "[pipeline] " << tr.metrics_line << "\n";
    result.model_paths[s.file] = train.out_path;
    result.test_accuracy[s.file] = tr.test_metrics.accuracy;
  }

  AttackOptions attack;
  attack.model_path = result.model_paths.at("mlp");
  attack.data_dir = prep.out_dir;
  attack.out_dir = out + "/batches";
  attack.max_samples = opts.max_samples;
  attack.seed = opts.seed;
  log << "[pipeline] attack\n";
  run_attack_cmd(attack);

  EvaluateOptions eval;
  eval.batches_dir = attack.out_dir;
  eval.constraints_path = derive.out_path;
  eval.data_dir = prep.out_dir;
  eval.target_paths = {result.model_paths.at("mlp"), result.model_paths.at("svm"),
                       result.model_paths.at("tree"), result.model_paths.at("forest"),
                       result.model_paths.at("knn"), result.model_paths.at("mlp2")};
  eval.out_path = out + "/report.json";
  eval.render_formats = {"csv", "markdown", "svg"};
  eval.seed = opts.seed;
  log << "[pipeline] evaluate\n";
  result.report = run_evaluate(eval);
  result.report_path = eval.out_path;

  write_manifest(out + "/manifest.json", "pipeline", opts.to_json(),
                 opts.input_path.empty() ? std::vector<std::string>{}
                                         : std::vector<std::string>{opts.input_path},
                 {eval.out_path});
  return result;
}

}  // namespace netadv

#endif  // NETADV_PIPELINE_HPP

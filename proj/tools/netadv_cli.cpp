// command-line front end: prepare / derive / train / attack / evaluate /
// pipeline, plus manifest re-execution and the dataset checksum helper
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "netadv/pipeline.hpp"
#include "netadv/sha256.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

constexpr const char* kNslKddSource =
    "https://www.unb.ca/cic/datasets/nsl.html";

int run_fetch(const std::string& verify_path, const std::string& expected) {
  std::cout << "NSL-KDD canonical source: " << kNslKddSource << "\n";
  if (verify_path.empty()) {
    std::cout << "Place KDDTrain+.txt / KDDTest+.txt locally and pass --verify "
                 "to check a download against its recorded checksum.\n";
    return kExitOk;
  }
  std::string digest = netadv::Sha256::file_digest(verify_path);
  std::string want = expected;
  if (want.empty()) {
    // recorded checksum sidecar written at download time
    std::string sidecar = verify_path + ".sha256";
    std::ifstream in(sidecar);
    if (!in)
      throw netadv::DataError("no expected checksum: pass --expected or provide " +
                              sidecar);
    in >> want;
  }
  std::cout << "sha256(" << verify_path << ") = " << digest << "\n";
  if (digest != want) {
    std::cerr << "checksum mismatch: expected " << want << "\n";
    return kExitData;
  }
  std::cout << "checksum OK\n";
  return kExitOk;
}

int run_rerun(const std::string& manifest_path) {
  netadv::ordered_json doc = netadv::load_json_file(manifest_path);
  const std::string sub = doc.at("subcommand").get<std::string>();
  const auto& opts = doc.at("options");
  if (sub == "prepare") {
    netadv::run_prepare(netadv::PrepareOptions::from_json(opts));
  } else if (sub == "derive") {
    auto r = netadv::run_derive(netadv::DeriveOptions::from_json(opts));
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  } else if (sub == "train") {
    auto r = netadv::run_train(netadv::TrainOptions::from_json(opts));
    std::cerr << r.metrics_line << "\n";
  } else if (sub == "attack") {
    netadv::run_attack_cmd(netadv::AttackOptions::from_json(opts));
  } else if (sub == "evaluate") {
    netadv::run_evaluate(netadv::EvaluateOptions::from_json(opts));
  } else if (sub == "pipeline") {
    netadv::run_pipeline(netadv::PipelineOptions::from_json(opts));
  } else {
    throw netadv::DataError("rerun: unknown subcommand '" + sub + "' in manifest");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adversarial-example toolkit for network intrusion classifiers"};
  app.require_subcommand(1);

  // prepare
  auto* prepare = app.add_subcommand(
      "prepare", "parse or synthesize traffic, encode it, write train/test splits");
  netadv::PrepareOptions prep_opts;
  prepare->add_option("--input", prep_opts.input_path,
                      "NSL-KDD format CSV (42 or 43 comma-separated fields)");
  prepare->add_option("--synthetic", prep_opts.synthetic_n,
                      "generate N synthetic records instead of reading a file");
  prepare->add_option("--test-fraction", prep_opts.test_fraction,
                      "held-out fraction (stratified)")->capture_default_str();
  prepare->add_option("--seed", prep_opts.seed, "RNG seed")->capture_default_str();
  prepare->add_option("--out", prep_opts.out_dir, "output directory")->required();

  // derive
  auto* derive = app.add_subcommand(
      "derive", "derive protocol/service/flag constraints from prepared data");
  netadv::DeriveOptions derive_opts;
  derive->add_option("--data", derive_opts.data_dir, "prepared data directory")
      ->required();
  derive->add_option("--out", derive_opts.out_path, "constraints JSON path")
      ->required();

  // train
  auto* train = app.add_subcommand("train", "train a classifier on prepared data");
  netadv::TrainOptions train_opts;
  train->add_option("--data", train_opts.data_dir, "prepared data directory")
      ->required();
  train->add_option("--model", train_opts.model_kind, "mlp|knn|tree|forest|svm")
      ->required();
  train->add_option("--config", train_opts.config_path, "hyperparameter JSON");
  train->add_option("--seed", train_opts.seed, "RNG seed")->capture_default_str();
  train->add_option("--out", train_opts.out_path, "model file path")->required();

  // attack
  auto* attack = app.add_subcommand(
      "attack", "generate adversarial examples from malicious test traffic");
  netadv::AttackOptions attack_opts;
  attack->add_option("--model", attack_opts.model_path, "surrogate model file")
      ->required();
  attack->add_option("--data", attack_opts.data_dir, "prepared data directory")
      ->required();
  attack->add_option("--attacks", attack_opts.attacks_path,
                     "attack config JSON (default: all seven attacks)");
  attack->add_option("--max-samples", attack_opts.max_samples,
                     "cap on attacked samples, 0 = all")->capture_default_str();
  attack->add_option("--seed", attack_opts.seed, "RNG seed")->capture_default_str();
  attack->add_option("--out", attack_opts.out_dir, "batch output directory")
      ->required();

  // evaluate
  auto* evaluate = app.add_subcommand(
      "evaluate", "validity, severity and transferability report");
  netadv::EvaluateOptions eval_opts;
  evaluate->add_option("--batches", eval_opts.batches_dir, "attack batch directory")
      ->required();
  evaluate->add_option("--constraints", eval_opts.constraints_path,
                       "constraints JSON")->required();
  evaluate->add_option("--data", eval_opts.data_dir, "prepared data directory")
      ->required();
  evaluate->add_option("--targets", eval_opts.target_paths, "target model files")
      ->required()
      ->expected(-1);
  evaluate->add_option("--out", eval_opts.out_path, "report JSON path")->capture_default_str();
  evaluate
      ->add_option("--render", eval_opts.render_formats,
                   "additional formats: csv,markdown,svg")
      ->delimiter(',');
  evaluate->add_option("--seed", eval_opts.seed, "seed recorded in the report")->capture_default_str();

  // pipeline
  auto* pipeline = app.add_subcommand(
      "pipeline", "prepare + derive + train + attack + evaluate with one seed");
  netadv::PipelineOptions pipe_opts;
  pipeline->add_option("--input", pipe_opts.input_path, "NSL-KDD format CSV");
  pipeline->add_option("--synthetic", pipe_opts.synthetic_n,
                       "synthetic corpus size when no input is given")->capture_default_str();
  pipeline->add_option("--max-samples", pipe_opts.max_samples,
                       "cap on attacked samples")->capture_default_str();
  pipeline->add_option("--seed", pipe_opts.seed, "RNG seed")->capture_default_str();
  pipeline->add_option("--out", pipe_opts.out_dir, "run directory")->required();

  // rerun
  auto* rerun = app.add_subcommand("rerun", "re-execute a run from its manifest");
  std::string manifest_path;
  rerun->add_option("--manifest", manifest_path, "manifest.json path")->required();

  // fetch
  auto* fetch = app.add_subcommand(
      "fetch", "print the NSL-KDD source and verify a downloaded file checksum");
  std::string verify_path, expected_sha;
  fetch->add_option("--verify", verify_path, "file to hash");
  fetch->add_option("--expected", expected_sha, "expected sha256 hex digest");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (prepare->parsed()) {
      auto r = netadv::run_prepare(prep_opts);
      std::cerr << "prepared " << r.train_rows << " train / " << r.test_rows
                << " test rows under " << prep_opts.out_dir << "\n";
    } else if (derive->parsed()) {
      auto r = netadv::run_derive(derive_opts);
      for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
      std::cerr << "constraints written to " << derive_opts.out_path << "\n";
    } else if (train->parsed()) {
      auto r = netadv::run_train(train_opts);
      std::cerr << r.metrics_line << "\n";
    } else if (attack->parsed()) {
      auto r = netadv::run_attack_cmd(attack_opts);
      for (const auto& s : r.skipped)
        std::cerr << "warning: skipped " << s
                  << " (model provides no gradients)\n";
      std::cerr << r.batch_dirs.size() << " batch(es) under "
                << attack_opts.out_dir << "\n";
    } else if (evaluate->parsed()) {
      netadv::run_evaluate(eval_opts);
      std::cerr << "report written to " << eval_opts.out_path << "\n";
    } else if (pipeline->parsed()) {
      auto r = netadv::run_pipeline(pipe_opts);
      std::cerr << "report written to " << r.report_path << "\n";
    } else if (rerun->parsed()) {
      return run_rerun(manifest_path);
    } else if (fetch->parsed()) {
      return run_fetch(verify_path, expected_sha);
    }
    return kExitOk;
  } catch (const netadv::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const netadv::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const netadv::CapabilityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

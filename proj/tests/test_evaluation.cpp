#include <doctest.h>

#include <cctype>

#include "netadv/evaluation.hpp"
#include "netadv/mlp.hpp"
#include "support/fixtures.hpp"

using namespace netadv;
using netadv::testing::make_synth_fixture;

namespace {

// minimal XML well-formedness check: balanced tags, quoted attribute values
bool xml_well_formed(const std::string& text) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  if (text.rfind("<?xml", 0) == 0) i = text.find("?>");
  if (i == std::string::npos) return false;
  while ((i = text.find('<', i)) != std::string::npos) {
    std::size_t end = text.find('>', i);
    if (end == std::string::npos) return false;
    std::string tag = text.substr(i + 1, end - i - 1);
    if (tag.empty()) return false;
    // quotes must pair inside the tag
    if (std::count(tag.begin(), tag.end(), '"') % 2 != 0) return false;
    if (tag[0] == '/') {
      if (stack.empty()) return false;
      if (stack.back() != tag.substr(1)) return false;
      stack.pop_back();
    } else if (tag.back() != '/') {
      std::string name = tag.substr(0, tag.find_first_of(" \t\n"));
      stack.push_back(name);
    }
    i = end + 1;
  }
  return stack.empty();
}

struct EvalFixture {
  netadv::testing::SynthFixture synth;
  AdversarialBatch mixed;  // 4 samples, 1 valid
  AdversarialBatch clean;  // all rows already valid

  EvalFixture() : synth(make_synth_fixture(300, 83)) {
    auto make_row = [&](const std::string& protocol, const std::string& service,
                        const std::string& flag) {
      std::vector<double> x(synth.data.row(0).begin(), synth.data.row(0).end());
      for (const auto& g : synth.schema.groups) {
        const std::string& want =
            g.id == "protocol_type" ? protocol : (g.id == "service" ? service : flag);
        for (std::size_t c : g.members)
          x[c] = synth.schema.columns[c].source_category == want ? 1.0 : 0.0;
      }
      return x;
    };
    mixed.config = AttackConfig::defaults(AttackKind::fgsm);
    mixed.surrogate_id = "mlp:test";
    mixed.originals = Matrix(0, synth.schema.dim());
    mixed.adversarials = Matrix(0, synth.schema.dim());
    auto add = [&](const std::vector<double>& row) {
      mixed.originals.append_row(row);
      mixed.adversarials.append_row(row);
      mixed.success.push_back(1);
    };
    add(make_row("tcp", "ssh", "SF"));      // valid
    add(make_row("tcp", "tftp_u", "SF"));   // mismatch
    add(make_row("udp", "domain_u", "S0")); // mismatch
    add(make_row("icmp", "http", "SF"));    // mismatch

    clean.config = AttackConfig::defaults(AttackKind::bim);
    clean.surrogate_id = "mlp:test";
    clean.originals = Matrix(0, synth.schema.dim());
    clean.adversarials = Matrix(0, synth.schema.dim());
    for (std::size_t i = 0; i < 10; ++i) {
      clean.originals.append_row(synth.data.row(i));
      clean.adversarials.append_row(synth.data.row(i));
      clean.success.push_back(0);
    }
  }
};

EvaluationReport tiny_report(const EvalFixture& f) {
  EvaluationReport report;
  report.surrogate_id = "mlp:test";
  report.seed = 9;
  report.dataset_fingerprint = dataset_fingerprint(f.synth.data);
  report.attack_configs.push_back(attack_config_to_json(f.mixed.config));
  report.attack_configs.push_back(attack_config_to_json(f.clean.config));
  LinearModel always_benign(std::vector<double>(f.synth.schema.dim(), 0.0), -1.0);
  LinearModel always_malicious(std::vector<double>(f.synth.schema.dim(), 0.0), 1.0);
  std::vector<NamedTarget> targets = {{"benign_clf", &always_benign},
                                      {"malicious_clf", &always_malicious}};
  report.targets = {"benign_clf", "malicious_clf"};
  report.validity.push_back(validity_rate(f.mixed, f.synth.constraints, f.synth.schema));
  report.validity.push_back(validity_rate(f.clean, f.synth.constraints, f.synth.schema));
  report.severity_table = transferability_matrix(
      {f.mixed, f.clean}, targets, f.synth.constraints, f.synth.schema);
  return report;
}

}  // namespace

TEST_CASE("validity_rate") {
  EvalFixture f;

  SUBCASE("batch of 4 with 1 valid is 25 percent") {
    ValidityEntry e = validity_rate(f.mixed, f.synth.constraints, f.synth.schema);
    CHECK(e.valid_count == 1);
    CHECK(e.invalid_count == 3);
    CHECK(e.validity_pct == 25.0);
    CHECK(e.violations.at("SERVICE_PROTOCOL_MISMATCH") +
              e.violations.at("FLAG_PROTOCOL_MISMATCH") >=
          3);
  }

  SUBCASE("fully valid batch is 100 percent") {
    ValidityEntry e = validity_rate(f.clean, f.synth.constraints, f.synth.schema);
    CHECK(e.valid_count == 10);
    CHECK(e.invalid_count == 0);
    CHECK(e.validity_pct == 100.0);
  }

  SUBCASE("validity and invalidity percentages always sum to 100") {
    for (const AdversarialBatch* b : {&f.mixed, &f.clean}) {
      ValidityEntry e = validity_rate(*b, f.synth.constraints, f.synth.schema);
      double invalidity =
          100.0 * static_cast<double>(e.invalid_count) / static_cast<double>(e.total());
      CHECK(e.validity_pct + round_pct(invalidity) == doctest::Approx(100.0));
    }
  }
}

TEST_CASE("severity") {
  EvalFixture f;
  LinearModel always_benign(std::vector<double>(f.synth.schema.dim(), 0.0), -1.0);
  LinearModel always_malicious(std::vector<double>(f.synth.schema.dim(), 0.0), 1.0);

  SUBCASE("a target that classifies everything benign scores 100 both ways") {
    auto before = severity(f.mixed, always_benign, false, f.synth.constraints,
                           f.synth.schema);
    auto after = severity(f.mixed, always_benign, true, f.synth.constraints,
                          f.synth.schema);
    CHECK(before.pct == 100.0);
    CHECK(after.pct == 100.0);
    CHECK(before.n == 4);
    CHECK(after.n == 1);  // only the valid sample survives the filter
  }

  SUBCASE("empty evaluated set reports absent, never zero") {
    AdversarialBatch all_invalid = f.mixed;
    // drop the valid row (row 0)
    AdversarialBatch rest;
    rest.config = all_invalid.config;
    rest.originals = Matrix(0, f.synth.schema.dim());
    rest.adversarials = Matrix(0, f.synth.schema.dim());
    for (std::size_t i = 1; i < all_invalid.size(); ++i) {
      rest.originals.append_row(all_invalid.originals.row(i));
      rest.adversarials.append_row(all_invalid.adversarials.row(i));
      rest.success.push_back(1);
    }
    auto after = severity(rest, always_benign, true, f.synth.constraints,
                          f.synth.schema);
    CHECK(!after.pct.has_value());
    CHECK(after.n == 0);
  }

  SUBCASE("severity counts match an independent tally") {
    MlpConfig small;
    small.hidden_sizes = {8};
    small.epochs = 4;
    small.seed = 2;
    MlpModel mlp = train_mlp(f.synth.data, small);
    auto before =
        severity(f.clean, mlp, false, f.synth.constraints, f.synth.schema);
    std::size_t benign = 0;
    for (std::size_t i = 0; i < f.clean.size(); ++i)
      benign += mlp.predict(f.clean.adversarials.row(i)) == 0 ? 1 : 0;
    CHECK(before.pct ==
          round_pct(100.0 * static_cast<double>(benign) / static_cast<double>(f.clean.size())));
  }

  SUBCASE("after-filter severity equals severity of the filtered valid batch") {
    FilterBatchResult fb = filter_batch(f.mixed, f.synth.constraints, f.synth.schema);
    auto direct = severity_of_rows(fb.valid.adversarials, always_malicious);
    auto via_flag = severity(f.mixed, always_malicious, true, f.synth.constraints,
                             f.synth.schema);
    CHECK(direct.pct == via_flag.pct);
    CHECK(direct.n == via_flag.n);
  }

  SUBCASE("schema mismatch is an error") {
    LinearModel wrong({1.0, 2.0}, 0.0);
    CHECK_THROWS_AS(
        severity(f.mixed, wrong, false, f.synth.constraints, f.synth.schema),
        DataError);
  }
}

TEST_CASE("transferability_matrix") {
  EvalFixture f;
  LinearModel a(std::vector<double>(f.synth.schema.dim(), 0.0), -1.0);
  LinearModel b(std::vector<double>(f.synth.schema.dim(), 0.0), 1.0);
  std::vector<NamedTarget> targets = {{"a", &a}, {"b", &b}};

  auto cells = transferability_matrix({f.mixed, f.clean}, targets,
                                      f.synth.constraints, f.synth.schema);
  REQUIRE(cells.size() == 4);  // 2 attacks x 2 targets

  for (const auto& cell : cells) {
    CHECK(cell.after.n <= cell.before.n);
    CHECK(cell.before.pct.has_value());
  }
  CHECK(cells[0].attack == "FGSM");
  CHECK(cells[0].target == "a");
  CHECK(cells[1].target == "b");
  CHECK(cells[2].attack == "BIM");
}

TEST_CASE("report rendering") {
  EvalFixture f;
  EvaluationReport report = tiny_report(f);

  SUBCASE("json round-trip is lossless") {
    ordered_json doc = report_to_json(report);
    EvaluationReport back = report_from_json(doc);
    CHECK(report_to_json(back) == doc);
    CHECK(doc.at("report_version") == 1);
  }

  SUBCASE("building the report twice gives identical bytes") {
    EvaluationReport again = tiny_report(f);
    CHECK(report_to_json(report).dump(2) == report_to_json(again).dump(2));
  }

  SUBCASE("severity csv has the fixed header") {
    std::string csv = render_csv_severity(report);
    CHECK(csv.rfind("attack,target,severity_before,severity_after,n_before,n_after\n",
                    0) == 0);
    // one line per cell plus header
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 4);
  }

  SUBCASE("absent severities render as an em dash, not zero") {
    EvaluationReport r = report;
    SeverityCell cell;
    cell.attack = "FGSM";
    cell.target = "a";
    cell.before.pct = 80.0;
    cell.before.n = 10;
    cell.after.n = 0;  // absent
    r.severity_table = {cell};
    r.targets = {"a"};
    std::string csv = render_csv_severity(r);
    CHECK(csv.find("FGSM,a,80.00,\xE2\x80\x94,10,0") != std::string::npos);
    std::string md = render_markdown(r);
    CHECK(md.find("\xE2\x80\x94") != std::string::npos);
  }

  SUBCASE("markdown uses display names") {
    EvaluationReport r = report;
    r.validity[0].attack = "DEEPFOOL";
    r.validity[1].attack = "CW";
    std::string md = render_markdown(r);
    CHECK(md.find("DeepFool") != std::string::npos);
    CHECK(md.find("C&W") != std::string::npos);
  }

  SUBCASE("svg is well-formed XML with one bar group per attack") {
    std::string svg = render_svg_validity(report);
    CHECK(xml_well_formed(svg));
    // two bars per attack plus background and two legend swatches
    std::size_t rects = 0, pos = 0;
    while ((pos = svg.find("<rect", pos)) != std::string::npos) {
      ++rects;
      pos += 5;
    }
    CHECK(rects == 2 * report.validity.size() + 3);
  }

  SUBCASE("render_report writes the requested files") {
    std::string dir =
        (std::filesystem::temp_directory_path() / "netadv_report_test").string();
    std::filesystem::create_directories(dir);
    auto written = render_report(report, dir + "/report.json",
                                 {"csv", "markdown", "svg"});
    CHECK(written.size() == 5);
    for (const auto& path : written) CHECK(std::filesystem::exists(path));
    // round-trip through the file
    EvaluationReport back = report_from_json(load_json_file(dir + "/report.json"));
    CHECK(report_to_json(back) == report_to_json(report));
    CHECK_THROWS_AS(render_report(report, dir + "/report.json", {"pdf"}), DataError);
    std::filesystem::remove_all(dir);
  }
}

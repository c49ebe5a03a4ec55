#ifndef NETADV_EVALUATION_HPP
#define NETADV_EVALUATION_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "netadv/attacks.hpp"
#include "netadv/classifier.hpp"
#include "netadv/hash.hpp"

namespace netadv {

inline double round_pct(double v) { return std::round(v * 100.0) / 100.0; }

inline std::string dataset_fingerprint(const EncodedDataset& data) {
  Fnv1a h;
  h.update(data.features.data());
  for (int y : data.labels) h.update(static_cast<double>(y));
  return "fnv1a:" + h.hex();
}

// display names matching the usual attack spellings
inline std::string attack_display_name(const std::string& canonical) {
  if (canonical == "DEEPFOOL") return "DeepFool";
  if (canonical == "CW") return "C&W";
  return canonical;
}

// ------------------------------------------------------------------- entries

struct ValidityEntry {
  std::string attack;
  std::size_t valid_count = 0;
  std::size_t invalid_count = 0;
  double validity_pct = 0.0;
  std::size_t excluded = 0;
  std::map<std::string, std::size_t> violations;  // reason -> offending samples

  std::size_t total() const { return valid_count + invalid_count; }
};

struct SeverityValue {
  std::optional<double> pct;  // absent when the evaluated set is empty
  std::size_t n = 0;
};

struct SeverityCell {
  std::string attack;
  std::string target;
  SeverityValue before;
  SeverityValue after;
};

struct EvaluationReport {
  std::string surrogate_id;
  std::uint64_t seed = 0;
  std::string dataset_fingerprint;
  std::vector<ordered_json> attack_configs;
  std::vector<std::string> targets;
  std::vector<ValidityEntry> validity;
  std::vector<SeverityCell> severity_table;
};

// ---------------------------------------------------------------- operations

inline ValidityEntry validity_rate(const AdversarialBatch& batch,
                                   const ConstraintSet& cs,
                                   const FeatureSchema& schema) {
  FilterBatchResult fb = filter_batch(batch, cs, schema);
  ValidityEntry entry;
  entry.attack = batch.attack_name();
  entry.valid_count = fb.stats.valid_count;
  entry.invalid_count = fb.stats.invalid_count;
  entry.excluded = batch.excluded_count;
  std::size_t total = entry.total();
  entry.validity_pct =
      total ? round_pct(100.0 * static_cast<double>(entry.valid_count) /
                        static_cast<double>(total))
            : 0.0;
  for (int r = 0; r < 5; ++r) {
    auto reason = static_cast<ViolationReason>(r);
    entry.violations[violation_name(reason)] = fb.stats.reason_count(reason);
  }
  return entry;
}

inline SeverityValue severity_of_rows(const Matrix& rows, const Classifier& target) {
  SeverityValue s;
  s.n = rows.rows();
  if (s.n == 0) return s;
  std::size_t benign = 0;
  for (std::size_t i = 0; i < rows.rows(); ++i)
    benign += target.predict(rows.row(i)) == 0 ? 1 : 0;
  s.pct = round_pct(100.0 * static_cast<double>(benign) / static_cast<double>(s.n));
  return s;
}

// Severity is the evasion rate: the percentage of evaluated adversarial
// samples the target classifies as benign. With use_filter the evaluated set
// is the filter-valid projected samples; otherwise it is the whole batch.
inline SeverityValue severity(const AdversarialBatch& batch, const Classifier& target,
                              bool use_filter, const ConstraintSet& cs,
                              const FeatureSchema& schema) {
  if (target.input_dim() != schema.dim())
    throw DataError("severity: target dimension does not match schema");
  if (!use_filter) return severity_of_rows(batch.adversarials, target);
  FilterBatchResult fb = filter_batch(batch, cs, schema);
  return severity_of_rows(fb.valid.adversarials, target);
}

struct NamedTarget {
  std::string id;
  const Classifier* model;
};

inline std::vector<SeverityCell> transferability_matrix(
    const std::vector<AdversarialBatch>& batches,
    const std::vector<NamedTarget>& targets, const ConstraintSet& cs,
    const FeatureSchema& schema) {
  std::vector<SeverityCell> cells;
  for (const auto& batch : batches) {
    FilterBatchResult fb = filter_batch(batch, cs, schema);
    for (const auto& target : targets) {
      if (target.model->input_dim() != schema.dim())
        throw DataError("transferability_matrix: target dimension mismatch");
      SeverityCell cell;
      cell.attack = batch.attack_name();
      cell.target = target.id;
      cell.before = severity_of_rows(batch.adversarials, *target.model);
      cell.after = severity_of_rows(fb.valid.adversarials, *target.model);
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

// ----------------------------------------------------------------- rendering

inline ordered_json report_to_json(const EvaluationReport& report) {
  ordered_json doc;
  doc["report_version"] = 1;
  ordered_json meta;
  meta["surrogate"] = report.surrogate_id;
  meta["seed"] = report.seed;
  meta["dataset_fingerprint"] = report.dataset_fingerprint;
  meta["severity_definition"] =
      "evasion rate: percentage of evaluated adversarial samples the target "
      "classifies as benign; after-filter severity evaluates the projected "
      "filter-valid samples";
  meta["attack_configs"] = report.attack_configs;
  meta["targets"] = report.targets;
  doc["metadata"] = meta;
  doc["validity"] = ordered_json::array();
  for (const auto& e : report.validity) {
    ordered_json j;
    j["attack"] = e.attack;
    j["valid"] = e.valid_count;
    j["invalid"] = e.invalid_count;
    j["validity_pct"] = e.validity_pct;
    j["excluded"] = e.excluded;
    j["violations"] = e.violations;
    doc["validity"].push_back(j);
  }
  doc["severity"] = ordered_json::array();
  for (const auto& c : report.severity_table) {
    ordered_json j;
    j["attack"] = c.attack;
    j["target"] = c.target;
    j["severity_before"] = c.before.pct ? ordered_json(*c.before.pct) : ordered_json(nullptr);
    j["severity_after"] = c.after.pct ? ordered_json(*c.after.pct) : ordered_json(nullptr);
    j["n_before"] = c.before.n;
    j["n_after"] = c.after.n;
    doc["severity"].push_back(j);
  }
  return doc;
}

inline EvaluationReport report_from_json(const ordered_json& doc) {
  if (!doc.contains("report_version") || doc.at("report_version").get<int>() != 1)
    throw DataError("report: unsupported report_version");
  EvaluationReport report;
  const auto& meta = doc.at("metadata");
  report.surrogate_id = meta.at("surrogate").get<std::string>();
  report.seed = meta.at("seed").get<std::uint64_t>();
  report.dataset_fingerprint = meta.at("dataset_fingerprint").get<std::string>();
  for (const auto& c : meta.at("attack_configs")) report.attack_configs.push_back(c);
  report.targets = meta.at("targets").get<std::vector<std::string>>();
  for (const auto& j : doc.at("validity")) {
    ValidityEntry e;
    e.attack = j.at("attack").get<std::string>();
    e.valid_count = j.at("valid").get<std::size_t>();
    e.invalid_count = j.at("invalid").get<std::size_t>();
    e.validity_pct = j.at("validity_pct").get<double>();
    e.excluded = j.at("excluded").get<std::size_t>();
    e.violations = j.at("violations").get<std::map<std::string, std::size_t>>();
    report.validity.push_back(std::move(e));
  }
  for (const auto& j : doc.at("severity")) {
    SeverityCell c;
    c.attack = j.at("attack").get<std::string>();
    c.target = j.at("target").get<std::string>();
    if (!j.at("severity_before").is_null()) c.before.pct = j.at("severity_before").get<double>();
    if (!j.at("severity_after").is_null()) c.after.pct = j.at("severity_after").get<double>();
    c.before.n = j.at("n_before").get<std::size_t>();
    c.after.n = j.at("n_after").get<std::size_t>();
    report.severity_table.push_back(std::move(c));
  }
  return report;
}

inline std::string severity_text(const SeverityValue& v) {
  return v.pct ? format_pct(*v.pct) : std::string("\xE2\x80\x94");  // em dash
}

inline std::string render_csv_validity(const EvaluationReport& report) {
  std::ostringstream out;
  out << "attack,valid,invalid,validity_pct,excluded,one_hot_sum,binary_domain,"
         "service_protocol_mismatch,flag_protocol_mismatch,numeric_range\n";
  for (const auto& e : report.validity) {
    out << e.attack << ',' << e.valid_count << ',' << e.invalid_count << ','
        << format_pct(e.validity_pct) << ',' << e.excluded;
    for (const char* key : {"ONE_HOT_SUM", "BINARY_DOMAIN", "SERVICE_PROTOCOL_MISMATCH",
                            "FLAG_PROTOCOL_MISMATCH", "NUMERIC_RANGE"})
      out << ',' << (e.violations.count(key) ? e.violations.at(key) : 0);
    out << '\n';
  }
  return out.str();
}

inline std::string render_csv_severity(const EvaluationReport& report) {
  std::ostringstream out;
  out << "attack,target,severity_before,severity_after,n_before,n_after\n";
  for (const auto& c : report.severity_table) {
    out << c.attack << ',' << c.target << ',' << severity_text(c.before) << ','
        << severity_text(c.after) << ',' << c.before.n << ',' << c.after.n << '\n';
  }
  return out.str();
}

inline std::string render_markdown(const EvaluationReport& report) {
  std::ostringstream out;
  out << "# Adversarial evaluation report\n\n";
  out << "- surrogate: `" << report.surrogate_id << "`\n";
  out << "- seed: " << report.seed << "\n";
  out << "- dataset fingerprint: `" << report.dataset_fingerprint << "`\n";
  out << "- severity definition: evasion rate (percentage of evaluated "
         "adversarial samples classified benign); the after column evaluates "
         "the projected filter-valid samples\n\n";

  out << "## Validity per attack\n\n";
  out << "| attack | valid | invalid | validity % |\n";
  out << "|---|---:|---:|---:|\n";
  for (const auto& e : report.validity)
    out << "| " << attack_display_name(e.attack) << " | " << e.valid_count << " | "
        << e.invalid_count << " | " << format_pct(e.validity_pct) << " |\n";

  auto table = [&](bool after) {
    std::vector<std::string> attacks;
    for (const auto& c : report.severity_table) {
      bool seen = false;
      for (const auto& a : attacks) seen = seen || a == c.attack;
      if (!seen) attacks.push_back(c.attack);
    }
    out << "\n## Severity " << (after ? "after" : "before") << " filter\n\n|  |";
    for (const auto& a : attacks) out << ' ' << attack_display_name(a) << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < attacks.size(); ++i) out << "---:|";
    out << '\n';
    for (const auto& target : report.targets) {
      out << "| " << target << " |";
      for (const auto& a : attacks) {
        for (const auto& c : report.severity_table) {
          if (c.attack == a && c.target == target) {
            out << ' ' << severity_text(after ? c.after : c.before) << " |";
            break;
          }
        }
      }
      out << '\n';
    }
  };
  table(false);
  table(true);
  return out.str();
}

// grouped valid/invalid percentage bars, one group per attack; self-contained
inline std::string render_svg_validity(const EvaluationReport& report) {
  const int group_w = 90, bar_w = 30, chart_h = 240, margin_l = 50, margin_t = 40;
  const int margin_b = 50;
  int width = margin_l + group_w * static_cast<int>(report.validity.size()) + 20;
  int height = margin_t + chart_h + margin_b;
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' ' << height
      << "\">\n";
  out << "  <title>Validity percentage of adversarial examples per attack</title>\n";
  out << "  <rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";
  for (int tick = 0; tick <= 100; tick += 25) {
    int y = margin_t + chart_h - chart_h * tick / 100;
    out << "  <line x1=\"" << margin_l - 4 << "\" y1=\"" << y << "\" x2=\""
        << width - 10 << "\" y2=\"" << y
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out << "  <text x=\"" << margin_l - 8 << "\" y=\"" << y + 4
        << "\" font-size=\"11\" text-anchor=\"end\" font-family=\"sans-serif\">"
        << tick << "</text>\n";
  }
  int x = margin_l + 10;
  for (const auto& e : report.validity) {
    double valid_pct = e.validity_pct;
    double invalid_pct = e.total() ? round_pct(100.0 - valid_pct) : 0.0;
    int h_valid = static_cast<int>(chart_h * valid_pct / 100.0);
    int h_invalid = static_cast<int>(chart_h * invalid_pct / 100.0);
    out << "  <rect x=\"" << x << "\" y=\"" << margin_t + chart_h - h_valid
        << "\" width=\"" << bar_w << "\" height=\"" << h_valid
        << "\" fill=\"#4caf50\"/>\n";
    out << "  <rect x=\"" << x + bar_w + 4 << "\" y=\""
        << margin_t + chart_h - h_invalid << "\" width=\"" << bar_w
        << "\" height=\"" << h_invalid << "\" fill=\"#e53935\"/>\n";
    out << "  <text x=\"" << x + bar_w + 2 << "\" y=\""
        << margin_t + chart_h + 16
        << "\" font-size=\"11\" text-anchor=\"middle\" font-family=\"sans-serif\">"
        << attack_display_name(e.attack) << "</text>\n";
    x += group_w;
  }
  out << "  <rect x=\"" << margin_l + 10 << "\" y=\"12\" width=\"12\" height=\"12\""
      << " fill=\"#4caf50\"/>\n";
  out << "  <text x=\"" << margin_l + 26
      << "\" y=\"22\" font-size=\"11\" font-family=\"sans-serif\">valid %</text>\n";
  out << "  <rect x=\"" << margin_l + 90 << "\" y=\"12\" width=\"12\" height=\"12\""
      << " fill=\"#e53935\"/>\n";
  out << "  <text x=\"" << margin_l + 106
      << "\" y=\"22\" font-size=\"11\" font-family=\"sans-serif\">invalid %</text>\n";
  out << "</svg>\n";
  return out.str();
}

// renders report.json plus any of csv, markdown, svg next to it
inline std::vector<std::string> render_report(const EvaluationReport& report,
                                              const std::string& json_path,
                                              const std::vector<std::string>& formats) {
  std::vector<std::string> written;
  save_json_file(json_path, report_to_json(report));
  written.push_back(json_path);
  std::string base = json_path;
  if (base.size() > 5 && base.substr(base.size() - 5) == ".json")
    base = base.substr(0, base.size() - 5);
  for (const auto& fmt : formats) {
    if (fmt == "json") continue;  // always written
    if (fmt == "csv") {
      write_text_file(base + "_validity.csv", render_csv_validity(report));
      write_text_file(base + "_severity.csv", render_csv_severity(report));
      written.push_back(base + "_validity.csv");
      written.push_back(base + "_severity.csv");
    } else if (fmt == "markdown") {
      write_text_file(base + ".md", render_markdown(report));
      written.push_back(base + ".md");
    } else if (fmt == "svg") {
      write_text_file(base + "_validity.svg", render_svg_validity(report));
      written.push_back(base + "_validity.svg");
    } else {
      throw DataError("render_report: unknown format '" + fmt + "'");
    }
  }
  return written;
}

}  // namespace netadv

#endif  // NETADV_EVALUATION_HPP

#ifndef NETADV_DATASET_IO_HPP
#define NETADV_DATASET_IO_HPP

#include <fstream>
#include <string>

#include <json.hpp>

#include "netadv/csv.hpp"
#include "netadv/dataset.hpp"

namespace netadv {

using ordered_json = nlohmann::ordered_json;

inline ordered_json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  ordered_json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return doc;
}

inline void save_json_file(const std::string& path, const ordered_json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

inline const char* column_kind_name(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::continuous: return "continuous";
    case ColumnKind::binary: return "binary";
    case ColumnKind::one_hot_member: return "one_hot_member";
  }
  return "continuous";
}

inline ColumnKind column_kind_from(const std::string& name) {
  if (name == "continuous") return ColumnKind::continuous;
  if (name == "binary") return ColumnKind::binary;
  if (name == "one_hot_member") return ColumnKind::one_hot_member;
  throw ParseError("unknown column kind: " + name);
}

// The sidecar is the single source of truth for decoding an encoded CSV.
inline void save_schema(const FeatureSchema& schema, const std::string& path) {
  ordered_json doc;
  doc["schema_version"] = 1;
  doc["columns"] = ordered_json::array();
  for (const auto& col : schema.columns) {
    ordered_json c;
    c["name"] = col.name;
    c["kind"] = column_kind_name(col.kind);
    if (col.kind == ColumnKind::one_hot_member) {
      c["group"] = col.group;
      c["category"] = col.source_category;
    }
    c["train_min"] = col.train_min;
    c["train_max"] = col.train_max;
    doc["columns"].push_back(c);
  }
  doc["groups"] = ordered_json::array();
  for (const auto& g : schema.groups) {
    ordered_json j;
    j["id"] = g.id;
    j["members"] = g.members;
    doc["groups"].push_back(j);
  }
  save_json_file(path, doc);
}

inline FeatureSchema load_schema(const std::string& path) {
  ordered_json doc = load_json_file(path);
  if (!doc.contains("schema_version") || doc["schema_version"].get<int>() != 1)
    throw DataError(path + ": unsupported schema_version");
  FeatureSchema schema;
  for (const auto& c : doc.at("columns")) {
    ColumnSpec spec;
    spec.name = c.at("name").get<std::string>();
    spec.kind = column_kind_from(c.at("kind").get<std::string>());
    if (spec.kind == ColumnKind::one_hot_member) {
      spec.group = c.at("group").get<std::string>();
      spec.source_category = c.at("category").get<std::string>();
    }
    spec.train_min = c.at("train_min").get<double>();
    spec.train_max = c.at("train_max").get<double>();
    if (spec.train_min > spec.train_max)
      throw DataError(path + ": train_min > train_max for " + spec.name);
    schema.columns.push_back(std::move(spec));
  }
  for (const auto& g : doc.at("groups")) {
    OneHotGroup group;
    group.id = g.at("id").get<std::string>();
    for (const auto& m : g.at("members")) {
      std::size_t idx = m.get<std::size_t>();
      if (idx >= schema.columns.size())
        throw DataError(path + ": group member index out of range");
      group.members.push_back(idx);
    }
    schema.groups.push_back(std::move(group));
  }
  return schema;
}

inline void save_encoded_csv(const EncodedDataset& data, const std::string& path) {
  std::ostringstream out;
  for (std::size_t c = 0; c < data.schema.dim(); ++c)
    out << data.schema.columns[c].name << ',';
  out << "label\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto row = data.row(i);
    for (double v : row) out << format_double(v) << ',';
    out << data.labels[i] << '\n';
  }
  write_text_file(path, out.str());
}

inline EncodedDataset load_encoded_csv(const std::string& path,
                                       const FeatureSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open encoded dataset: " + path);
  EncodedDataset data;
  data.schema = schema;
  data.features = Matrix(0, schema.dim());
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<double> row(schema.dim());
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() != schema.dim() + 1)
        throw ParseError(path + ": header width does not match schema");
      continue;
    }
    if (fields.size() != schema.dim() + 1)
      throw ParseError(path + ": line " + std::to_string(line_no) +
                       ": expected " + std::to_string(schema.dim() + 1) +
                       " fields, got " + std::to_string(fields.size()));
    for (std::size_t c = 0; c < schema.dim(); ++c)
      row[c] = parse_double(fields[c], path + ": line " + std::to_string(line_no));
    data.features.append_row(row);
    data.labels.push_back(
        parse_double(fields.back(), path + ": label") != 0.0 ? 1 : 0);
  }
  return data;
}

}  // namespace netadv

#endif  // NETADV_DATASET_IO_HPP

#ifndef NETADV_CONSTRAINTS_HPP
#define NETADV_CONSTRAINTS_HPP

#include <array>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "netadv/dataset.hpp"
#include "netadv/dataset_io.hpp"

namespace netadv {

// -------------------------------------------------------------------- types

enum class ViolationReason : int {
  one_hot_sum = 0,
  binary_domain = 1,
  service_protocol_mismatch = 2,
  flag_protocol_mismatch = 3,
  numeric_range = 4,
};

inline const char* violation_name(ViolationReason r) {
  switch (r) {
    case ViolationReason::one_hot_sum: return "ONE_HOT_SUM";
    case ViolationReason::binary_domain: return "BINARY_DOMAIN";
    case ViolationReason::service_protocol_mismatch: return "SERVICE_PROTOCOL_MISMATCH";
    case ViolationReason::flag_protocol_mismatch: return "FLAG_PROTOCOL_MISMATCH";
    case ViolationReason::numeric_range: return "NUMERIC_RANGE";
  }
  return "?";
}

struct Violation {
  ViolationReason reason;
  // offending encoded column for column-level reasons, group index (into
  // ConstraintSet::one_hot_groups) for ONE_HOT_SUM
  std::size_t index;

  bool operator==(const Violation&) const = default;
};

struct ValidityVerdict {
  bool valid = true;
  std::vector<Violation> violations;

  bool operator==(const ValidityVerdict&) const = default;
};

// per-protocol allowed secondary values
struct Implication {
  std::set<std::string> services;
  std::set<std::string> flags;

  bool operator==(const Implication&) const = default;
};

struct ConstraintSet {
  std::string primary_group;                       // the protocol one-hot group
  std::map<std::string, Implication> implications; // protocol -> allowed sets
  std::vector<OneHotGroup> one_hot_groups;
  std::vector<std::size_t> binary_columns;
  std::vector<std::array<double, 2>> numeric_ranges;  // per encoded column

  bool operator==(const ConstraintSet&) const = default;
};

// ---------------------------------------------------------------- derivation

// Allowed service/flag sets are the values co-occurring with each protocol in
// the data; groups and binary columns are copied from the schema.
inline ConstraintSet derive_constraints(const EncodedDataset& data) {
  const FeatureSchema& schema = data.schema;
  if (!schema.find_group("protocol_type"))
    throw DataError("derive_constraints: schema has no protocol_type group");
  ConstraintSet cs;
  cs.primary_group = "protocol_type";
  cs.one_hot_groups = schema.groups;
  cs.binary_columns = schema.binary_columns();
  cs.numeric_ranges.assign(schema.dim(), {0.0, 1.0});
  const bool has_service = schema.find_group("service") != nullptr;
  const bool has_flag = schema.find_group("flag") != nullptr;
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto row = data.row(i);
    std::string protocol = schema.decode_category(row, "protocol_type");
    Implication& imp = cs.implications[protocol];
    if (has_service) imp.services.insert(schema.decode_category(row, "service"));
    if (has_flag) imp.flags.insert(schema.decode_category(row, "flag"));
  }
  return cs;
}

// ---------------------------------------------------------------- projection

// Rounds binary and one-hot entries to the nearest of {0,1} (ties at 0.5 go
// to 1) and clips continuous entries to their allowed range.
inline void project_discrete_inplace(std::span<double> x, const FeatureSchema& schema,
                                     const std::vector<std::array<double, 2>>* ranges = nullptr) {
  for (std::size_t c = 0; c < schema.dim(); ++c) {
    const ColumnSpec& col = schema.columns[c];
    if (col.kind == ColumnKind::continuous) {
      double lo = ranges ? (*ranges)[c][0] : 0.0;
      double hi = ranges ? (*ranges)[c][1] : 1.0;
      x[c] = std::clamp(x[c], lo, hi);
    } else {
      x[c] = x[c] >= 0.5 ? 1.0 : 0.0;
    }
  }
}

inline std::vector<double> project_discrete(std::span<const double> x,
                                            const FeatureSchema& schema,
                                            const std::vector<std::array<double, 2>>* ranges = nullptr) {
  std::vector<double> out(x.begin(), x.end());
  project_discrete_inplace(out, schema, ranges);
  return out;
}

// ------------------------------------------------------------------ checking

// Collects violations in fixed order: one-hot sums, binary domains, the
// protocol->service and protocol->flag implications, numeric ranges. When any
// one-hot sum fails, the implication checks are skipped for the sample (its
// active categories are not well defined).
//
// Expects x to have passed through project_discrete.
inline ValidityVerdict check_validity(std::span<const double> x,
                                      const ConstraintSet& cs,
                                      const FeatureSchema& schema) {
  ValidityVerdict verdict;
  bool one_hot_ok = true;
  for (std::size_t g = 0; g < cs.one_hot_groups.size(); ++g) {
    double sum = 0.0;
    for (std::size_t c : cs.one_hot_groups[g].members) sum += x[c];
    if (sum != 1.0) {
      verdict.violations.push_back({ViolationReason::one_hot_sum, g});
      one_hot_ok = false;
    }
  }
  for (std::size_t c : cs.binary_columns) {
    if (x[c] != 0.0 && x[c] != 1.0)
      verdict.violations.push_back({ViolationReason::binary_domain, c});
  }
  if (one_hot_ok) {
    const OneHotGroup* service = schema.find_group("service");
    const OneHotGroup* flag = schema.find_group("flag");
    const OneHotGroup* primary = schema.find_group(cs.primary_group);
    int primary_active = -1;
    if (primary) {
      for (std::size_t c : primary->members)
        if (x[c] == 1.0) primary_active = static_cast<int>(c);
    }
    if (primary_active >= 0) {
      const std::string& protocol =
          schema.columns[static_cast<std::size_t>(primary_active)].source_category;
      auto it = cs.implications.find(protocol);
      if (service) {
        std::size_t active = service->members.front();
        for (std::size_t c : service->members)
          if (x[c] == 1.0) active = c;
        const std::string& value = schema.columns[active].source_category;
        if (it == cs.implications.end() || !it->second.services.count(value))
          verdict.violations.push_back(
              {ViolationReason::service_protocol_mismatch, active});
      }
      if (flag) {
        std::size_t active = flag->members.front();
        for (std::size_t c : flag->members)
          if (x[c] == 1.0) active = c;
        const std::string& value = schema.columns[active].source_category;
        if (it == cs.implications.end() || !it->second.flags.count(value))
          verdict.violations.push_back(
              {ViolationReason::flag_protocol_mismatch, active});
      }
    }
  }
  for (std::size_t c = 0; c < schema.dim(); ++c) {
    if (schema.columns[c].kind != ColumnKind::continuous) continue;
    double lo = c < cs.numeric_ranges.size() ? cs.numeric_ranges[c][0] : 0.0;
    double hi = c < cs.numeric_ranges.size() ? cs.numeric_ranges[c][1] : 1.0;
    if (x[c] < lo || x[c] > hi)
      verdict.violations.push_back({ViolationReason::numeric_range, c});
  }
  verdict.valid = verdict.violations.empty();
  return verdict;
}

// ------------------------------------------------------------- batch filter

struct FilterStats {
  std::size_t valid_count = 0;
  std::size_t invalid_count = 0;
  // reason -> number of samples with at least one violation of that reason
  std::array<std::size_t, 5> by_reason{};

  std::size_t reason_count(ViolationReason r) const {
    return by_reason[static_cast<std::size_t>(r)];
  }
};

struct RowFilterOutcome {
  Matrix projected;                       // every input row, projected
  std::vector<ValidityVerdict> verdicts;  // one per input row
  FilterStats stats;
};

// Algorithm core used by filter_batch: project every row, then keep only
// rows that satisfy the categorical and numerical dependencies.
inline RowFilterOutcome filter_rows(const Matrix& samples, const ConstraintSet& cs,
                                    const FeatureSchema& schema) {
  RowFilterOutcome out;
  out.projected = samples;
  out.verdicts.reserve(samples.rows());
  for (std::size_t i = 0; i < samples.rows(); ++i) {
    project_discrete_inplace(out.projected.row(i), schema, &cs.numeric_ranges);
    ValidityVerdict v = check_validity(out.projected.row(i), cs, schema);
    if (v.valid) {
      ++out.stats.valid_count;
    } else {
      ++out.stats.invalid_count;
      std::set<ViolationReason> seen;
      for (const auto& viol : v.violations) seen.insert(viol.reason);
      for (ViolationReason r : seen)
        ++out.stats.by_reason[static_cast<std::size_t>(r)];
    }
    out.verdicts.push_back(std::move(v));
  }
  return out;
}

// ----------------------------------------------------------- file interface

inline void save_constraints(const ConstraintSet& cs, const FeatureSchema& schema,
                             const std::string& path) {
  ordered_json doc;
  doc["primary_group"] = cs.primary_group;
  doc["implications"] = ordered_json::object();
  for (const auto& [protocol, imp] : cs.implications) {
    ordered_json entry;
    entry["services"] = std::vector<std::string>(imp.services.begin(), imp.services.end());
    entry["flags"] = std::vector<std::string>(imp.flags.begin(), imp.flags.end());
    doc["implications"][protocol] = entry;
  }
  doc["one_hot_groups"] = ordered_json::array();
  for (const auto& g : cs.one_hot_groups) {
    ordered_json j;
    j["id"] = g.id;
    j["members"] = g.members;
    doc["one_hot_groups"].push_back(j);
  }
  doc["binary_columns"] = cs.binary_columns;
  doc["numeric_ranges"] = ordered_json::object();
  for (std::size_t c = 0; c < cs.numeric_ranges.size(); ++c) {
    if (cs.numeric_ranges[c][0] == 0.0 && cs.numeric_ranges[c][1] == 1.0) continue;
    doc["numeric_ranges"][schema.columns[c].name] = cs.numeric_ranges[c];
  }
  save_json_file(path, doc);
}

inline ConstraintSet load_constraints(const std::string& path,
                                      const FeatureSchema& schema) {
  ordered_json doc = load_json_file(path);
  ConstraintSet cs;
  cs.primary_group = doc.at("primary_group").get<std::string>();
  const OneHotGroup* primary = schema.find_group(cs.primary_group);
  if (!primary)
    throw DataError(path + ": primary group '" + cs.primary_group +
                    "' not in schema");
  for (const auto& [protocol, entry] : doc.at("implications").items()) {
    if (schema.member_index(cs.primary_group, protocol) < 0)
      throw DataError(path + ": implication for unknown protocol '" + protocol + "'");
    Implication imp;
    for (const auto& s : entry.at("services")) {
      std::string name = s.get<std::string>();
      if (schema.member_index("service", name) < 0)
        throw DataError(path + ": unknown service '" + name + "'");
      imp.services.insert(name);
    }
    for (const auto& f : entry.at("flags")) {
      std::string name = f.get<std::string>();
      if (schema.member_index("flag", name) < 0)
        throw DataError(path + ": unknown flag '" + name + "'");
      imp.flags.insert(name);
    }
    if (imp.services.empty())
      throw DataError(path + ": empty allowed service set for '" + protocol + "'");
    if (imp.flags.empty())
      throw DataError(path + ": empty allowed flag set for '" + protocol + "'");
    cs.implications[protocol] = std::move(imp);
  }
  for (const auto& g : doc.at("one_hot_groups")) {
    OneHotGroup group;
    group.id = g.at("id").get<std::string>();
    const OneHotGroup* in_schema = schema.find_group(group.id);
    if (!in_schema)
      throw DataError(path + ": one-hot group '" + group.id + "' not in schema");
    for (const auto& m : g.at("members")) {
      std::size_t idx = m.get<std::size_t>();
      if (idx >= schema.dim())
        throw DataError(path + ": group member column out of range");
      group.members.push_back(idx);
    }
    cs.one_hot_groups.push_back(std::move(group));
  }
  for (const auto& b : doc.at("binary_columns")) {
    std::size_t idx = b.get<std::size_t>();
    if (idx >= schema.dim())
      throw DataError(path + ": binary column out of range");
    cs.binary_columns.push_back(idx);
  }
  cs.numeric_ranges.assign(schema.dim(), {0.0, 1.0});
  if (doc.contains("numeric_ranges")) {
    for (const auto& [name, range] : doc.at("numeric_ranges").items()) {
      bool found = false;
      for (std::size_t c = 0; c < schema.dim(); ++c) {
        if (schema.columns[c].name == name) {
          cs.numeric_ranges[c] = {range.at(0).get<double>(), range.at(1).get<double>()};
          found = true;
          break;
        }
      }
      if (!found) throw DataError(path + ": numeric range for unknown column '" + name + "'");
    }
  }
  return cs;
}

}  // namespace netadv

#endif  // NETADV_CONSTRAINTS_HPP

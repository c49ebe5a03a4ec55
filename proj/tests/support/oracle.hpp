#ifndef NETADV_TESTS_ORACLE_HPP
#define NETADV_TESTS_ORACLE_HPP

// Brute-force rule checker used as an independent oracle for the constraint
// filter. Everything here is written directly from the rule definitions with
// naive loops; it deliberately shares no helper code with the implementation.

#include <cmath>
#include <string>
#include <vector>

#include "netadv/constraints.hpp"
#include "netadv/dataset.hpp"

namespace netadv::testing {

inline std::vector<double> oracle_project(const std::vector<double>& x,
                                          const FeatureSchema& schema,
                                          const ConstraintSet& cs) {
  std::vector<double> out = x;
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    const ColumnSpec& col = schema.columns[c];
    if (col.kind == ColumnKind::binary || col.kind == ColumnKind::one_hot_member) {
      // nearest of {0,1}, ties to 1
      double d0 = std::fabs(out[c] - 0.0);
      double d1 = std::fabs(out[c] - 1.0);
      out[c] = (d1 <= d0) ? 1.0 : 0.0;
    } else {
      double lo = cs.numeric_ranges[c][0], hi = cs.numeric_ranges[c][1];
      if (out[c] < lo) out[c] = lo;
      if (out[c] > hi) out[c] = hi;
    }
  }
  return out;
}

struct OracleVerdict {
  bool valid = true;
  std::vector<Violation> violations;
};

inline OracleVerdict oracle_check(const std::vector<double>& x,
                                  const ConstraintSet& cs,
                                  const FeatureSchema& schema) {
  OracleVerdict v;
  bool any_group_bad = false;
  for (std::size_t g = 0; g < cs.one_hot_groups.size(); ++g) {
    double sum = 0.0;
    for (std::size_t c : cs.one_hot_groups[g].members) sum += x[c];
    if (sum != 1.0) {
      v.violations.push_back({ViolationReason::one_hot_sum, g});
      any_group_bad = true;
    }
  }
  for (std::size_t c : cs.binary_columns) {
    if (!(x[c] == 0.0 || x[c] == 1.0))
      v.violations.push_back({ViolationReason::binary_domain, c});
  }
  if (!any_group_bad) {
    // resolve the active category of a group by scanning for the 1 entry
    auto active_of = [&](const std::string& id) -> int {
      for (const auto& g : schema.groups) {
        if (g.id != id) continue;
        int hot = -1;
        for (std::size_t c : g.members)
          if (x[c] == 1.0) hot = static_cast<int>(c);
        return hot;
      }
      return -1;
    };
    int proto_col = active_of(cs.primary_group);
    int svc_col = active_of("service");
    int flag_col = active_of("flag");
    if (proto_col >= 0) {
      const std::string protocol = schema.columns[proto_col].source_category;
      bool has_imp = cs.implications.count(protocol) > 0;
      if (svc_col >= 0 || schema.find_group("service")) {
        std::size_t report = svc_col >= 0
                                 ? static_cast<std::size_t>(svc_col)
                                 : schema.find_group("service")->members.front();
        bool ok = false;
        if (has_imp && svc_col >= 0) {
          for (const auto& s : cs.implications.at(protocol).services)
            if (s == schema.columns[svc_col].source_category) ok = true;
        }
        if (!ok)
          v.violations.push_back({ViolationReason::service_protocol_mismatch, report});
      }
      if (flag_col >= 0 || schema.find_group("flag")) {
        std::size_t report = flag_col >= 0
                                 ? static_cast<std::size_t>(flag_col)
                                 : schema.find_group("flag")->members.front();
        bool ok = false;
        if (has_imp && flag_col >= 0) {
          for (const auto& f : cs.implications.at(protocol).flags)
            if (f == schema.columns[flag_col].source_category) ok = true;
        }
        if (!ok)
          v.violations.push_back({ViolationReason::flag_protocol_mismatch, report});
      }
    }
  }
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    if (schema.columns[c].kind != ColumnKind::continuous) continue;
    if (x[c] < cs.numeric_ranges[c][0] || x[c] > cs.numeric_ranges[c][1])
      v.violations.push_back({ViolationReason::numeric_range, c});
  }
  v.valid = v.violations.empty();
  return v;
}

}  // namespace netadv::testing

#endif

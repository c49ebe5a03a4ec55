#ifndef NETADV_TESTS_FIXTURES_HPP
#define NETADV_TESTS_FIXTURES_HPP

#include <sstream>
#include <string>
#include <vector>

#include "netadv/constraints.hpp"
#include "netadv/csv.hpp"
#include "netadv/dataset.hpp"

namespace netadv::testing {

struct SynthFixture {
  std::vector<RawRecord> records;
  FeatureSchema schema;
  EncodedDataset data;
  ConstraintSet constraints;
};

inline SynthFixture make_synth_fixture(std::size_t n = 800, std::uint64_t seed = 7) {
  SynthFixture f;
  f.records = synth_dataset(seed, n);
  f.schema = build_schema(f.records);
  f.data = encode(f.records, f.schema);
  f.constraints = derive_constraints(f.data);
  return f;
}

// renders a RawRecord back to an NSL-KDD CSV line (43 fields)
inline std::string record_to_csv(const RawRecord& rec) {
  std::ostringstream out;
  const auto& cols = nslkdd_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out << ',';
    if (cols[i].kind == RawKind::categorical) {
      out << (i == 1 ? rec.protocol : i == 2 ? rec.service : rec.flag);
    } else {
      out << format_double(rec.numeric[raw_numeric_slot(i)]);
    }
  }
  out << ',' << rec.label;
  if (rec.difficulty >= 0) out << ',' << rec.difficulty;
  return out.str();
}

inline std::string records_to_csv(const std::vector<RawRecord>& records) {
  std::ostringstream out;
  for (const auto& r : records) out << record_to_csv(r) << '\n';
  return out.str();
}

}  // namespace netadv::testing

#endif

#ifndef NETADV_DATASET_HPP
#define NETADV_DATASET_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "netadv/csv.hpp"
#include "netadv/error.hpp"
#include "netadv/matrix.hpp"
#include "netadv/random.hpp"

namespace netadv {

// ---------------------------------------------------------------- raw layout

enum class RawKind { continuous, binary, categorical };

struct RawColumn {
  const char* name;
  RawKind kind;
};

// the 41 NSL-KDD feature columns, in file order
inline const std::array<RawColumn, 41>& nslkdd_columns() {
  static const std::array<RawColumn, 41> cols = {{
      {"duration", RawKind::continuous},
      {"protocol_type", RawKind::categorical},
      {"service", RawKind::categorical},
      {"flag", RawKind::categorical},
      {"src_bytes", RawKind::continuous},
      {"dst_bytes", RawKind::continuous},
      {"land", RawKind::binary},
      {"wrong_fragment", RawKind::continuous},
      {"urgent", RawKind::continuous},
      {"hot", RawKind::continuous},
      {"num_failed_logins", RawKind::continuous},
      {"logged_in", RawKind::binary},
      {"num_compromised", RawKind::continuous},
      {"root_shell", RawKind::binary},
      {"su_attempted", RawKind::binary},
      {"num_root", RawKind::continuous},
      {"num_file_creations", RawKind::continuous},
      {"num_shells", RawKind::continuous},
      {"num_access_files", RawKind::continuous},
      {"num_outbound_cmds", RawKind::continuous},
      {"is_host_login", RawKind::binary},
      {"is_guest_login", RawKind::binary},
      {"count", RawKind::continuous},
      {"srv_count", RawKind::continuous},
      {"serror_rate", RawKind::continuous},
      {"srv_serror_rate", RawKind::continuous},
      {"rerror_rate", RawKind::continuous},
      {"srv_rerror_rate", RawKind::continuous},
      {"same_srv_rate", RawKind::continuous},
      {"diff_srv_rate", RawKind::continuous},
      {"srv_diff_host_rate", RawKind::continuous},
      {"dst_host_count", RawKind::continuous},
      {"dst_host_srv_count", RawKind::continuous},
      {"dst_host_same_srv_rate", RawKind::continuous},
      {"dst_host_diff_srv_rate", RawKind::continuous},
      {"dst_host_same_src_port_rate", RawKind::continuous},
      {"dst_host_srv_diff_host_rate", RawKind::continuous},
      {"dst_host_serror_rate", RawKind::continuous},
      {"dst_host_srv_serror_rate", RawKind::continuous},
      {"dst_host_rerror_rate", RawKind::continuous},
      {"dst_host_srv_rerror_rate", RawKind::continuous},
  }};
  return cols;
}

inline const std::set<std::string>& nslkdd_flags() {
  static const std::set<std::string> flags = {"OTH", "REJ",  "RSTO", "RSTOS0",
                                              "RSTR", "S0",  "S1",   "S2",
                                              "S3",   "SF",  "SH"};
  return flags;
}

// maps a raw column index to its slot in RawRecord::numeric (-1 for categorical)
inline int raw_numeric_slot(std::size_t raw_index) {
  static const std::vector<int> table = [] {
    std::vector<int> t;
    int slot = 0;
    for (const auto& col : nslkdd_columns())
      t.push_back(col.kind == RawKind::categorical ? -1 : slot++);
    return t;
  }();
  return table[raw_index];
}

struct RawRecord {
  std::string protocol;
  std::string service;
  std::string flag;
  std::vector<double> numeric;  // 38 non-categorical features, in column order
  std::string label;
  int difficulty = -1;  // optional trailing column, parsed and otherwise unused

  bool is_malicious() const { return label != "normal"; }
  bool operator==(const RawRecord&) const = default;
};

// ------------------------------------------------------------------- parsing

inline RawRecord parse_nslkdd_line(const std::vector<std::string>& fields,
                                   std::size_t line_no) {
  const auto& cols = nslkdd_columns();
  RawRecord rec;
  rec.numeric.reserve(38);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    const std::string& f = fields[i];
    switch (cols[i].kind) {
      case RawKind::categorical: {
        if (i == 1)
          rec.protocol = trim(f);
        else if (i == 2)
          rec.service = trim(f);
        else
          rec.flag = trim(f);
        break;
      }
      default:
        rec.numeric.push_back(parse_double(
            f, "line " + std::to_string(line_no) + ", column " + cols[i].name));
    }
  }
  if (rec.protocol != "tcp" && rec.protocol != "udp" && rec.protocol != "icmp")
    throw ParseError("line " + std::to_string(line_no) +
                     ": unknown protocol_type '" + rec.protocol + "'");
  if (!nslkdd_flags().count(rec.flag))
    throw ParseError("line " + std::to_string(line_no) + ": unknown flag '" +
                     rec.flag + "'");
  rec.label = trim(fields[41]);
  if (fields.size() == 43)
    rec.difficulty = static_cast<int>(parse_double(
        fields[42], "line " + std::to_string(line_no) + ", column difficulty"));
  return rec;
}

inline std::vector<RawRecord> parse_nslkdd(std::istream& source) {
  std::vector<RawRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 42 && fields.size() != 43)
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected 42 or 43 fields, got " +
                       std::to_string(fields.size()));
    records.push_back(parse_nslkdd_line(fields, line_no));
  }
  return records;
}

inline std::vector<RawRecord> parse_nslkdd_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path);
  return parse_nslkdd(in);
}

// -------------------------------------------------------------------- schema

enum class ColumnKind { continuous, binary, one_hot_member };

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::continuous;
  std::string group;            // one-hot members: id of the owning group
  std::string source_category;  // one-hot members: the raw categorical value
  double train_min = 0.0;
  double train_max = 1.0;

  bool operator==(const ColumnSpec&) const = default;
};

struct OneHotGroup {
  std::string id;                   // raw column name (protocol_type/service/flag)
  std::vector<std::size_t> members; // encoded column indices, category-sorted

  bool operator==(const OneHotGroup&) const = default;
};

class FeatureSchema {
 public:
  std::vector<ColumnSpec> columns;
  std::vector<OneHotGroup> groups;

  std::size_t dim() const { return columns.size(); }

  const OneHotGroup* find_group(const std::string& id) const {
    for (const auto& g : groups)
      if (g.id == id) return &g;
    return nullptr;
  }

  // encoded column index of a category inside a group, -1 if absent
  int member_index(const std::string& group_id, const std::string& category) const {
    const OneHotGroup* g = find_group(group_id);
    if (!g) return -1;
    for (std::size_t c : g->members)
      if (columns[c].source_category == category) return static_cast<int>(c);
    return -1;
  }

  std::vector<std::size_t> binary_columns() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i].kind == ColumnKind::binary) out.push_back(i);
    return out;
  }

  // raw categorical value encoded in a row's group; requires exactly one hot
  std::string decode_category(std::span<const double> row,
                              const std::string& group_id) const {
    const OneHotGroup* g = find_group(group_id);
    if (!g) throw DataError("no such one-hot group: " + group_id);
    int hot = -1;
    for (std::size_t c : g->members) {
      if (row[c] == 1.0) {
        if (hot >= 0) throw DataError("group " + group_id + " is multi-hot");
        hot = static_cast<int>(c);
      }
    }
    if (hot < 0) throw DataError("group " + group_id + " has no active member");
    return columns[hot].source_category;
  }

  bool operator==(const FeatureSchema&) const = default;
};

inline FeatureSchema build_schema(const std::vector<RawRecord>& records) {
  if (records.empty()) throw DataError("build_schema: no records");
  const auto& raw = nslkdd_columns();
  FeatureSchema schema;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    switch (raw[i].kind) {
      case RawKind::categorical: {
        std::set<std::string> values;  // sorted, so member order is deterministic
        for (const auto& r : records) {
          if (i == 1) values.insert(r.protocol);
          else if (i == 2) values.insert(r.service);
          else values.insert(r.flag);
        }
        OneHotGroup group;
        group.id = raw[i].name;
        for (const auto& v : values) {
          group.members.push_back(schema.columns.size());
          ColumnSpec spec;
          spec.name = std::string(raw[i].name) + "_" + v;
          spec.kind = ColumnKind::one_hot_member;
          spec.group = raw[i].name;
          spec.source_category = v;
          spec.train_min = 0.0;
          spec.train_max = 1.0;
          schema.columns.push_back(spec);
        }
        schema.groups.push_back(std::move(group));
        break;
      }
      case RawKind::binary: {
        ColumnSpec spec;
        spec.name = raw[i].name;
        spec.kind = ColumnKind::binary;
        spec.train_min = 0.0;
        spec.train_max = 1.0;
        schema.columns.push_back(spec);
        break;
      }
      case RawKind::continuous: {
        int slot = raw_numeric_slot(i);
        double lo = records[0].numeric[slot], hi = records[0].numeric[slot];
        for (const auto& r : records) {
          lo = std::min(lo, r.numeric[slot]);
          hi = std::max(hi, r.numeric[slot]);
        }
        ColumnSpec spec;
        spec.name = raw[i].name;
        spec.kind = ColumnKind::continuous;
        spec.train_min = lo;
        spec.train_max = hi;
        schema.columns.push_back(spec);
        break;
      }
    }
  }
  return schema;
}

// ------------------------------------------------------------------ encoding

struct EncodedDataset {
  Matrix features;          // rows = samples, columns per schema
  std::vector<int> labels;  // 1 = malicious, 0 = benign
  FeatureSchema schema;

  std::size_t size() const { return features.rows(); }
  std::span<const double> row(std::size_t i) const { return features.row(i); }
};

inline std::vector<double> encode_record(const RawRecord& rec,
                                         const FeatureSchema& schema) {
  std::vector<double> row(schema.dim(), 0.0);
  const auto& raw = nslkdd_columns();
  std::size_t out = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i].kind == RawKind::categorical) {
      const std::string& value =
          (i == 1) ? rec.protocol : (i == 2) ? rec.service : rec.flag;
      int idx = schema.member_index(raw[i].name, value);
      if (idx < 0)
        throw DataError(std::string("encode: unseen value '") + value +
                        "' in column " + raw[i].name);
      row[idx] = 1.0;
      out += schema.find_group(raw[i].name)->members.size();
    } else {
      double v = rec.numeric[raw_numeric_slot(i)];
      const ColumnSpec& spec = schema.columns[out];
      if (spec.kind == ColumnKind::continuous) {
        double span = spec.train_max - spec.train_min;
        v = (span == 0.0) ? 0.0 : (v - spec.train_min) / span;
        v = std::clamp(v, 0.0, 1.0);
      }
      row[out] = v;
      ++out;
    }
  }
  return row;
}

inline EncodedDataset encode(const std::vector<RawRecord>& records,
                             const FeatureSchema& schema) {
  EncodedDataset data;
  data.schema = schema;
  data.features = Matrix(records.size(), schema.dim());
  data.labels.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto row = encode_record(records[i], schema);
    std::copy(row.begin(), row.end(), data.features.row(i).begin());
    data.labels.push_back(records[i].is_malicious() ? 1 : 0);
  }
  return data;
}

inline std::pair<EncodedDataset, EncodedDataset> split_traffic(
    const EncodedDataset& data) {
  EncodedDataset benign, malicious;
  benign.schema = malicious.schema = data.schema;
  benign.features = Matrix(0, data.schema.dim());
  malicious.features = Matrix(0, data.schema.dim());
  for (std::size_t i = 0; i < data.size(); ++i) {
    EncodedDataset& part = data.labels[i] ? malicious : benign;
    part.features.append_row(data.row(i));
    part.labels.push_back(data.labels[i]);
  }
  return {std::move(benign), std::move(malicious)};
}

// stratified by label, deterministic; returned index lists keep input order
inline std::pair<std::vector<RawRecord>, std::vector<RawRecord>> train_test_split(
    const std::vector<RawRecord>& records, double test_fraction,
    std::uint64_t seed) {
  if (test_fraction < 0.0 || test_fraction >= 1.0)
    throw DataError("train_test_split: test_fraction must be in [0, 1)");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < records.size(); ++i)
    by_class[records[i].is_malicious() ? 1 : 0].push_back(i);
  std::vector<bool> is_test(records.size(), false);
  Rng rng(mix_seed(seed, 0x5117));
  for (auto& idx : by_class) {
    rng.shuffle(idx);
    std::size_t n_test = static_cast<std::size_t>(
        std::floor(test_fraction * static_cast<double>(idx.size())));
    for (std::size_t k = 0; k < n_test; ++k) is_test[idx[k]] = true;
  }
  std::vector<RawRecord> train, test;
  for (std::size_t i = 0; i < records.size(); ++i)
    (is_test[i] ? test : train).push_back(records[i]);
  return {std::move(train), std::move(test)};
}

// -------------------------------------------------------- synthetic corpus

// miniature vocabulary used by the built-in generator
struct SynthVocabulary {
  std::vector<std::string> protocols;
  std::map<std::string, std::vector<std::string>> services;  // protocol -> services
  std::map<std::string, std::vector<std::string>> flags;     // protocol -> flags
};

inline const SynthVocabulary& synth_vocabulary() {
  static const SynthVocabulary vocab = {
      {"tcp", "udp", "icmp"},
      {{"tcp", {"http", "smtp", "ftp_data", "ssh"}},
       {"udp", {"domain_u", "ntp_u", "tftp_u"}},
       {"icmp", {"ecr_i"}}},
      {{"tcp", {"SF", "S0", "REJ", "RSTR"}},
       {"udp", {"SF"}},
       {"icmp", {"SF"}}},
  };
  return vocab;
}

namespace detail {

inline double round2(double v) { return std::round(v * 100.0) / 100.0; }

inline bool u_chance(Rng& rng, double p) { return rng.next_unit() < p; }

template <typename... P>
inline std::size_t pick_weighted(Rng& rng, P... weights) {
  const double w[] = {static_cast<double>(weights)...};
  double total = 0.0;
  for (double x : w) total += x;
  double u = rng.next_unit() * total;
  std::size_t i = 0;
  for (; i + 1 < sizeof...(weights); ++i) {
    if (u < w[i]) break;
    u -= w[i];
  }
  return i;
}

}  // namespace detail

// Deterministic corpus in NSL-KDD layout: 3 protocols, 8 services with a fixed
// protocol-compatibility table, 4 flags. Benign and malicious modes differ in
// their continuous-feature distributions; the malicious mode mixes scan-like
// records (S0/REJ flags, high counts) with a quieter SF-flagged population.
inline std::vector<RawRecord> synth_dataset(std::uint64_t seed, std::size_t n) {
  const SynthVocabulary& vocab = synth_vocabulary();
  std::vector<RawRecord> records;
  records.reserve(n);
  Rng rng(seed);

  for (std::size_t i = 0; i < n; ++i) {
    bool malicious = rng.next_unit() < 0.5;
    RawRecord rec;

    std::size_t p = malicious ? detail::pick_weighted(rng, 0.80, 0.12, 0.08)
                              : detail::pick_weighted(rng, 0.72, 0.20, 0.08);
    rec.protocol = vocab.protocols[p];

    // malicious traffic concentrates on the scan/bruteforce-prone services
    const auto& svc = vocab.services.at(rec.protocol);
    if (rec.protocol == "tcp") {
      // http smtp ftp_data ssh
      std::size_t s = malicious ? detail::pick_weighted(rng, 0.07, 0.03, 0.20, 0.70)
                                : detail::pick_weighted(rng, 0.57, 0.25, 0.15, 0.03);
      rec.service = svc[s];
    } else if (rec.protocol == "udp") {
      // domain_u ntp_u tftp_u
      std::size_t s = malicious ? detail::pick_weighted(rng, 0.25, 0.10, 0.65)
                                : detail::pick_weighted(rng, 0.65, 0.30, 0.05);
      rec.service = svc[s];
    } else {
      rec.service = svc[static_cast<std::size_t>(
          rng.next_int(0, static_cast<long>(svc.size()) - 1))];
    }

    if (rec.protocol == "tcp") {
      const auto& fl = vocab.flags.at("tcp");  // SF S0 REJ RSTR
      std::size_t f = malicious ? detail::pick_weighted(rng, 0.18, 0.45, 0.25, 0.12)
                                : detail::pick_weighted(rng, 0.83, 0.05, 0.08, 0.04);
      rec.flag = fl[f];
    } else {
      rec.flag = "SF";
    }

    bool s0 = rec.flag == "S0";
    bool rej = rec.flag == "REJ";

    // Volume profile, deliberately decoupled from the label: malicious SF
    // traffic is quiet (bruteforce-style) and some benign traffic is bursty
    // (monitoring, health checks), so neither flags nor volumes separate the
    // classes on their own.
    bool quiet = malicious && rec.protocol == "tcp" && rec.flag == "SF";
    bool scan;
    if (malicious) {
      scan = !quiet;
    } else if (rec.protocol == "tcp") {
      scan = rec.flag != "SF" ? detail::u_chance(rng, 0.7) : detail::u_chance(rng, 0.15);
    } else {
      scan = detail::u_chance(rng, 0.12);
    }

    auto u = [&] { return rng.next_unit(); };
    auto ri = [&](long lo, long hi) { return static_cast<double>(rng.next_int(lo, hi)); };
    auto r2 = detail::round2;

    std::vector<double>& x = rec.numeric;
    x.reserve(38);

    // duration, src_bytes, dst_bytes
    if (scan) {
      x.push_back(u() < 0.85 ? 0.0 : ri(0, 5));
      x.push_back(u() < 0.55 ? 0.0 : ri(0, 300));
      x.push_back(u() < 0.85 ? 0.0 : ri(0, 200));
    } else if (quiet) {
      x.push_back(ri(0, 20));
      x.push_back(u() < 0.2 ? 0.0 : ri(0, 300));
      x.push_back(u() < 0.4 ? 0.0 : ri(0, 200));
    } else {
      x.push_back(u() < 0.5 ? 0.0 : ri(1, 120));
      x.push_back(ri(80, 2000));
      x.push_back(u() < 0.25 ? 0.0 : ri(100, 4000));
    }
    x.push_back(malicious && u() < 0.01 ? 1.0 : 0.0);                 // land
    x.push_back(malicious && u() < 0.04 ? ri(1, 3) : 0.0);            // wrong_fragment
    x.push_back(u() < 0.995 ? 0.0 : 1.0);                             // urgent
    x.push_back(u() < (malicious ? 0.95 : 0.90) ? 0.0 : ri(1, 6));    // hot
    x.push_back(u() < (malicious ? 0.85 : 0.98) ? 0.0 : ri(1, 4));    // num_failed_logins
    x.push_back(u() < (malicious ? (quiet ? 0.65 : 0.95) : 0.25) ? 0.0 : 1.0);  // logged_in
    x.push_back(u() < 0.98 ? 0.0 : ri(1, 3));                         // num_compromised
    x.push_back(u() < (malicious ? 0.97 : 0.99) ? 0.0 : 1.0);         // root_shell
    x.push_back(u() < 0.995 ? 0.0 : 1.0);                             // su_attempted
    x.push_back(u() < 0.99 ? 0.0 : ri(1, 2));                         // num_root
    x.push_back(u() < 0.99 ? 0.0 : ri(1, 2));                         // num_file_creations
    x.push_back(u() < 0.995 ? 0.0 : 1.0);                             // num_shells
    x.push_back(u() < 0.99 ? 0.0 : ri(1, 2));                         // num_access_files
    x.push_back(0.0);                                                 // num_outbound_cmds
    x.push_back(u() < 0.998 ? 0.0 : 1.0);                             // is_host_login
    x.push_back(u() < (malicious ? 0.95 : 0.98) ? 0.0 : 1.0);         // is_guest_login

    // connection counts
    double count = scan ? ri(250, 511) : (quiet ? ri(5, 90) : ri(1, 40));
    x.push_back(count);
    x.push_back(std::max(1.0, std::floor(count * ((scan || quiet) ? (0.5 + 0.5 * u())
                                                                  : (0.2 + 0.5 * u())))));

    double serror = s0 ? r2(0.70 + 0.30 * u())
                       : ((scan || quiet) ? r2(0.10 * u()) : r2(0.05 * u()));
    double rerror = rej ? r2(0.70 + 0.30 * u())
                        : ((scan || quiet) ? r2(0.10 * u()) : r2(0.04 * u()));
    x.push_back(serror);                                   // serror_rate
    x.push_back(r2(std::min(1.0, serror + 0.05 * u())));   // srv_serror_rate
    x.push_back(rerror);                                   // rerror_rate
    x.push_back(r2(std::min(1.0, rerror + 0.05 * u())));   // srv_rerror_rate

    double same_srv = scan ? r2(0.25 * u())
                           : (quiet ? r2(0.40 + 0.50 * u()) : r2(0.85 + 0.15 * u()));
    x.push_back(same_srv);                                 // same_srv_rate
    x.push_back(r2(std::min(1.0, (1.0 - same_srv) * (0.4 + 0.6 * u()))));  // diff_srv_rate
    x.push_back(r2((malicious ? 0.3 : 0.15) * u()));       // srv_diff_host_rate

    // destination-host aggregates
    if (scan) {
      x.push_back(ri(220, 255));           // dst_host_count
      x.push_back(ri(1, 40));              // dst_host_srv_count
      x.push_back(r2(0.25 * u()));         // dst_host_same_srv_rate
      x.push_back(r2(0.30 + 0.50 * u()));  // dst_host_diff_srv_rate
      x.push_back(r2(0.40 + 0.60 * u()));  // dst_host_same_src_port_rate
    } else if (quiet) {
      x.push_back(ri(40, 255));
      x.push_back(ri(5, 160));
      x.push_back(r2(0.25 + 0.55 * u()));
      x.push_back(r2(0.05 + 0.30 * u()));
      x.push_back(r2(0.10 + 0.40 * u()));
    } else {
      x.push_back(ri(5, 100));
      x.push_back(ri(10, 255));
      x.push_back(r2(0.70 + 0.30 * u()));
      x.push_back(r2(0.15 * u()));
      x.push_back(r2(0.25 * u()));
    }
    x.push_back(r2((malicious ? 0.25 : 0.10) * u()));      // dst_host_srv_diff_host_rate
    x.push_back(r2(std::min(1.0, serror + 0.04 * u())));   // dst_host_serror_rate
    x.push_back(r2(std::min(1.0, serror + 0.06 * u())));   // dst_host_srv_serror_rate
    x.push_back(r2(std::min(1.0, rerror + 0.04 * u())));   // dst_host_rerror_rate
    x.push_back(r2(std::min(1.0, rerror + 0.06 * u())));   // dst_host_srv_rerror_rate

    if (malicious) {
      static const char* attacks[] = {"neptune", "portsweep", "smurf", "teardrop"};
      rec.label = s0 ? "neptune"
                     : attacks[static_cast<std::size_t>(rng.next_int(0, 3))];
    } else {
      rec.label = "normal";
    }
    rec.difficulty = static_cast<int>(rng.next_int(1, 21));
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace netadv

#endif  // NETADV_DATASET_HPP

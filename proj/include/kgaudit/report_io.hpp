#pragma once

// JSON / CSV / JSONL serialisation of findings, rules, metrics and manifests.

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgaudit/baseline_predictors.hpp"
#include "kgaudit/dataset_derive.hpp"
#include "kgaudit/eval_harness.hpp"
#include "kgaudit/kg_store.hpp"
#include "kgaudit/redundancy_audit.hpp"

namespace kgaudit::io {

using nlohmann::json;

inline double round_to(double v, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(v * scale) / scale;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

inline std::string fixed(double v, int decimals) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(decimals);
  ss << v;
  return ss.str();
}

inline json stats_json(const DatasetStats& s) {
  return {{"entities", s.entities},
          {"relations", s.relations},
          {"train", s.triples[0]},
          {"valid", s.triples[1]},
          {"test", s.triples[2]}};
}

inline json finding_json(const Dataset& ds, const RedundancyFinding& f) {
  json rels = json::array({ds.relations().name(f.first)});
  if (f.is_pair()) rels.push_back(ds.relations().name(f.second));
  json j{{"kind", kind_name(f.kind)}, {"relations", rels}, {"ratio1", f.ratio1}};
  if (f.kind != FindingKind::cartesian) j["ratio2"] = f.ratio2;
  return j;
}

inline json findings_json(const Dataset& ds, const std::vector<RedundancyFinding>& findings) {
  json arr = json::array();
  for (const auto& f : findings) arr.push_back(finding_json(ds, f));
  return arr;
}

inline std::string findings_csv(const Dataset& ds, const std::vector<RedundancyFinding>& findings) {
  std::string out = "kind,relation1,relation2,ratio1,ratio2\n";
  for (const auto& f : findings) {
    out += std::string(kind_name(f.kind)) + ',' + csv_field(ds.relations().name(f.first)) + ',' +
           (f.is_pair() ? csv_field(ds.relations().name(f.second)) : std::string()) + ',' + fixed(f.ratio1, 6) + ',' +
           (f.kind == FindingKind::cartesian ? std::string() : fixed(f.ratio2, 6)) + '\n';
  }
  return out;
}

inline json histogram_json(const CodeHistogram& h) {
  json j = json::object();
  for (std::uint8_t c = 0; c < 16; ++c)
    if (h[c] != 0) j[RedundancyCode{c}.str()] = h[c];
  return j;
}

inline json rules_json(const Dataset& ds, const std::vector<IntersectionRule>& rules) {
  json arr = json::array();
  for (const auto& r : rules)
    arr.push_back({{"source", ds.relations().name(r.source)},
                   {"target", ds.relations().name(r.target)},
                   {"orientation", orientation_name(r.orientation)},
                   {"confidence", r.confidence}});
  return arr;
}

/// MR/FMR to one decimal, MRR/FMRR to three, hits percentages to one.
inline json metrics_json(const Metrics& m) {
  json hits = json::object(), fhits = json::object();
  for (const auto& [k, v] : m.hits) hits[std::to_string(k)] = round_to(v, 1);
  for (const auto& [k, v] : m.fhits) fhits[std::to_string(k)] = round_to(v, 1);
  return {{"n", m.count},
          {"mr", round_to(m.mr, 1)},
          {"fmr", round_to(m.fmr, 1)},
          {"mrr", round_to(m.mrr, 3)},
          {"fmrr", round_to(m.fmrr, 3)},
          {"hits", hits},
          {"fhits", fhits}};
}

inline json report_json(const MetricsReport& r) {
  json groups = json::object();
  for (const auto& [name, list] : r.breakdowns) {
    json arr = json::array();
    for (const auto& g : list) {
      json gj = metrics_json(g.metrics);
      gj["key"] = g.key;
      arr.push_back(std::move(gj));
    }
    groups[name] = std::move(arr);
  }
  return {{"ks", r.ks}, {"overall", metrics_json(r.overall)}, {"breakdowns", groups}};
}

/// relation, n, MR, FMR, MRR, FMRR, H@1, FH@1, H@10, FH@10
inline std::string group_csv(const std::vector<GroupMetrics>& groups, const std::string& key_header = "relation") {
  auto hit = [](const std::map<int, double>& m, int k) {
    auto it = m.find(k);
    return it == m.end() ? std::string() : fixed(it->second, 1);
  };
  std::string out = key_header + ",n,MR,FMR,MRR,FMRR,H@1,FH@1,H@10,FH@10\n";
  for (const auto& g : groups) {
    const auto& m = g.metrics;
    out += csv_field(g.key) + ',' + std::to_string(m.count) + ',' + fixed(m.mr, 1) + ',' + fixed(m.fmr, 1) + ',' +
           fixed(m.mrr, 3) + ',' + fixed(m.fmrr, 3) + ',' + hit(m.hits, 1) + ',' + hit(m.fhits, 1) + ',' +
           hit(m.hits, 10) + ',' + hit(m.fhits, 10) + '\n';
  }
  return out;
}

inline std::string rankings_jsonl(const Dataset& ds, const std::vector<RankResult>& results) {
  std::string out;
  for (const auto& r : results) {
    const auto n = ds.named(ds.test().at(r.test_index));
    json j{{"head", n.head},
           {"relation", n.relation},
           {"tail", n.tail},
           {"direction", direction_name(r.direction)},
           {"raw_rank", r.raw_rank},
           {"filtered_rank", r.filtered_rank}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

inline json manifest_json(const DerivationManifest& m) {
  auto per_split = [](const std::array<std::size_t, 3>& a) {
    return json{{"train", a[0]}, {"valid", a[1]}, {"test", a[2]}};
  };
  return {{"dropped_relations", m.dropped_relations},
          {"symmetric_relations", m.symmetric_relations},
          {"removed_dropped_relation_triples", per_split(m.removed_dropped)},
          {"removed_symmetric_train_orientations", m.removed_symmetric_train},
          {"removed_symmetric_leakage", per_split(m.removed_leakage)},
          {"orphaned_entities", m.orphaned_entities},
          {"before", stats_json(m.before)},
          {"after", stats_json(m.after)}};
}

}  // namespace kgaudit::io

#pragma once

// Raw and filtered link-prediction metrics (MR, MRR, Hits@k) over both
// directions of every test triple, for internal predictors or for ranks
// supplied in a JSONL file, plus grouped breakdowns.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "kgaudit/kg_store.hpp"
#include "kgaudit/parallel.hpp"
#include "kgaudit/ranking.hpp"
#include "kgaudit/redundancy_audit.hpp"

namespace kgaudit {

/// Ranks for one direction of one test triple. `test_index` points into the
/// dataset's test split.
struct RankResult {
  std::size_t test_index = 0;
  Direction direction = Direction::head;
  std::size_t raw_rank = 1;
  std::size_t filtered_rank = 1;

  friend bool operator==(const RankResult&, const RankResult&) = default;
};

struct EvalOptions {
  std::vector<int> ks{1, 3, 10};
  /// Splits whose triples are filtered out of the ranking.
  SplitSet filter_scope = SplitSet::all();
};

/// raw rank = 1 + entities ordered before `truth`; the filtered rank further
/// discounts those entities that complete the query into a triple present
/// in `filter_scope`.
inline RankResult rank_query(const Dataset& ds, const RankedPrediction& prediction, EntityId truth,
                             SplitSet filter_scope = SplitSet::all()) {
  if (truth >= prediction.size()) throw Error("truth entity missing from ordering");
  const Query& q = prediction.query();
  const std::size_t pos = prediction.position(truth);
  std::size_t filtered_before = 0;
  for (EntityId e : ds.neighbors(q.anchor, q.relation, q.direction, filter_scope))
    if (e != truth && prediction.position(e) < pos) ++filtered_before;
  return {0, q.direction, pos + 1, pos + 1 - filtered_before};
}

struct Metrics {
  std::size_t count = 0;
  std::uint64_t raw_rank_sum = 0;
  std::uint64_t filtered_rank_sum = 0;
  double mr = 0.0;
  double fmr = 0.0;
  double mrr = 0.0;
  double fmrr = 0.0;
  std::map<int, double> hits;   // percentages
  std::map<int, double> fhits;  // percentages

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

/// Sums in the order results are added; callers feed results in canonical
/// (test index, direction) order so reports are reproducible bit for bit.
class MetricsAccumulator {
 public:
  explicit MetricsAccumulator(std::vector<int> ks) : ks_(std::move(ks)) {
    for (int k : ks_)
      if (k < 1) throw Error("hits@k needs k >= 1");
    hits_.assign(ks_.size(), 0);
    fhits_.assign(ks_.size(), 0);
  }

  void add(const RankResult& r) {
    ++count_;
    raw_sum_ += r.raw_rank;
    filtered_sum_ += r.filtered_rank;
    rr_sum_ += 1.0 / double(r.raw_rank);
    frr_sum_ += 1.0 / double(r.filtered_rank);
    for (std::size_t i = 0; i < ks_.size(); ++i) {
      hits_[i] += r.raw_rank <= std::size_t(ks_[i]);
      fhits_[i] += r.filtered_rank <= std::size_t(ks_[i]);
    }
  }

  Metrics finish() const {
    Metrics m;
    m.count = count_;
    m.raw_rank_sum = raw_sum_;
    m.filtered_rank_sum = filtered_sum_;
    if (count_ == 0) return m;
    const double n = double(count_);
    m.mr = double(raw_sum_) / n;
    m.fmr = double(filtered_sum_) / n;
    m.mrr = rr_sum_ / n;
    m.fmrr = frr_sum_ / n;
    for (std::size_t i = 0; i < ks_.size(); ++i) {
      m.hits[ks_[i]] = 100.0 * double(hits_[i]) / n;
      m.fhits[ks_[i]] = 100.0 * double(fhits_[i]) / n;
    }
    return m;
  }

 private:
  std::vector<int> ks_;
  std::size_t count_ = 0;
  std::uint64_t raw_sum_ = 0;
  std::uint64_t filtered_sum_ = 0;
  double rr_sum_ = 0.0;
  double frr_sum_ = 0.0;
  std::vector<std::size_t> hits_;
  std::vector<std::size_t> fhits_;
};

inline Metrics aggregate(const std::vector<RankResult>& results, const std::vector<int>& ks) {
  MetricsAccumulator acc(ks);
  for (const auto& r : results) acc.add(r);
  return acc.finish();
}

struct GroupMetrics {
  std::string key;
  Metrics metrics;
  friend bool operator==(const GroupMetrics&, const GroupMetrics&) = default;
};

struct MetricsReport {
  std::vector<int> ks;
  Metrics overall;
  /// grouping name -> groups sorted by key
  std::map<std::string, std::vector<GroupMetrics>> breakdowns;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// Per-query ranks in canonical order plus their aggregate.
struct Evaluation {
  std::vector<RankResult> results;
  MetricsReport report;
};

/// Evaluates both directions of every test triple; head direction first.
template <Predictor P>
Evaluation evaluate_predictor(const Dataset& ds, const P& predictor, const EvalOptions& options = {}) {
  const auto& test = ds.test();
  std::vector<RankResult> results(2 * test.size());
  parallel_for(results.size(), [&](std::size_t i) {
    const std::size_t ti = i / 2;
    const Direction d = i % 2 == 0 ? Direction::head : Direction::tail;
    const Triple& t = test[ti];
    RankResult r = rank_query(ds, predictor.predict(query_for(t, d)), truth_of(t, d), options.filter_scope);
    r.test_index = ti;
    results[i] = r;
  });
  Evaluation ev;
  ev.report.ks = options.ks;
  ev.report.overall = aggregate(results, options.ks);
  ev.results = std::move(results);
  return ev;
}

/// Reads ranks from JSONL text: one object per (test triple, direction) with
/// head, relation, tail, direction, raw_rank, filtered_rank.
inline Evaluation ingest_rankings_text(std::string_view text, const Dataset& ds, const std::vector<int>& ks) {
  const auto& test = ds.test();
  std::unordered_map<Triple, std::vector<std::size_t>, TripleHash> slots;
  for (std::size_t i = 0; i < test.size(); ++i) slots[test[i]].push_back(i);

  std::vector<std::optional<RankResult>> filled(2 * test.size());
  const std::size_t n_entities = ds.num_entities();
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.find_first_not_of(" \r\t") == std::string_view::npos) continue;
    const std::string where = "rankings line " + std::to_string(line_no);

    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(where + ": " + e.what());
    }
    auto field = [&](const char* name) -> const nlohmann::json& {
      if (!rec.is_object() || !rec.contains(name)) throw Error(where + ": missing field '" + name + "'");
      return rec.at(name);
    };
    auto str = [&](const char* name) {
      const auto& v = field(name);
      if (!v.is_string()) throw Error(where + ": field '" + name + "' must be a string");
      return v.get<std::string>();
    };
    auto rank = [&](const char* name) {
      const auto& v = field(name);
      if (!v.is_number_integer()) throw Error(where + ": field '" + name + "' must be an integer");
      const auto value = v.get<std::int64_t>();
      if (value < 1 || std::uint64_t(value) > n_entities)
        throw Error(where + ": " + name + " " + std::to_string(value) + " outside [1, " + std::to_string(n_entities) +
                    "]");
      return std::size_t(value);
    };

    const std::string h = str("head"), r = str("relation"), t = str("tail"), dir = str("direction");
    if (dir != "head" && dir != "tail") throw Error(where + ": direction must be \"head\" or \"tail\"");
    const Direction d = dir == "head" ? Direction::head : Direction::tail;
    const std::size_t raw = rank("raw_rank"), filt = rank("filtered_rank");
    if (filt > raw) throw Error(where + ": filtered_rank exceeds raw_rank");

    const auto hid = ds.entities().find(h), tid = ds.entities().find(t);
    const auto rid = ds.relations().find(r);
    auto it = hid && tid && rid ? slots.find(Triple{*hid, *rid, *tid}) : slots.end();
    if (it == slots.end()) throw Error(where + ": (" + h + ", " + r + ", " + t + ") is not a test triple");
    bool placed = false;
    for (std::size_t ti : it->second) {
      auto& slot = filled[2 * ti + (d == Direction::tail)];
      if (slot) continue;
      slot = RankResult{ti, d, raw, filt};
      placed = true;
      break;
    }
    if (!placed) throw Error(where + ": duplicate record for (" + h + ", " + r + ", " + t + ") " + dir);
  }

  Evaluation ev;
  ev.results.reserve(filled.size());
  for (std::size_t i = 0; i < filled.size(); ++i) {
    if (!filled[i]) {
      const auto n = ds.named(test[i / 2]);
      throw Error("missing ranking for test triple (" + n.head + ", " + n.relation + ", " + n.tail + ") direction " +
                  std::string(i % 2 == 0 ? "head" : "tail"));
    }
    ev.results.push_back(*filled[i]);
  }
  ev.report.ks = ks;
  ev.report.overall = aggregate(ev.results, ks);
  return ev;
}

inline Evaluation ingest_rankings(const std::filesystem::path& file, const Dataset& ds, const std::vector<int>& ks) {
  return ingest_rankings_text(detail::read_file(file), ds, ks);
}

enum class Grouping : std::uint8_t { relation, category, redundancy_code, direction };

inline constexpr std::string_view grouping_name(Grouping g) {
  switch (g) {
    case Grouping::relation: return "relation";
    case Grouping::category: return "category";
    case Grouping::redundancy_code: return "redundancy-code";
    case Grouping::direction: return "direction";
  }
  return "?";
}

struct BreakdownContext {
  std::vector<int> ks{1, 3, 10};
  double category_cutoff = 1.5;
  /// Per-test-triple codes; required for Grouping::redundancy_code.
  const std::vector<RedundancyCode>* codes = nullptr;
};

/// Metrics recomputed within each group, groups sorted by key. Relations with
/// no triples in the profile scope fall into the "unseen" category.
inline std::vector<GroupMetrics> breakdown_report(const std::vector<RankResult>& results, const Dataset& ds,
                                                  Grouping grouping, const BreakdownContext& ctx) {
  if (grouping == Grouping::redundancy_code && (!ctx.codes || ctx.codes->size() != ds.test().size()))
    throw Error("redundancy-code grouping needs one code per test triple");

  std::vector<std::string> category_of;
  if (grouping == Grouping::category) {
    category_of.resize(ds.num_relations());
    for (RelationId r = 0; r < ds.num_relations(); ++r)
      category_of[r] = ds.profile(r).triple_count == 0
                           ? std::string("unseen")
                           : std::string(category_name(classify_relation_category(ds, r, ctx.category_cutoff)));
  }
  auto key_of = [&](const RankResult& r) -> std::string {
    const Triple& t = ds.test().at(r.test_index);
    switch (grouping) {
      case Grouping::relation: return ds.relations().name(t.relation);
      case Grouping::category: return category_of[t.relation];
      case Grouping::redundancy_code: return (*ctx.codes)[r.test_index].str();
      case Grouping::direction: return std::string(direction_name(r.direction));
    }
    return {};
  };

  std::map<std::string, MetricsAccumulator> groups;
  for (const auto& r : results) groups.try_emplace(key_of(r), ctx.ks).first->second.add(r);
  std::vector<GroupMetrics> out;
  out.reserve(groups.size());
  for (const auto& [key, acc] : groups) out.push_back({key, acc.finish()});
  return out;
}

/// Fills every requested breakdown into the evaluation's report.
inline void add_breakdowns(Evaluation& ev, const Dataset& ds, const std::vector<Grouping>& groupings,
                           const BreakdownContext& ctx) {
  for (Grouping g : groupings)
    ev.report.breakdowns[std::string(grouping_name(g))] = breakdown_report(ev.results, ds, g, ctx);
}

}  // namespace kgaudit

#pragma once

// Statistical detection of redundant relations: duplicate and reverse
// duplicate pairs (two-sided overlap of subject-object pair sets), symmetric
// relations, Cartesian product relations, cardinality categories, and the
// 4-bit per-test-triple redundancy code.

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kgaudit/kg_store.hpp"

namespace kgaudit {

struct AuditConfig {
  double theta1 = 0.8;
  double theta2 = 0.8;
  double cartesian_threshold = 0.8;
  std::size_t min_triples = 2;
  double category_cutoff = 1.5;

  void validate() const {
    auto ratio_ok = [](double v) { return v > 0.0 && v <= 1.0; };
    if (!ratio_ok(theta1) || !ratio_ok(theta2) || !ratio_ok(cartesian_threshold))
      throw Error("audit thresholds must lie in (0, 1]");
    if (min_triples < 1) throw Error("min_triples must be at least 1");
    if (!(category_cutoff > 0.0)) throw Error("category cutoff must be positive");
  }
};

enum class FindingKind : std::uint8_t { duplicate, reverse_duplicate, symmetric, cartesian };

inline constexpr std::string_view kind_name(FindingKind k) {
  switch (k) {
    case FindingKind::duplicate: return "duplicate";
    case FindingKind::reverse_duplicate: return "reverse-duplicate";
    case FindingKind::symmetric: return "symmetric";
    case FindingKind::cartesian: return "cartesian";
  }
  return "?";
}

/// A flagged relation pair or single relation. Single-relation findings set
/// `second == first`. For cartesian findings `ratio1` is the fill ratio and
/// `ratio2` is unused (0).
struct RedundancyFinding {
  FindingKind kind = FindingKind::duplicate;
  RelationId first = 0;
  RelationId second = 0;
  double ratio1 = 0.0;
  double ratio2 = 0.0;

  bool is_pair() const { return kind == FindingKind::duplicate || kind == FindingKind::reverse_duplicate; }
  friend bool operator==(const RedundancyFinding&, const RedundancyFinding&) = default;
};

enum class OverlapMode : std::uint8_t { forward, reversed };

namespace detail {

inline std::size_t intersect_count(const std::vector<PairKey>& a, const std::vector<PairKey>& b) {
  std::size_t n = 0;
  auto i = a.begin(), j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) ++i;
    else if (*j < *i) ++j;
    else { ++n; ++i; ++j; }
  }
  return n;
}

inline std::vector<PairKey> inverted(const std::vector<PairKey>& pairs) {
  std::vector<PairKey> out;
  out.reserve(pairs.size());
  for (PairKey k : pairs) out.push_back(swap_pair(k));
  std::sort(out.begin(), out.end());
  return out;
}

inline const RelationProfile& nonempty_profile(const Dataset& ds, RelationId r) {
  if (r >= ds.num_relations()) throw Error("unknown relation id " + std::to_string(r));
  const auto& p = ds.profile(r);
  if (p.triple_count == 0) throw Error("relation '" + ds.relations().name(r) + "' has no triples in scope");
  return p;
}

}  // namespace detail

/// (|T_r1 ∩ X| / |r1|, |T_r1 ∩ X| / |r2|) with X = T_r2 (forward) or its
/// inverse (reversed). |r| counts triple lines, T_r is the distinct pair set.
inline std::pair<double, double> overlap_ratio(const Dataset& ds, RelationId r1, RelationId r2, OverlapMode mode) {
  const auto& p1 = detail::nonempty_profile(ds, r1);
  const auto& p2 = detail::nonempty_profile(ds, r2);
  const std::size_t common = mode == OverlapMode::forward
                                 ? detail::intersect_count(p1.pair_set, p2.pair_set)
                                 : detail::intersect_count(p1.pair_set, detail::inverted(p2.pair_set));
  return {double(common) / double(p1.triple_count), double(common) / double(p2.triple_count)};
}

/// Overlap counts |T_a ∩ T_b| (forward) or |T_a ∩ T_b^-1| (reversed) for every
/// relation pair a <= b with a nonzero intersection. Keys are pack(a, b).
inline std::unordered_map<PairKey, std::size_t> overlap_counts(const Dataset& ds, OverlapMode mode) {
  std::unordered_map<PairKey, std::vector<RelationId>> owners;
  for (const auto& p : ds.profiles())
    for (PairKey k : p.pair_set) owners[k].push_back(p.relation);

  std::unordered_map<PairKey, std::size_t> counts;
  if (mode == OverlapMode::forward) {
    for (const auto& [k, rels] : owners)
      for (std::size_t i = 0; i < rels.size(); ++i)
        for (std::size_t j = i + 1; j < rels.size(); ++j) ++counts[pack(rels[i], rels[j])];
  } else {
    for (const auto& p : ds.profiles()) {
      for (PairKey k : p.pair_set) {
        auto it = owners.find(swap_pair(k));
        if (it == owners.end()) continue;
        for (RelationId other : it->second)
          if (p.relation <= other) ++counts[pack(p.relation, other)];
      }
    }
  }
  return counts;
}

/// All relation pairs whose two overlap ratios strictly exceed (theta1, theta2).
/// Forward mode yields duplicate pairs; reversed mode yields reverse-duplicate
/// pairs and, for r1 == r2, symmetric relations. Sorted by (first, second).
inline std::vector<RedundancyFinding> detect_redundant_pairs(const Dataset& ds, const AuditConfig& config,
                                                             OverlapMode mode) {
  config.validate();
  std::vector<RedundancyFinding> out;
  for (const auto& [key, common] : overlap_counts(ds, mode)) {
    const RelationId a = hi_of(key), b = lo_of(key);
    if (mode == OverlapMode::forward && a == b) continue;
    const double ra = double(common) / double(ds.profile(a).triple_count);
    const double rb = double(common) / double(ds.profile(b).triple_count);
    if (!(ra > config.theta1 && rb > config.theta2)) continue;
    FindingKind kind = mode == OverlapMode::forward ? FindingKind::duplicate
                       : a == b                     ? FindingKind::symmetric
                                                    : FindingKind::reverse_duplicate;
    out.push_back({kind, a, b, ra, rb});
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return std::pair(x.first, x.second) < std::pair(y.first, y.second);
  });
  return out;
}

/// |T_r| / (|S_r| * |O_r|) for a relation with at least one pair in scope.
inline double fill_ratio(const RelationProfile& p) {
  if (p.pair_set.empty()) return 0.0;
  return double(p.pair_set.size()) / (double(p.subjects.size()) * double(p.objects.size()));
}

inline std::vector<RedundancyFinding> detect_cartesian(const Dataset& ds, const AuditConfig& config) {
  config.validate();
  std::vector<RedundancyFinding> out;
  for (const auto& p : ds.profiles()) {
    if (p.triple_count < config.min_triples) continue;
    const double fill = fill_ratio(p);
    if (fill > config.cartesian_threshold) out.push_back({FindingKind::cartesian, p.relation, p.relation, fill, 0.0});
  }
  return out;
}

enum class Category : std::uint8_t { one_to_one, one_to_many, many_to_one, many_to_many };

inline constexpr std::array<Category, 4> kAllCategories{Category::one_to_one, Category::one_to_many,
                                                        Category::many_to_one, Category::many_to_many};

inline constexpr std::string_view category_name(Category c) {
  switch (c) {
    case Category::one_to_one: return "1-1";
    case Category::one_to_many: return "1-n";
    case Category::many_to_one: return "n-1";
    case Category::many_to_many: return "n-m";
  }
  return "?";
}

struct CategoryStats {
  double heads_per_tail = 0.0;
  double tails_per_head = 0.0;
  Category category = Category::one_to_one;
};

/// Head side is "1" when heads-per-tail < cutoff, tail side is "1" when
/// tails-per-head < cutoff.
inline CategoryStats relation_category_stats(const Dataset& ds, RelationId r, double cutoff) {
  if (!(cutoff > 0.0)) throw Error("category cutoff must be positive");
  const auto& p = detail::nonempty_profile(ds, r);
  CategoryStats s;
  s.heads_per_tail = double(p.pair_set.size()) / double(p.objects.size());
  s.tails_per_head = double(p.pair_set.size()) / double(p.subjects.size());
  const bool head_one = s.heads_per_tail < cutoff;
  const bool tail_one = s.tails_per_head < cutoff;
  s.category = head_one ? (tail_one ? Category::one_to_one : Category::one_to_many)
                        : (tail_one ? Category::many_to_one : Category::many_to_many);
  return s;
}

inline Category classify_relation_category(const Dataset& ds, RelationId r, double cutoff = 1.5) {
  return relation_category_stats(ds, r, cutoff).category;
}

/// bit3: reverse triple in train, bit2: (reverse) duplicate triple in train,
/// bit1: reverse triple in test, bit0: duplicate triple in test.
struct RedundancyCode {
  static constexpr std::uint8_t kReverseTrain = 0b1000;
  static constexpr std::uint8_t kDuplicateTrain = 0b0100;
  static constexpr std::uint8_t kReverseTest = 0b0010;
  static constexpr std::uint8_t kDuplicateTest = 0b0001;

  std::uint8_t bits = 0;

  bool has(std::uint8_t mask) const { return (bits & mask) != 0; }
  std::string str() const {
    std::string s(4, '0');
    for (int i = 0; i < 4; ++i)
      if (bits & (1u << (3 - i))) s[i] = '1';
    return s;
  }
  friend bool operator==(RedundancyCode, RedundancyCode) = default;
};

/// Per-relation partner lists derived from pair findings. Reverse partners
/// come from reverse-duplicate and symmetric findings (a symmetric relation is
/// its own partner); duplicate partners come from duplicate findings.
class RedundancyIndex {
 public:
  RedundancyIndex(const Dataset& ds, const std::vector<RedundancyFinding>& findings)
      : reverse_(ds.num_relations()), duplicate_(ds.num_relations()) {
    for (const auto& f : findings) {
      if (f.first >= ds.num_relations() || f.second >= ds.num_relations())
        throw Error("finding references unknown relation");
      switch (f.kind) {
        case FindingKind::duplicate:
          add(duplicate_, f.first, f.second);
          break;
        case FindingKind::reverse_duplicate:
        case FindingKind::symmetric:
          add(reverse_, f.first, f.second);
          break;
        case FindingKind::cartesian:
          break;
      }
    }
  }

  const std::vector<RelationId>& reverse_partners(RelationId r) const { return reverse_.at(r); }
  const std::vector<RelationId>& duplicate_partners(RelationId r) const { return duplicate_.at(r); }

 private:
  static void add(std::vector<std::vector<RelationId>>& lists, RelationId a, RelationId b) {
    auto push = [&](RelationId x, RelationId y) {
      auto& v = lists[x];
      if (std::find(v.begin(), v.end(), y) == v.end()) v.push_back(y);
    };
    push(a, b);
    push(b, a);
  }
  std::vector<std::vector<RelationId>> reverse_;
  std::vector<std::vector<RelationId>> duplicate_;
};

/// True when some reverse partner r' of t.relation has (t.tail, r', t.head) in
/// `split`. With `t_in_split`, a self-loop under a symmetric relation does
/// not count as its own reverse.
inline bool has_reverse_in(const Dataset& ds, const RedundancyIndex& index, const Triple& t, Split split,
                           bool t_in_split) {
  for (RelationId other : index.reverse_partners(t.relation)) {
    const Triple rev{t.tail, other, t.head};
    if (t_in_split && rev == t) continue;
    if (ds.index(split).contains(rev)) return true;
  }
  return false;
}

inline bool has_duplicate_in(const Dataset& ds, const RedundancyIndex& index, const Triple& t, Split split) {
  for (RelationId other : index.duplicate_partners(t.relation))
    if (ds.index(split).contains({t.head, other, t.tail})) return true;
  return false;
}

inline RedundancyCode redundancy_code(const Dataset& ds, const RedundancyIndex& index, const Triple& t) {
  RedundancyCode c;
  if (has_reverse_in(ds, index, t, Split::train, false)) c.bits |= RedundancyCode::kReverseTrain;
  if (has_duplicate_in(ds, index, t, Split::train)) c.bits |= RedundancyCode::kDuplicateTrain;
  if (has_reverse_in(ds, index, t, Split::test, true)) c.bits |= RedundancyCode::kReverseTest;
  if (has_duplicate_in(ds, index, t, Split::test)) c.bits |= RedundancyCode::kDuplicateTest;
  return c;
}

inline std::vector<RedundancyCode> test_codes(const Dataset& ds, const RedundancyIndex& index) {
  std::vector<RedundancyCode> out;
  out.reserve(ds.test().size());
  for (const Triple& t : ds.test()) out.push_back(redundancy_code(ds, index, t));
  return out;
}

using CodeHistogram = std::array<std::size_t, 16>;

inline CodeHistogram code_histogram(const Dataset& ds, const RedundancyIndex& index) {
  CodeHistogram h{};
  for (const Triple& t : ds.test()) ++h[redundancy_code(ds, index, t).bits];
  return h;
}

/// Codes ordered by descending count, ties by ascending code value.
inline std::vector<std::uint8_t> codes_by_count(const CodeHistogram& h) {
  std::vector<std::uint8_t> order(16);
  for (std::uint8_t i = 0; i < 16; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return h[a] > h[b]; });
  return order;
}

struct LeakageStats {
  std::size_t train_with_reverse_in_train = 0;
  std::size_t train_with_duplicate_in_train = 0;
  std::size_t test_with_reverse_in_train = 0;
  std::size_t test_with_duplicate_in_train = 0;
  std::size_t test_with_reverse_in_test = 0;
  std::size_t test_with_duplicate_in_test = 0;
};

inline LeakageStats leakage_stats(const Dataset& ds, const RedundancyIndex& index) {
  LeakageStats s;
  for (const Triple& t : ds.train()) {
    if (has_reverse_in(ds, index, t, Split::train, true)) ++s.train_with_reverse_in_train;
    if (has_duplicate_in(ds, index, t, Split::train)) ++s.train_with_duplicate_in_train;
  }
  for (const Triple& t : ds.test()) {
    const auto c = redundancy_code(ds, index, t);
    s.test_with_reverse_in_train += c.has(RedundancyCode::kReverseTrain);
    s.test_with_duplicate_in_train += c.has(RedundancyCode::kDuplicateTrain);
    s.test_with_reverse_in_test += c.has(RedundancyCode::kReverseTest);
    s.test_with_duplicate_in_test += c.has(RedundancyCode::kDuplicateTest);
  }
  return s;
}

/// Everything the audit command reports, bundled.
struct AuditResult {
  std::vector<RedundancyFinding> duplicates;
  std::vector<RedundancyFinding> reverse;  // reverse-duplicate and symmetric
  std::vector<RedundancyFinding> cartesian;

  std::vector<RedundancyFinding> pair_findings() const {
    auto all = duplicates;
    all.insert(all.end(), reverse.begin(), reverse.end());
    return all;
  }
};

inline AuditResult run_audit(const Dataset& ds, const AuditConfig& config) {
  return {detect_redundant_pairs(ds, config, OverlapMode::forward),
          detect_redundant_pairs(ds, config, OverlapMode::reversed), detect_cartesian(ds, config)};
}

}  // namespace kgaudit

#pragma once

// Non-learning baselines: the statistical intersection-rule model, the
// Cartesian product predictor, and the pure frequency ordering both fall
// back to.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "kgaudit/kg_store.hpp"
#include "kgaudit/ranking.hpp"
#include "kgaudit/redundancy_audit.hpp"

namespace kgaudit {

enum class Orientation : std::uint8_t { same, reversed };

inline constexpr std::string_view orientation_name(Orientation o) {
  return o == Orientation::same ? "same" : "reversed";
}

/// source(h, t) => target(h, t) when `same`, source(h, t) => target(t, h)
/// when `reversed`. Confidence is the share of target pairs the source explains.
struct IntersectionRule {
  RelationId source = 0;
  RelationId target = 0;
  Orientation orientation = Orientation::same;
  double confidence = 0.0;

  friend bool operator==(const IntersectionRule&, const IntersectionRule&) = default;
};

/// Every ordered (source, target, orientation) whose confidence
/// |T_source ∩ T_target^(±1)| / |target| strictly exceeds config.theta1.
/// Symmetric self-rules (source == target, reversed) are included.
inline std::vector<IntersectionRule> build_intersection_rules(const Dataset& ds, const AuditConfig& config) {
  config.validate();
  std::vector<IntersectionRule> rules;
  auto consider = [&](RelationId src, RelationId tgt, Orientation o, std::size_t common) {
    const double conf = double(common) / double(ds.profile(tgt).triple_count);
    if (conf > config.theta1) rules.push_back({src, tgt, o, conf});
  };
  for (OverlapMode mode : {OverlapMode::forward, OverlapMode::reversed}) {
    const Orientation o = mode == OverlapMode::forward ? Orientation::same : Orientation::reversed;
    for (const auto& [key, common] : overlap_counts(ds, mode)) {
      const RelationId a = hi_of(key), b = lo_of(key);
      if (a == b) {
        if (o == Orientation::reversed) consider(a, a, o, common);
        continue;
      }
      consider(a, b, o, common);
      consider(b, a, o, common);
    }
  }
  std::sort(rules.begin(), rules.end(), [](const auto& x, const auto& y) {
    return std::tuple(x.target, x.source, x.orientation) < std::tuple(y.target, y.source, y.orientation);
  });
  return rules;
}

/// Ranks every entity by train frequency only.
class FrequencyPredictor {
 public:
  explicit FrequencyPredictor(const Dataset& ds) : fallback_(std::make_shared<FallbackOrder>(ds)) {}
  explicit FrequencyPredictor(std::shared_ptr<const FallbackOrder> fallback) : fallback_(std::move(fallback)) {}

  RankedPrediction predict(const Query& q) const { return {q, {}, fallback_}; }

 private:
  std::shared_ptr<const FallbackOrder> fallback_;
};

/// Applies intersection rules against the train split.
class IntersectionRulePredictor {
 public:
  IntersectionRulePredictor(const Dataset& ds, std::vector<IntersectionRule> rules)
      : IntersectionRulePredictor(ds, std::move(rules), std::make_shared<FallbackOrder>(ds)) {}

  IntersectionRulePredictor(const Dataset& ds, std::vector<IntersectionRule> rules,
                            std::shared_ptr<const FallbackOrder> fallback)
      : ds_(&ds), rules_(std::move(rules)), fallback_(std::move(fallback)) {
    for (std::size_t i = 0; i < rules_.size(); ++i) by_target_[rules_[i].target].push_back(i);
  }

  const std::vector<IntersectionRule>& rules() const { return rules_; }

  /// Raw candidate scores before ordering; exposed for soundness checks.
  CandidateScores candidates(const Query& q) const {
    CandidateScores scores;
    auto it = by_target_.find(q.relation);
    if (it == by_target_.end()) return scores;
    const auto& train = ds_->index(Split::train);
    for (std::size_t idx : it->second) {
      const auto& rule = rules_[idx];
      // target(anchor, ?) <= source(anchor, ?) or source(?, anchor) when reversed.
      const Direction read = rule.orientation == Orientation::same ? q.direction : flip(q.direction);
      for (EntityId e : train.neighbors(q.anchor, rule.source, read)) scores.add(e, rule.confidence);
    }
    return scores;
  }

  RankedPrediction predict(const Query& q) const { return {q, candidates(q).ordered(*ds_), fallback_}; }

 private:
  static Direction flip(Direction d) { return d == Direction::tail ? Direction::head : Direction::tail; }

  const Dataset* ds_;
  std::vector<IntersectionRule> rules_;
  std::shared_ptr<const FallbackOrder> fallback_;
  std::unordered_map<RelationId, std::vector<std::size_t>> by_target_;
};

/// For a flagged relation r, a tail query ranks O_r first and a head query
/// ranks S_r first, each ordered by in-relation pair count desc, train
/// frequency desc, id asc. Other relations get the fallback order.
class CartesianPredictor {
 public:
  CartesianPredictor(const Dataset& ds, const std::vector<RelationId>& relations)
      : CartesianPredictor(ds, relations, std::make_shared<FallbackOrder>(ds)) {}

  CartesianPredictor(const Dataset& ds, const std::vector<RelationId>& relations,
                     std::shared_ptr<const FallbackOrder> fallback)
      : fallback_(std::move(fallback)) {
    for (RelationId r : relations) {
      if (r >= ds.num_relations()) throw Error("cartesian predictor: unknown relation id");
      const auto& p = ds.profile(r);
      std::unordered_map<EntityId, std::size_t> head_count, tail_count;
      for (PairKey k : p.pair_set) {
        ++head_count[hi_of(k)];
        ++tail_count[lo_of(k)];
      }
      prefixes_[r] = {ordered(ds, p.subjects, head_count), ordered(ds, p.objects, tail_count)};
    }
  }

  static CartesianPredictor from_findings(const Dataset& ds, const std::vector<RedundancyFinding>& findings) {
    std::vector<RelationId> rels;
    for (const auto& f : findings)
      if (f.kind == FindingKind::cartesian) rels.push_back(f.first);
    return CartesianPredictor(ds, rels);
  }

  bool covers(RelationId r) const { return prefixes_.contains(r); }

  RankedPrediction predict(const Query& q) const {
    auto it = prefixes_.find(q.relation);
    if (it == prefixes_.end()) return {q, {}, fallback_};
    return {q, q.direction == Direction::tail ? it->second.tails : it->second.heads, fallback_};
  }

 private:
  struct Prefixes {
    std::vector<EntityId> heads;
    std::vector<EntityId> tails;
  };

  static std::vector<EntityId> ordered(const Dataset& ds, std::vector<EntityId> members,
                                       const std::unordered_map<EntityId, std::size_t>& count) {
    std::sort(members.begin(), members.end(), [&](EntityId a, EntityId b) {
      const auto ca = count.at(a), cb = count.at(b);
      if (ca != cb) return ca > cb;
      const auto fa = ds.entity_frequency(a), fb = ds.entity_frequency(b);
      if (fa != fb) return fa > fb;
      return a < b;
    });
    return members;
  }

  std::shared_ptr<const FallbackOrder> fallback_;
  std::unordered_map<RelationId, Prefixes> prefixes_;
};

}  // namespace kgaudit

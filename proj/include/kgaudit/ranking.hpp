#pragma once

#include <algorithm>
#include <concepts>
#include <memory>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kgaudit/kg_store.hpp"

namespace kgaudit {

/// All entities ordered by train frequency (descending), then id (ascending).
class FallbackOrder {
 public:
  explicit FallbackOrder(const Dataset& ds) : order_(ds.num_entities()), position_(ds.num_entities()) {
    for (EntityId e = 0; e < order_.size(); ++e) order_[e] = e;
    const auto& freq = ds.entity_frequencies();
    std::sort(order_.begin(), order_.end(), [&](EntityId a, EntityId b) {
      return freq[a] != freq[b] ? freq[a] > freq[b] : a < b;
    });
    for (std::size_t i = 0; i < order_.size(); ++i) position_[order_[i]] = i;
  }

  std::span<const EntityId> order() const { return order_; }
  std::size_t position(EntityId e) const { return position_.at(e); }
  std::size_t size() const { return order_.size(); }

 private:
  std::vector<EntityId> order_;
  std::vector<std::size_t> position_;
};

/// A total order over every entity for one query: an explicit prefix of
/// predicted candidates, followed by all remaining entities in fallback order.
/// The full permutation is implicit; `position` answers in O(log prefix).
class RankedPrediction {
 public:
  RankedPrediction(Query query, std::vector<EntityId> prefix, std::shared_ptr<const FallbackOrder> fallback)
      : query_(query), prefix_(std::move(prefix)), fallback_(std::move(fallback)) {
    prefix_index_.reserve(prefix_.size());
    prefix_fallback_pos_.reserve(prefix_.size());
    for (std::size_t i = 0; i < prefix_.size(); ++i) {
      const EntityId e = prefix_[i];
      if (e >= fallback_->size()) throw Error("ranked prefix contains unknown entity");
      if (!prefix_index_.emplace(e, i).second) throw Error("ranked prefix repeats an entity");
      prefix_fallback_pos_.push_back(fallback_->position(e));
    }
    std::sort(prefix_fallback_pos_.begin(), prefix_fallback_pos_.end());
  }

  const Query& query() const { return query_; }
  const std::vector<EntityId>& prefix() const { return prefix_; }
  std::size_t prefix_length() const { return prefix_.size(); }
  std::size_t size() const { return fallback_->size(); }

  /// 0-based position of `e` in the total order.
  std::size_t position(EntityId e) const {
    if (auto it = prefix_index_.find(e); it != prefix_index_.end()) return it->second;
    const std::size_t fp = fallback_->position(e);
    const auto skipped = std::lower_bound(prefix_fallback_pos_.begin(), prefix_fallback_pos_.end(), fp) -
                         prefix_fallback_pos_.begin();
    return prefix_.size() + fp - static_cast<std::size_t>(skipped);
  }

  bool in_prefix(EntityId e) const { return prefix_index_.contains(e); }

  std::vector<EntityId> materialize() const {
    std::vector<EntityId> out = prefix_;
    out.reserve(size());
    for (EntityId e : fallback_->order())
      if (!in_prefix(e)) out.push_back(e);
    return out;
  }

 private:
  Query query_;
  std::vector<EntityId> prefix_;
  std::shared_ptr<const FallbackOrder> fallback_;
  std::unordered_map<EntityId, std::size_t> prefix_index_;
  std::vector<std::size_t> prefix_fallback_pos_;
};

template <class P>
concept Predictor = requires(const P& p, const Query& q) {
  { p.predict(q) } -> std::same_as<RankedPrediction>;
};

/// Accumulates (max confidence, support) per candidate entity and sorts them by
/// confidence desc, support desc, train frequency desc, id asc.
class CandidateScores {
 public:
  void add(EntityId e, double confidence) {
    auto [it, inserted] = scores_.try_emplace(e, Score{confidence, 1});
    if (!inserted) {
      it->second.confidence = std::max(it->second.confidence, confidence);
      ++it->second.support;
    }
  }

  struct Score {
    double confidence = 0.0;
    std::size_t support = 0;
  };

  const std::unordered_map<EntityId, Score>& scores() const { return scores_; }
  bool empty() const { return scores_.empty(); }

  std::vector<EntityId> ordered(const Dataset& ds) const {
    std::vector<EntityId> out;
    out.reserve(scores_.size());
    for (const auto& [e, s] : scores_) out.push_back(e);
    std::sort(out.begin(), out.end(), [&](EntityId a, EntityId b) {
      const auto& sa = scores_.at(a);
      const auto& sb = scores_.at(b);
      if (sa.confidence != sb.confidence) return sa.confidence > sb.confidence;
      if (sa.support != sb.support) return sa.support > sb.support;
      const auto fa = ds.entity_frequency(a), fb = ds.entity_frequency(b);
      if (fa != fb) return fa > fb;
      return a < b;
    });
    return out;
  }

 private:
  std::unordered_map<EntityId, Score> scores_;
};

}  // namespace kgaudit

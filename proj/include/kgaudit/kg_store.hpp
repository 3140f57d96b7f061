#pragma once

// Triple storage: interning dictionaries, the three splits, and the lookup
// indices every other module reads from. A Dataset never changes after it is
// built.

#include <algorithm>
#include <array>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kgaudit/types.hpp"

namespace kgaudit {

/// Bidirectional name <-> dense id map. Ids are assigned in first-seen order.
class Dictionary {
 public:
  std::uint32_t intern(std::string_view name) {
    if (auto it = ids_.find(name); it != ids_.end()) return it->second;
    const auto id = static_cast<std::uint32_t>(names_.size());
    names_.emplace_back(name);
    ids_.emplace(names_.back(), id);
    return id;
  }

  std::optional<std::uint32_t> find(std::string_view name) const {
    if (auto it = ids_.find(name); it != ids_.end()) return it->second;
    return std::nullopt;
  }

  const std::string& name(std::uint32_t id) const { return names_.at(id); }
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
  };
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t, StringHash, std::equal_to<>> ids_;
};

/// Pair set, subject set and object set of one relation over a split scope.
/// `pair_set` holds pack(head, tail) keys, sorted and unique.
struct RelationProfile {
  RelationId relation = 0;
  std::vector<PairKey> pair_set;
  std::vector<EntityId> subjects;
  std::vector<EntityId> objects;
  std::size_t triple_count = 0;

  bool contains_pair(EntityId h, EntityId t) const {
    return std::binary_search(pair_set.begin(), pair_set.end(), pack(h, t));
  }
};

struct IndexOptions {
  /// Splits feeding the relation profiles (redundancy detection, categories).
  SplitSet profile_scope = SplitSet::train_only();
};

struct DatasetStats {
  std::size_t entities = 0;
  std::size_t relations = 0;
  std::array<std::size_t, 3> triples{};

  friend bool operator==(const DatasetStats&, const DatasetStats&) = default;
};

/// Per-split adjacency: (head, relation) -> tails and (relation, tail) -> heads,
/// each neighbour list sorted and unique.
class SplitIndex {
 public:
  SplitIndex() = default;
  explicit SplitIndex(std::span<const Triple> triples) {
    for (const Triple& t : triples) {
      tails_[pack(t.head, t.relation)].push_back(t.tail);
      heads_[pack(t.relation, t.tail)].push_back(t.head);
    }
    for (auto* m : {&tails_, &heads_}) {
      for (auto& [key, v] : *m) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
      }
    }
  }

  std::span<const EntityId> tails(EntityId head, RelationId r) const { return lookup(tails_, pack(head, r)); }
  std::span<const EntityId> heads(RelationId r, EntityId tail) const { return lookup(heads_, pack(r, tail)); }

  std::span<const EntityId> neighbors(EntityId anchor, RelationId r, Direction d) const {
    return d == Direction::tail ? tails(anchor, r) : heads(r, anchor);
  }

  bool contains(const Triple& t) const {
    auto v = tails(t.head, t.relation);
    return std::binary_search(v.begin(), v.end(), t.tail);
  }

  template <class F>
  void for_each_tail_list(F&& f) const {
    for (const auto& [key, v] : tails_) f(key, std::span<const EntityId>(v));
  }

 private:
  using Map = std::unordered_map<PairKey, std::vector<EntityId>>;
  static std::span<const EntityId> lookup(const Map& m, PairKey k) {
    if (auto it = m.find(k); it != m.end()) return it->second;
    return {};
  }
  Map tails_;
  Map heads_;
};

struct NamedTriple {
  std::string head;
  std::string relation;
  std::string tail;
};

class Dataset {
 public:
  using Splits = std::array<std::vector<Triple>, 3>;

  /// Builds all indices. Every id in `splits` must resolve in the dictionaries.
  static Dataset build(Dictionary entities, Dictionary relations, Splits splits, IndexOptions options = {}) {
    Dataset ds;
    ds.entities_ = std::move(entities);
    ds.relations_ = std::move(relations);
    ds.splits_ = std::move(splits);
    ds.options_ = options;
    for (const auto& split : ds.splits_) {
      for (const Triple& t : split) {
        if (t.head >= ds.entities_.size() || t.tail >= ds.entities_.size() || t.relation >= ds.relations_.size())
          throw Error("triple references an id outside the dictionaries");
      }
    }
    ds.index();
    return ds;
  }

  /// Interns names in order of first appearance across train, valid, test.
  static Dataset from_named(const std::array<std::vector<NamedTriple>, 3>& named, IndexOptions options = {}) {
    Dictionary entities, relations;
    Splits splits;
    for (std::size_t s = 0; s < 3; ++s) {
      splits[s].reserve(named[s].size());
      for (const auto& nt : named[s]) {
        const EntityId h = entities.intern(nt.head);
        const RelationId r = relations.intern(nt.relation);
        const EntityId t = entities.intern(nt.tail);
        splits[s].push_back({h, r, t});
      }
    }
    return build(std::move(entities), std::move(relations), std::move(splits), options);
  }

  const Dictionary& entities() const { return entities_; }
  const Dictionary& relations() const { return relations_; }
  std::size_t num_entities() const { return entities_.size(); }
  std::size_t num_relations() const { return relations_.size(); }
  const IndexOptions& options() const { return options_; }

  const std::vector<Triple>& split(Split s) const { return splits_[static_cast<std::size_t>(s)]; }
  const std::vector<Triple>& train() const { return split(Split::train); }
  const std::vector<Triple>& valid() const { return split(Split::valid); }
  const std::vector<Triple>& test() const { return split(Split::test); }
  const SplitIndex& index(Split s) const { return indices_[static_cast<std::size_t>(s)]; }

  DatasetStats stats() const {
    return {entities_.size(), relations_.size(), {splits_[0].size(), splits_[1].size(), splits_[2].size()}};
  }

  /// Profile of `r` over the configured profile scope.
  const RelationProfile& profile(RelationId r) const { return profiles_.at(r); }
  const std::vector<RelationProfile>& profiles() const { return profiles_; }

  /// Sorted, de-duplicated neighbours of `anchor` under `r` in the given scope.
  std::vector<EntityId> neighbors(EntityId anchor, RelationId r, Direction d, SplitSet scope) const {
    std::vector<EntityId> out;
    for (Split s : kAllSplits) {
      if (!scope.has(s)) continue;
      auto v = index(s).neighbors(anchor, r, d);
      out.insert(out.end(), v.begin(), v.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// Neighbours over the profile scope.
  std::vector<EntityId> neighbors(EntityId anchor, RelationId r, Direction d) const {
    return neighbors(anchor, r, d, options_.profile_scope);
  }

  bool contains(const Triple& t, SplitSet scope) const {
    for (Split s : kAllSplits)
      if (scope.has(s) && index(s).contains(t)) return true;
    return false;
  }

  /// Number of train head/tail slots the entity occupies.
  std::size_t entity_frequency(EntityId e) const { return e < frequency_.size() ? frequency_[e] : 0; }
  const std::vector<std::size_t>& entity_frequencies() const { return frequency_; }

  NamedTriple named(const Triple& t) const {
    return {entities_.name(t.head), relations_.name(t.relation), entities_.name(t.tail)};
  }

 private:
  Dataset() = default;

  void index() {
    for (std::size_t s = 0; s < 3; ++s) indices_[s] = SplitIndex(splits_[s]);

    frequency_.assign(entities_.size(), 0);
    for (const Triple& t : train()) {
      ++frequency_[t.head];
      ++frequency_[t.tail];
    }

    profiles_.assign(relations_.size(), {});
    for (RelationId r = 0; r < relations_.size(); ++r) profiles_[r].relation = r;
    for (Split s : kAllSplits) {
      if (!options_.profile_scope.has(s)) continue;
      for (const Triple& t : split(s)) {
        auto& p = profiles_[t.relation];
        p.pair_set.push_back(pack(t.head, t.tail));
        ++p.triple_count;
      }
    }
    for (auto& p : profiles_) {
      std::sort(p.pair_set.begin(), p.pair_set.end());
      p.pair_set.erase(std::unique(p.pair_set.begin(), p.pair_set.end()), p.pair_set.end());
      for (PairKey k : p.pair_set) {
        p.subjects.push_back(hi_of(k));
        p.objects.push_back(lo_of(k));
      }
      for (auto* v : {&p.subjects, &p.objects}) {
        std::sort(v->begin(), v->end());
        v->erase(std::unique(v->begin(), v->end()), v->end());
      }
    }
  }

  Dictionary entities_;
  Dictionary relations_;
  Splits splits_;
  IndexOptions options_;
  std::array<SplitIndex, 3> indices_;
  std::vector<RelationProfile> profiles_;
  std::vector<std::size_t> frequency_;
};

inline constexpr std::array<std::string_view, 3> kSplitFiles{"train.txt", "valid.txt", "test.txt"};

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("missing file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

/// Parses tab-separated triples. Empty lines are ignored.
inline std::vector<NamedTriple> parse_triples(std::string_view text, const std::string& source) {
  std::vector<NamedTriple> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    const auto a = line.find('\t');
    const auto b = a == std::string_view::npos ? a : line.find('\t', a + 1);
    if (a == std::string_view::npos || b == std::string_view::npos || line.find('\t', b + 1) != std::string_view::npos)
      throw Error("malformed line " + std::to_string(line_no) + " in " + source + ": expected 3 tab-separated fields");
    out.push_back({std::string(line.substr(0, a)), std::string(line.substr(a + 1, b - a - 1)),
                   std::string(line.substr(b + 1))});
  }
  return out;
}

}  // namespace detail

/// Loads train.txt / valid.txt / test.txt from `dir`.
inline Dataset load_dataset(const std::filesystem::path& dir, IndexOptions options = {}) {
  std::array<std::vector<NamedTriple>, 3> named;
  for (std::size_t s = 0; s < 3; ++s) {
    const auto path = dir / kSplitFiles[s];
    named[s] = detail::parse_triples(detail::read_file(path), path.string());
  }
  if (named[0].empty()) throw Error("empty train split in " + dir.string());
  return Dataset::from_named(named, options);
}

inline void write_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
  for (Split s : kAllSplits) {
    const auto path = dir / kSplitFiles[static_cast<std::size_t>(s)];
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    for (const Triple& t : ds.split(s)) {
      const auto n = ds.named(t);
      for (const std::string* f : {&n.head, &n.relation, &n.tail})
        if (f->find_first_of("\t\n") != std::string::npos) throw Error("name contains tab or newline: " + *f);
      out << n.head << '\t' << n.relation << '\t' << n.tail << '\n';
    }
    if (!out.flush()) throw Error("write failed: " + path.string());
  }
}

}  // namespace kgaudit

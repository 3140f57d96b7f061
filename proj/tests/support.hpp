#pragma once

// Shared fixtures: literal micro-graphs, a seeded random graph generator that
// plants redundancy, and brute-force oracles that work from raw triple lists
// only (no Dataset indices).

#include <algorithm>
#include <array>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "kgaudit/kgaudit.hpp"

namespace kgtest {

using kgaudit::Dataset;
using kgaudit::EntityId;
using kgaudit::NamedTriple;
using kgaudit::RelationId;
using kgaudit::Triple;

using Lines = std::vector<NamedTriple>;

inline Dataset make_dataset(const Lines& train, const Lines& valid = {}, const Lines& test = {},
                            kgaudit::IndexOptions options = {}) {
  return Dataset::from_named({train, valid, test}, options);
}

inline EntityId eid(const Dataset& ds, const std::string& name) { return *ds.entities().find(name); }
inline RelationId rid(const Dataset& ds, const std::string& name) { return *ds.relations().find(name); }

/// Random graph with planted duplicate, reverse, symmetric and Cartesian
/// relations plus noise. Entity and relation names are "e<i>" / "r<i>".
struct RandomGraphSpec {
  int max_entities = 30;
  int max_relations = 6;
  int max_triples = 300;
  bool allow_self_loops = true;
};

inline std::array<Lines, 3> random_graph(std::uint64_t seed, const RandomGraphSpec& spec = {}) {
  std::mt19937_64 rng(seed);
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto coin = [&](double p) { return std::bernoulli_distribution(p)(rng); };

  const int n_ent = uni(4, spec.max_entities);
  const int n_rel = uni(1, spec.max_relations);
  const int budget = uni(5, spec.max_triples);
  std::vector<std::vector<std::pair<int, int>>> rel_pairs(n_rel);

  auto rand_pair = [&] {
    for (;;) {
      int h = uni(0, n_ent - 1), t = uni(0, n_ent - 1);
      if (spec.allow_self_loops || h != t) return std::pair(h, t);
    }
  };
  int used = 0;
  for (int r = 0; r < n_rel && used < budget; ++r) {
    const int kind = r == 0 ? 0 : uni(0, 4);
    const int size = std::max(1, uni(1, std::max(1, (budget - used) / std::max(1, n_rel - r))));
    auto& pairs = rel_pairs[r];
    const auto& base = rel_pairs[uni(0, r == 0 ? 0 : r - 1)];
    switch (kind) {
      case 0:  // noise
        for (int i = 0; i < size; ++i) pairs.push_back(rand_pair());
        break;
      case 1:  // near-duplicate of an earlier relation
        for (auto p : base)
          if (coin(0.9)) pairs.push_back(p);
        if (coin(0.5)) pairs.push_back(rand_pair());
        break;
      case 2:  // near-reverse of an earlier relation
        for (auto [h, t] : base)
          if (coin(0.9)) pairs.emplace_back(t, h);
        break;
      case 3: {  // symmetric closure of random pairs
        for (int i = 0; i < size / 2 + 1; ++i) {
          auto [h, t] = rand_pair();
          pairs.emplace_back(h, t);
          if (coin(0.85)) pairs.emplace_back(t, h);
        }
        break;
      }
      case 4: {  // dense block
        const int ns = uni(1, 4), no = uni(1, 4);
        for (int s = 0; s < ns; ++s)
          for (int o = 0; o < no; ++o)
            if (coin(0.9)) pairs.emplace_back(s, (s + o + 1) % n_ent);
        break;
      }
    }
    if (pairs.empty()) pairs.push_back(rand_pair());
    if (coin(0.2)) pairs.push_back(pairs.front());  // duplicated line
    used += int(pairs.size());
  }

  std::array<Lines, 3> splits;
  for (int r = 0; r < n_rel; ++r)
    for (auto [h, t] : rel_pairs[r]) {
      const int roll = uni(0, 9);
      const std::size_t s = roll < 7 ? 0 : roll < 8 ? 1 : 2;
      splits[s].push_back({"e" + std::to_string(h), "r" + std::to_string(r), "e" + std::to_string(t)});
    }
  if (splits[0].empty()) splits[0].push_back({"e0", "r0", "e1"});
  if (splits[2].empty()) splits[2].push_back(splits[0].back());
  std::shuffle(splits[0].begin(), splits[0].end(), rng);
  return splits;
}

inline Dataset random_dataset(std::uint64_t seed, const RandomGraphSpec& spec = {}) {
  auto s = random_graph(seed, spec);
  return make_dataset(s[0], s[1], s[2]);
}

// ---- brute-force oracles over raw triple lists ------------------------------

inline std::vector<Triple> lines_of(const Dataset& ds, kgaudit::SplitSet scope) {
  std::vector<Triple> out;
  for (auto s : kgaudit::kAllSplits)
    if (scope.has(s)) out.insert(out.end(), ds.split(s).begin(), ds.split(s).end());
  return out;
}

inline std::set<std::pair<EntityId, EntityId>> oracle_pairs(const std::vector<Triple>& lines, RelationId r) {
  std::set<std::pair<EntityId, EntityId>> out;
  for (const auto& t : lines)
    if (t.relation == r) out.emplace(t.head, t.tail);
  return out;
}

inline std::size_t oracle_count(const std::vector<Triple>& lines, RelationId r) {
  return std::size_t(std::count_if(lines.begin(), lines.end(), [&](const Triple& t) { return t.relation == r; }));
}

inline std::pair<double, double> oracle_overlap(const std::vector<Triple>& lines, RelationId r1, RelationId r2,
                                                bool reversed) {
  const auto a = oracle_pairs(lines, r1);
  const auto b = oracle_pairs(lines, r2);
  std::size_t common = 0;
  for (auto [h, t] : a) {
    for (auto [h2, t2] : b) {
      const bool hit = reversed ? (h == t2 && t == h2) : (h == h2 && t == t2);
      if (hit) {
        ++common;
        break;
      }
    }
  }
  return {double(common) / double(oracle_count(lines, r1)), double(common) / double(oracle_count(lines, r2))};
}

inline double oracle_fill(const std::vector<Triple>& lines, RelationId r) {
  const auto pairs = oracle_pairs(lines, r);
  std::set<EntityId> subj, obj;
  for (auto [h, t] : pairs) subj.insert(h), obj.insert(t);
  return double(pairs.size()) / (double(subj.size()) * double(obj.size()));
}

inline bool oracle_contains(const std::vector<Triple>& lines, const Triple& t) {
  return std::find(lines.begin(), lines.end(), t) != lines.end();
}

/// Exhaustive corruption: raw and filtered rank of `truth` in the explicit
/// permutation `order`.
inline std::pair<std::size_t, std::size_t> oracle_rank(const std::vector<EntityId>& order,
                                                       const std::vector<Triple>& known, const kgaudit::Query& q,
                                                       EntityId truth) {
  std::size_t raw = 1, filtered = 1;
  for (EntityId e : order) {
    if (e == truth) break;
    ++raw;
    if (!oracle_contains(known, kgaudit::complete(q, e))) ++filtered;
  }
  return {raw, filtered};
}

inline bool is_permutation_of_entities(const std::vector<EntityId>& order, std::size_t n) {
  if (order.size() != n) return false;
  std::vector<bool> seen(n, false);
  for (EntityId e : order) {
    if (e >= n || seen[e]) return false;
    seen[e] = true;
  }
  return true;
}

// Rule instantiation oracle. Assigns every variable over all entities and keeps assignments whose body
// atoms are all in train and none of them is the predicted triple itself.
inline std::vector<EntityId> oracle_instantiate(const Dataset& ds, const std::set<Triple>& train,
                                                const kgaudit::HornRule& rule, const kgaudit::Query& q) {
  if (rule.head.relation != q.relation) return {};
  const kgaudit::Term anchor = q.direction == kgaudit::Direction::tail ? rule.head.subject : rule.head.object;
  const kgaudit::Term answer = q.direction == kgaudit::Direction::tail ? rule.head.object : rule.head.subject;
  const std::size_t n = ds.num_entities(), v = rule.variable_count();
  if (answer.is_variable) {
    bool in_body = false;
    for (const kgaudit::Atom& a : rule.body) in_body |= a.subject == answer || a.object == answer;
    if (!in_body && !(anchor == answer)) return {};
  }

  // Variables the rule never mentions stay at 0.
  std::vector<bool> used(v, false);
  for (const kgaudit::Atom& a : rule.body)
    for (kgaudit::Term t : {a.subject, a.object})
      if (t.is_variable) used[t.value] = true;
  for (kgaudit::Term t : {rule.head.subject, rule.head.object})
    if (t.is_variable) used[t.value] = true;

  std::set<EntityId> found;
  std::vector<EntityId> val(v, 0);
  auto value = [&](kgaudit::Term t) { return t.is_variable ? val[t.value] : EntityId(t.value); };
  std::function<void(std::size_t)> assign = [&](std::size_t i) {
    if (i < v) {
      for (EntityId e = 0; e < (used[i] ? n : 1); ++e) {
        val[i] = e;
        assign(i + 1);
      }
      return;
    }
    if (value(anchor) != q.anchor) return;
    const Triple predicted = kgaudit::complete(q, value(answer));
    for (const kgaudit::Atom& a : rule.body) {
      const Triple t{value(a.subject), a.relation, value(a.object)};
      if (!train.contains(t) || t == predicted) return;
    }
    found.insert(value(answer));
  };
  assign(0);
  return {found.begin(), found.end()};
}

inline kgaudit::HornRule random_rule(std::mt19937_64& rng, const Dataset& ds) {
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  for (;;) {
    kgaudit::HornRule rule;
    rule.variables = {"?a", "?b", "?c", "?d"};
    auto term = [&]() -> kgaudit::Term {
      if (pick(8) == 0) return kgaudit::Term::constant(EntityId(pick(ds.num_entities())));
      return kgaudit::Term::variable(std::uint32_t(pick(4)));
    };
    const std::size_t len = 1 + pick(kgaudit::kMaxBodyLength);
    for (std::size_t i = 0; i < len; ++i) rule.body.push_back({RelationId(pick(ds.num_relations())), term(), term()});
    rule.head = {RelationId(pick(ds.num_relations())), kgaudit::Term::variable(0), kgaudit::Term::variable(1)};
    rule.confidence = double(1 + pick(10)) / 10.0;
    bool a = false, b = false;
    for (const kgaudit::Atom& at : rule.body) {
      a |= at.subject == kgaudit::Term::variable(0) || at.object == kgaudit::Term::variable(0);
      b |= at.subject == kgaudit::Term::variable(1) || at.object == kgaudit::Term::variable(1);
    }
    if (a && b) return rule;
  }
}

}  // namespace kgtest

#pragma once

// Builds a deduplicated copy of a dataset from audit findings: one relation
// of every redundant pair is dropped, symmetric relations keep one
// orientation per train pair, and valid/test triples whose pair is already
// linked in train under a symmetric relation are removed.

#include <algorithm>
#include <array>
#include <string>
#include <unordered_set>
#include <vector>

#include "kgaudit/kg_store.hpp"
#include "kgaudit/redundancy_audit.hpp"

namespace kgaudit {

enum class DropRule : std::uint8_t { fewer_triples, lexicographically_later, explicit_list };

struct DedupPolicy {
  DropRule drop_rule = DropRule::fewer_triples;
  /// Relation names to drop when drop_rule == explicit_list.
  std::vector<std::string> explicit_drops;
  bool symmetric_handling = true;
  bool leakage_removal = true;
};

struct DerivationManifest {
  std::vector<std::string> dropped_relations;
  std::vector<std::string> symmetric_relations;
  std::array<std::size_t, 3> removed_dropped{};   // per split
  std::size_t removed_symmetric_train = 0;        // second orientations
  std::array<std::size_t, 3> removed_leakage{};   // valid/test only
  std::size_t orphaned_entities = 0;
  DatasetStats before;
  DatasetStats after;
};

struct Derivation {
  Dataset dataset;
  DerivationManifest manifest;
};

/// Which member of a redundant pair the policy removes.
inline RelationId choose_dropped(const Dataset& ds, RelationId a, RelationId b, DropRule rule,
                                 const std::vector<std::size_t>& train_counts) {
  const auto& na = ds.relations().name(a);
  const auto& nb = ds.relations().name(b);
  const RelationId later = na > nb ? a : b;
  if (rule == DropRule::fewer_triples && train_counts[a] != train_counts[b])
    return train_counts[a] < train_counts[b] ? a : b;
  return later;
}

inline Derivation derive_deduplicated(const Dataset& ds, const std::vector<RedundancyFinding>& findings,
                                      const DedupPolicy& policy = {}) {
  const std::size_t nrel = ds.num_relations();
  for (const auto& f : findings)
    if (f.first >= nrel || f.second >= nrel) throw Error("finding references unknown relation");

  std::vector<std::size_t> train_counts(nrel, 0);
  for (const Triple& t : ds.train()) ++train_counts[t.relation];

  std::vector<bool> dropped(nrel, false), symmetric(nrel, false);
  if (policy.drop_rule == DropRule::explicit_list) {
    for (const auto& name : policy.explicit_drops) {
      auto id = ds.relations().find(name);
      if (!id) throw Error("explicit drop names unknown relation '" + name + "'");
      dropped[*id] = true;
    }
  } else {
    for (const auto& f : findings) {
      if (!f.is_pair() || f.first == f.second || dropped[f.first] || dropped[f.second]) continue;
      dropped[choose_dropped(ds, f.first, f.second, policy.drop_rule, train_counts)] = true;
    }
  }
  for (const auto& f : findings)
    if (f.kind == FindingKind::symmetric && !dropped[f.first]) symmetric[f.first] = true;

  DerivationManifest m;
  m.before = ds.stats();
  for (RelationId r = 0; r < nrel; ++r) {
    if (dropped[r]) m.dropped_relations.push_back(ds.relations().name(r));
    if (symmetric[r]) m.symmetric_relations.push_back(ds.relations().name(r));
  }
  std::sort(m.dropped_relations.begin(), m.dropped_relations.end());
  std::sort(m.symmetric_relations.begin(), m.symmetric_relations.end());

  const auto& train_index = ds.index(Split::train);
  std::array<std::vector<NamedTriple>, 3> kept;
  for (Split s : kAllSplits) {
    const auto si = static_cast<std::size_t>(s);
    for (const Triple& t : ds.split(s)) {
      if (dropped[t.relation]) {
        ++m.removed_dropped[si];
        continue;
      }
      if (symmetric[t.relation]) {
        const Triple rev{t.tail, t.relation, t.head};
        if (s == Split::train) {
          // Of {(h,t), (t,h)} keep the orientation whose head id is smaller.
          if (policy.symmetric_handling && t.head > t.tail && train_index.contains(rev)) {
            ++m.removed_symmetric_train;
            continue;
          }
        } else if (policy.leakage_removal && (train_index.contains(t) || train_index.contains(rev))) {
          ++m.removed_leakage[si];
          continue;
        }
      }
      kept[si].push_back(ds.named(t));
    }
  }

  Dataset out = Dataset::from_named(kept, ds.options());
  m.after = out.stats();
  std::unordered_set<std::string> remaining(out.entities().names().begin(), out.entities().names().end());
  m.orphaned_entities = ds.num_entities() - remaining.size();
  return {std::move(out), std::move(m)};
}

}  // namespace kgaudit

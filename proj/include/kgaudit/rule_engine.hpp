#pragma once

// Application of externally mined Horn rules. Rules are read from a TSV file
// (body atoms joined by " & ", head atom, confidence); answers are ranked by
// the maximum confidence of the rules producing them, ties broken by the
// number of producing rules.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "kgaudit/baseline_predictors.hpp"
#include "kgaudit/kg_store.hpp"
#include "kgaudit/ranking.hpp"

namespace kgaudit {

/// Either a rule variable (index into the rule's variable table) or an entity.
struct Term {
  bool is_variable = true;
  std::uint32_t value = 0;

  static Term variable(std::uint32_t v) { return {true, v}; }
  static Term constant(EntityId e) { return {false, e}; }
  friend bool operator==(const Term&, const Term&) = default;
};

struct Atom {
  RelationId relation = 0;
  Term subject;
  Term object;
  friend bool operator==(const Atom&, const Atom&) = default;
};

inline constexpr std::size_t kMaxBodyLength = 3;

struct HornRule {
  std::vector<Atom> body;
  Atom head;
  double confidence = 0.0;
  std::vector<std::string> variables;

  std::size_t variable_count() const { return variables.size(); }
};

struct ParsedRules {
  std::vector<HornRule> rules;
  std::size_t skipped = 0;  // rules naming relations or entities absent from the dataset
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

struct RawAtom {
  std::string_view relation, subject, object;
};

inline RawAtom split_atom(std::string_view text, std::size_t line_no) {
  text = trim(text);
  const auto open = text.find('(');
  if (open == std::string_view::npos || open == 0 || text.back() != ')')
    throw Error("rule line " + std::to_string(line_no) + ": invalid atom '" + std::string(text) + "'");
  const std::string_view args = text.substr(open + 1, text.size() - open - 2);
  // A constant may itself contain commas; split next to the variable when possible.
  std::size_t comma = args.find(',');
  if (!args.empty() && args.front() != '?' && args.rfind(",?") != std::string_view::npos) comma = args.rfind(",?");
  if (comma == std::string_view::npos)
    throw Error("rule line " + std::to_string(line_no) + ": atom needs two arguments '" + std::string(text) + "'");
  RawAtom a{trim(text.substr(0, open)), trim(args.substr(0, comma)), trim(args.substr(comma + 1))};
  if (a.relation.empty() || a.subject.empty() || a.object.empty())
    throw Error("rule line " + std::to_string(line_no) + ": empty atom field '" + std::string(text) + "'");
  return a;
}

}  // namespace detail

/// Parses rule text. Rules naming relations or entities unknown to `ds` are
/// skipped and counted; syntax errors throw.
inline ParsedRules parse_rules_text(std::string_view text, const Dataset& ds) {
  ParsedRules out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (detail::trim(line).empty() || line.front() == '#') continue;

    std::vector<std::string_view> cols;
    for (std::size_t start = 0;;) {
      const auto tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab == std::string_view::npos ? tab : tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    if (cols.size() != 3) throw Error("rule line " + std::to_string(line_no) + ": expected 3 tab-separated columns");

    std::vector<detail::RawAtom> raw_body;
    for (std::string_view rest = cols[0];;) {
      const auto amp = rest.find(" & ");
      raw_body.push_back(detail::split_atom(rest.substr(0, amp), line_no));
      if (amp == std::string_view::npos) break;
      rest = rest.substr(amp + 3);
    }
    if (raw_body.size() > kMaxBodyLength)
      throw Error("rule line " + std::to_string(line_no) + ": body longer than " + std::to_string(kMaxBodyLength));
    const auto raw_head = detail::split_atom(cols[1], line_no);

    const std::string_view conf_text = detail::trim(cols[2]);
    double conf = 0.0;
    auto [ptr, ec] = std::from_chars(conf_text.data(), conf_text.data() + conf_text.size(), conf);
    if (ec != std::errc{} || ptr != conf_text.data() + conf_text.size() || !(conf >= 0.0 && conf <= 1.0))
      throw Error("rule line " + std::to_string(line_no) + ": confidence must be a decimal in [0, 1]");

    HornRule rule;
    rule.confidence = conf;
    bool resolvable = true;
    auto term = [&](std::string_view s) -> Term {
      if (s.front() == '?') {
        auto it = std::find(rule.variables.begin(), rule.variables.end(), s);
        if (it != rule.variables.end()) return Term::variable(std::uint32_t(it - rule.variables.begin()));
        rule.variables.emplace_back(s);
        return Term::variable(std::uint32_t(rule.variables.size() - 1));
      }
      auto id = ds.entities().find(s);
      if (!id) {
        resolvable = false;
        return {};
      }
      return Term::constant(*id);
    };
    auto atom = [&](const detail::RawAtom& a) -> Atom {
      Atom out;
      if (auto r = ds.relations().find(a.relation)) out.relation = *r;
      else resolvable = false;
      out.subject = term(a.subject);
      out.object = term(a.object);
      return out;
    };
    for (const auto& a : raw_body) rule.body.push_back(atom(a));
    rule.head = atom(raw_head);

    if (!resolvable) {
      ++out.skipped;
      continue;
    }
    // Head variables must be bound by the body, except at most one which the
    // query itself supplies.
    std::size_t unbound = 0;
    for (const Term& t : {rule.head.subject, rule.head.object}) {
      if (!t.is_variable) continue;
      const bool in_body = std::any_of(rule.body.begin(), rule.body.end(), [&](const Atom& b) {
        return b.subject == t || b.object == t;
      });
      unbound += !in_body;
    }
    if (unbound > 1 || (unbound == 1 && rule.head.subject == rule.head.object))
      throw Error("rule line " + std::to_string(line_no) + ": head variables must appear in the body");
    out.rules.push_back(std::move(rule));
  }
  return out;
}

inline ParsedRules parse_rules(const std::filesystem::path& file, const Dataset& ds) {
  return parse_rules_text(detail::read_file(file), ds);
}

/// The Horn form of an intersection rule over variables ?a, ?b.
inline HornRule to_horn_rule(const IntersectionRule& r) {
  HornRule h;
  h.variables = {"?a", "?b"};
  const Term a = Term::variable(0), b = Term::variable(1);
  h.head = {r.target, a, b};
  h.body = {r.orientation == Orientation::same ? Atom{r.source, a, b} : Atom{r.source, b, a}};
  h.confidence = r.confidence;
  return h;
}

/// Instantiates rules against the train split by index joins.
class HornRulePredictor {
 public:
  HornRulePredictor(const Dataset& ds, std::vector<HornRule> rules)
      : HornRulePredictor(ds, std::move(rules), std::make_shared<FallbackOrder>(ds)) {}

  HornRulePredictor(const Dataset& ds, std::vector<HornRule> rules, std::shared_ptr<const FallbackOrder> fallback)
      : ds_(&ds), rules_(std::move(rules)), fallback_(std::move(fallback)), train_pairs_(ds.num_relations()) {
    for (std::size_t i = 0; i < rules_.size(); ++i) by_head_[rules_[i].head.relation].push_back(i);
    for (const Triple& t : ds.train()) train_pairs_[t.relation].push_back(pack(t.head, t.tail));
    for (auto& v : train_pairs_) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    }
  }

  const std::vector<HornRule>& rules() const { return rules_; }

  /// Answers one rule produces for the query (sorted).
  std::vector<EntityId> instantiate(const HornRule& rule, const Query& q) const {
    if (rule.head.relation != q.relation) return {};
    const Term anchor = q.direction == Direction::tail ? rule.head.subject : rule.head.object;
    const Term answer = q.direction == Direction::tail ? rule.head.object : rule.head.subject;

    Bindings b(rule.variable_count());
    if (!anchor.is_variable && anchor.value != q.anchor) return {};
    if (anchor.is_variable) b[anchor.value] = q.anchor;
    if (answer.is_variable && !b[answer.value] && !mentions(rule.body, answer)) return {};

    std::unordered_set<EntityId> found;
    Search search{rule, q, answer, found};
    join(search, b, 0);
    std::vector<EntityId> out(found.begin(), found.end());
    std::sort(out.begin(), out.end());
    return out;
  }

  CandidateScores candidates(const Query& q) const {
    CandidateScores scores;
    auto it = by_head_.find(q.relation);
    if (it == by_head_.end()) return scores;
    for (std::size_t idx : it->second)
      for (EntityId e : instantiate(rules_[idx], q)) scores.add(e, rules_[idx].confidence);
    return scores;
  }

  RankedPrediction predict(const Query& q) const { return {q, candidates(q).ordered(*ds_), fallback_}; }

 private:
  using Bindings = std::vector<std::optional<EntityId>>;

  struct Search {
    const HornRule& rule;
    const Query& query;
    Term answer;
    std::unordered_set<EntityId>& found;
  };

  static bool mentions(const std::vector<Atom>& body, Term t) {
    return std::any_of(body.begin(), body.end(), [&](const Atom& a) { return a.subject == t || a.object == t; });
  }

  static std::optional<EntityId> resolve(Term t, const Bindings& b) {
    if (!t.is_variable) return t.value;
    return b[t.value];
  }

  std::size_t estimate(const Atom& a, const Bindings& b) const {
    const auto s = resolve(a.subject, b), o = resolve(a.object, b);
    const auto& train = ds_->index(Split::train);
    if (s && o) return 1;
    if (s) return train.tails(*s, a.relation).size();
    if (o) return train.heads(a.relation, *o).size();
    return train_pairs_[a.relation].size();
  }

  // Atoms are joined smallest-estimate first; `done` marks consumed atoms.
  void join(const Search& s, Bindings& b, unsigned done) const {
    const auto& body = s.rule.body;
    if (auto known = resolve(s.answer, b); known && s.found.contains(*known)) return;
    if (done == (1u << body.size()) - 1) {
      const auto answer = resolve(s.answer, b);
      if (!answer) return;
      const Triple predicted = complete(s.query, *answer);
      for (const Atom& a : body)
        if (Triple{*resolve(a.subject, b), a.relation, *resolve(a.object, b)} == predicted) return;
      s.found.insert(*answer);
      return;
    }
    std::size_t pick = body.size(), best = SIZE_MAX;
    for (std::size_t i = 0; i < body.size(); ++i) {
      if (done & (1u << i)) continue;
      const auto est = estimate(body[i], b);
      if (est < best) best = est, pick = i;
    }
    const Atom& a = body[pick];
    const unsigned next = done | (1u << pick);
    const auto& train = ds_->index(Split::train);
    const auto subj = resolve(a.subject, b), obj = resolve(a.object, b);

    auto bind_pair = [&](EntityId h, EntityId t) {
      Bindings saved = b;
      if (a.subject.is_variable) b[a.subject.value] = h;
      if (a.object.is_variable) {
        if (b[a.object.value] && *b[a.object.value] != t) {
          b = std::move(saved);
          return;
        }
        b[a.object.value] = t;
      }
      join(s, b, next);
      b = std::move(saved);
    };

    if (subj && obj) {
      if (train.contains({*subj, a.relation, *obj})) join(s, b, next);
    } else if (subj) {
      for (EntityId t : train.tails(*subj, a.relation)) bind_pair(*subj, t);
    } else if (obj) {
      for (EntityId h : train.heads(a.relation, *obj)) bind_pair(h, *obj);
    } else {
      for (PairKey k : train_pairs_[a.relation]) bind_pair(hi_of(k), lo_of(k));
    }
  }

  const Dataset* ds_;
  std::vector<HornRule> rules_;
  std::shared_ptr<const FallbackOrder> fallback_;
  std::vector<std::vector<PairKey>> train_pairs_;
  std::unordered_map<RelationId, std::vector<std::size_t>> by_head_;
};

/// Ranked prediction for one query under `rules`.
inline RankedPrediction apply_rules(const HornRulePredictor& engine, const Query& q) { return engine.predict(q); }

}  // namespace kgaudit

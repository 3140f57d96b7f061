#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include <CLI11.hpp>

#include "kgaudit/kgaudit.hpp"

namespace fs = std::filesystem;
using namespace kgaudit;
using nlohmann::json;

namespace {

struct RunConfig {
  std::string data;
  AuditConfig audit;
  std::string predictor;
  std::string rules;
  std::string rankings;
  std::string out;
  std::vector<int> ks{1, 3, 10};
  std::string filter_scope = "all";
  std::string drop_rule = "fewer-triples";
  std::vector<std::string> drops;
  bool no_symmetric = false;
  bool no_leakage = false;
};

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

// Hash over the three split files, each prefixed by its name and length.
std::string dataset_hash(const fs::path& dir) {
  std::string buf;
  for (auto name : kSplitFiles) {
    const std::string content = detail::read_file(dir / name);
    buf += name;
    buf += '\0';
    buf += std::to_string(content.size());
    buf += '\0';
    buf += content;
  }
  return sha256_hex(buf);
}

json config_json(const std::string& command, const RunConfig& c) {
  json j{{"command", command},
         {"data", c.data},
         {"theta1", c.audit.theta1},
         {"theta2", c.audit.theta2},
         {"cartesian_threshold", c.audit.cartesian_threshold},
         {"category_cutoff", c.audit.category_cutoff},
         {"min_triples", c.audit.min_triples}};
  if (command == "predict" || command == "evaluate") {
    j["ks"] = c.ks;
    j["filter_scope"] = c.filter_scope;
    if (!c.predictor.empty()) j["predictor"] = c.predictor;
    if (!c.rules.empty()) j["rules"] = c.rules;
    if (!c.rankings.empty()) j["rankings"] = c.rankings;
  }
  if (command == "dedupe") {
    j["drop_rule"] = c.drop_rule;
    j["drops"] = c.drops;
    j["symmetric_handling"] = !c.no_symmetric;
    j["leakage_removal"] = !c.no_leakage;
  }
  return j;
}

json provenance(const std::string& command, const RunConfig& c, const std::string& hash) {
  return {{"tool", "kgaudit"}, {"config", config_json(command, c)}, {"dataset_sha256", hash}};
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  f << text;
  if (!f) throw Error("cannot write " + p.string());
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

fs::path out_dir(const RunConfig& c, bool required) {
  if (c.out.empty()) {
    if (required) throw Error("--out is required for this command");
    return {};
  }
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec) throw Error("cannot create output directory " + c.out + ": " + ec.message());
  return c.out;
}

SplitSet filter_scope(const RunConfig& c) {
  return c.filter_scope == "all" ? SplitSet::all() : SplitSet{Split::train, Split::test};
}

int cmd_stats(const RunConfig& c) {
  const Dataset ds = load_dataset(c.data);
  json j = provenance("stats", c, dataset_hash(c.data));
  j["stats"] = io::stats_json(ds.stats());
  if (const auto dir = out_dir(c, false); !dir.empty()) write_json(dir / "stats.json", j);
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_audit(const RunConfig& c) {
  const Dataset ds = load_dataset(c.data);
  const auto audit = run_audit(ds, c.audit);
  std::vector<RedundancyFinding> all = audit.pair_findings();
  all.insert(all.end(), audit.cartesian.begin(), audit.cartesian.end());

  const RedundancyIndex index(ds, audit.pair_findings());
  const auto hist = code_histogram(ds, index);
  const auto leak = leakage_stats(ds, index);

  json j = provenance("audit", c, dataset_hash(c.data));
  j["stats"] = io::stats_json(ds.stats());
  j["findings"] = io::findings_json(ds, all);
  j["histogram"] = io::histogram_json(hist);
  j["leakage"] = {{"train_with_reverse_in_train", leak.train_with_reverse_in_train},
                  {"train_with_duplicate_in_train", leak.train_with_duplicate_in_train},
                  {"test_with_reverse_in_train", leak.test_with_reverse_in_train},
                  {"test_with_duplicate_in_train", leak.test_with_duplicate_in_train},
                  {"test_with_reverse_in_test", leak.test_with_reverse_in_test},
                  {"test_with_duplicate_in_test", leak.test_with_duplicate_in_test}};
  std::size_t cart_triples = 0;
  for (const auto& f : audit.cartesian) cart_triples += ds.profile(f.first).triple_count;
  j["cartesian_triples"] = cart_triples;

  if (const auto dir = out_dir(c, false); !dir.empty()) {
    write_json(dir / "findings.json", j);
    write_text(dir / "findings.csv", io::findings_csv(ds, all));
    json h = provenance("audit", c, j["dataset_sha256"]);
    h["histogram"] = j["histogram"];
    write_json(dir / "histogram.json", h);
  } else {
    std::cout << j.dump(2) << "\n";
  }
  return 0;
}

int cmd_dedupe(const RunConfig& c) {
  const auto dir = out_dir(c, true);
  const Dataset ds = load_dataset(c.data);
  DedupPolicy policy;
  if (c.drop_rule == "lexicographic") policy.drop_rule = DropRule::lexicographically_later;
  else if (c.drop_rule == "explicit") policy.drop_rule = DropRule::explicit_list;
  policy.explicit_drops = c.drops;
  policy.symmetric_handling = !c.no_symmetric;
  policy.leakage_removal = !c.no_leakage;

  const auto derived = derive_deduplicated(ds, run_audit(ds, c.audit).pair_findings(), policy);
  write_dataset(derived.dataset, dir);
  json j = provenance("dedupe", c, dataset_hash(c.data));
  j["manifest"] = io::manifest_json(derived.manifest);
  j["output_sha256"] = dataset_hash(dir);
  write_json(dir / "manifest.json", j);
  std::cout << j["manifest"].dump(2) << "\n";
  return 0;
}

// Runs `fn` with the predictor selected by the config.
template <class Fn>
void with_predictor(const Dataset& ds, const RunConfig& c, Fn&& fn) {
  if (c.predictor == "frequency") {
    fn(FrequencyPredictor(ds));
  } else if (c.predictor == "cartesian") {
    fn(CartesianPredictor::from_findings(ds, detect_cartesian(ds, c.audit)));
  } else if (!c.rules.empty()) {
    const auto parsed = parse_rules(c.rules, ds);
    if (parsed.skipped != 0)
      std::cerr << "warning: skipped " << parsed.skipped << " rule(s) naming unknown relations or entities\n";
    fn(HornRulePredictor(ds, parsed.rules));
  } else {
    fn(IntersectionRulePredictor(ds, build_intersection_rules(ds, c.audit)));
  }
}

Evaluation run_predictor(const Dataset& ds, const RunConfig& c) {
  Evaluation ev;
  with_predictor(ds, c, [&](const auto& p) { ev = evaluate_predictor(ds, p, {c.ks, filter_scope(c)}); });
  return ev;
}

int cmd_predict(const RunConfig& c) {
  if (c.predictor.empty()) throw Error("predict needs --predictor");
  const auto dir = out_dir(c, true);
  const Dataset ds = load_dataset(c.data);
  const Evaluation ev = run_predictor(ds, c);
  write_text(dir / "rankings.jsonl", io::rankings_jsonl(ds, ev.results));
  write_json(dir / "rankings.jsonl.meta.json", provenance("predict", c, dataset_hash(c.data)));
  return 0;
}

int cmd_evaluate(const RunConfig& c) {
  if (c.predictor.empty() == c.rankings.empty()) throw Error("evaluate needs exactly one of --predictor or --rankings");
  const Dataset ds = load_dataset(c.data);
  Evaluation ev = c.rankings.empty() ? run_predictor(ds, c) : ingest_rankings(c.rankings, ds, c.ks);

  const auto codes = test_codes(ds, RedundancyIndex(ds, run_audit(ds, c.audit).pair_findings()));
  BreakdownContext ctx{c.ks, c.audit.category_cutoff, &codes};
  add_breakdowns(ev, ds, {Grouping::relation, Grouping::category, Grouping::redundancy_code, Grouping::direction}, ctx);

  json j = provenance("evaluate", c, dataset_hash(c.data));
  j["report"] = io::report_json(ev.report);
  if (const auto dir = out_dir(c, false); !dir.empty()) {
    write_json(dir / "report.json", j);
    for (const auto& [name, groups] : ev.report.breakdowns)
      write_text(dir / ("by_" + name + ".csv"), io::group_csv(groups, name));
  } else {
    std::cout << j.dump(2) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Redundancy audit and evaluation toolkit for link-prediction benchmarks"};
  app.set_config("--config", "", "TOML/INI file with option defaults; flags override it");
  app.require_subcommand(1);

  RunConfig c;
  app.add_option("--data", c.data, "Directory holding train.txt, valid.txt, test.txt")->check(CLI::ExistingDirectory);
  app.add_option("--theta1", c.audit.theta1, "Overlap threshold relative to the first relation");
  app.add_option("--theta2", c.audit.theta2, "Overlap threshold relative to the second relation");
  app.add_option("--cartesian-threshold", c.audit.cartesian_threshold, "Fill ratio above which a relation is Cartesian");
  app.add_option("--min-triples", c.audit.min_triples, "Smallest relation considered for Cartesian detection");
  app.add_option("--category-cutoff", c.audit.category_cutoff, "Average-degree cutoff for 1-1/1-n/n-1/n-m");
  app.add_option("--predictor", c.predictor, "Built-in predictor")
      ->check(CLI::IsMember({"rule", "cartesian", "frequency"}));
  app.add_option("--rules", c.rules, "Horn rules file (TSV) used by the rule predictor")->check(CLI::ExistingFile);
  app.add_option("--rankings", c.rankings, "Precomputed rankings (JSONL) to evaluate")->check(CLI::ExistingFile);
  app.add_option("--out", c.out, "Output directory");
  app.add_option("--hits", c.ks, "Hits@k cutoffs")->delimiter(',');
  app.add_option("--filter-scope", c.filter_scope, "Splits filtered out of rankings")
      ->check(CLI::IsMember({"all", "train-test"}));
  app.add_option("--drop-rule", c.drop_rule, "Which relation of a duplicate pair is dropped")
      ->check(CLI::IsMember({"fewer-triples", "lexicographic", "explicit"}));
  app.add_option("--drop", c.drops, "Relations to drop with --drop-rule explicit")->delimiter(',');
  app.add_flag("--no-symmetric-handling", c.no_symmetric, "Keep both orientations of symmetric relations");
  app.add_flag("--no-leakage-removal", c.no_leakage, "Keep valid/test triples leaked through symmetric relations");

  std::string command;
  for (const char* name : {"stats", "audit", "dedupe", "predict", "evaluate"}) {
    auto* sub = app.add_subcommand(name);
    sub->fallthrough();
    sub->callback([&command, name] { command = name; });
  }
  app.get_subcommand("stats")->description("Entity, relation and split counts");
  app.get_subcommand("audit")->description("Detect redundant and Cartesian relations; histogram of test redundancy codes");
  app.get_subcommand("dedupe")->description("Write a deduplicated copy of the dataset plus a manifest");
  app.get_subcommand("predict")->description("Write rankings JSONL from a built-in predictor");
  app.get_subcommand("evaluate")->description("Raw/filtered metrics with per-relation, category, code and direction breakdowns");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (c.data.empty()) throw Error("--data is required");
    c.audit.validate();
    if (!c.rules.empty() && c.predictor != "rule") throw Error("--rules only applies to --predictor rule");
    for (int k : c.ks)
      if (k < 1) throw Error("--hits values must be >= 1");
    if (command == "stats") return cmd_stats(c);
    if (command == "audit") return cmd_audit(c);
    if (command == "dedupe") return cmd_dedupe(c);
    if (command == "predict") return cmd_predict(c);
    return cmd_evaluate(c);
  } catch (const std::exception& e) {
    std::cerr << "kgaudit: " << e.what() << "\n";
    return 1;
  }
}

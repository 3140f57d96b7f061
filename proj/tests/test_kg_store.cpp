#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>

#include "support.hpp"

using namespace kgaudit;
using namespace kgtest;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("kgaudit_store_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

}  // namespace

TEST(KgStore, LoadsTabSeparatedSplits) {
  const auto dir = temp_dir("load");
  write_text(dir / "train.txt", "a\tr\tb\nb\tr\tc\na\ts\tc\n");
  write_text(dir / "valid.txt", "c\tr\td\n");
  write_text(dir / "test.txt", "a name with spaces\tr\tb\n");
  const Dataset ds = load_dataset(dir);
  EXPECT_EQ(ds.stats(), (DatasetStats{5, 2, {3, 1, 1}}));
  EXPECT_EQ(ds.entities().name(ds.test()[0].head), "a name with spaces");
}

TEST(KgStore, MissingFileIsAnError) {
  const auto dir = temp_dir("missing");
  write_text(dir / "train.txt", "a\tr\tb\n");
  write_text(dir / "valid.txt", "");
  EXPECT_THROW(load_dataset(dir), Error);
}

TEST(KgStore, EmptyTrainSplitIsAnError) {
  const auto dir = temp_dir("empty");
  for (auto f : kSplitFiles) write_text(dir / f, "");
  try {
    load_dataset(dir);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("empty train split"), std::string::npos);
  }
}

TEST(KgStore, WrongColumnCountIsAnError) {
  const auto dir = temp_dir("malformed");
  write_text(dir / "train.txt", "a\tr\tb\na\tr\n");
  write_text(dir / "valid.txt", "");
  write_text(dir / "test.txt", "");
  EXPECT_THROW(load_dataset(dir), Error);
  write_text(dir / "train.txt", "a\tr\tb\tc\n");
  EXPECT_THROW(load_dataset(dir), Error);
}

TEST(KgStore, EntitiesOnlyInTestAreInterned) {
  const Dataset ds = make_dataset({{"a", "r", "b"}}, {}, {{"x", "q", "y"}});
  EXPECT_EQ(ds.num_entities(), 4u);
  EXPECT_EQ(ds.num_relations(), 2u);
  EXPECT_TRUE(ds.entities().find("x").has_value());
}

TEST(KgStore, NeighborsMatchScan) {
  const Dataset ds = make_dataset({{"a", "r", "b"}, {"a", "r", "c"}, {"d", "r", "b"}});
  const auto a = eid(ds, "a"), b = eid(ds, "b"), c = eid(ds, "c"), d = eid(ds, "d");
  const auto r = rid(ds, "r");
  EXPECT_EQ(ds.neighbors(a, r, Direction::tail), (std::vector<EntityId>{b, c}));
  EXPECT_EQ(ds.neighbors(b, r, Direction::head), (std::vector<EntityId>{a, d}));
  EXPECT_TRUE(ds.neighbors(c, r, Direction::tail).empty());
}

TEST(KgStore, ContainsRespectsScope) {
  const Dataset ds = make_dataset({{"a", "r", "b"}}, {{"b", "r", "c"}}, {{"c", "r", "a"}});
  const Triple in_valid{eid(ds, "b"), rid(ds, "r"), eid(ds, "c")};
  EXPECT_TRUE(ds.contains(ds.train()[0], SplitSet::train_only()));
  EXPECT_FALSE(ds.contains(in_valid, {Split::train, Split::test}));
  EXPECT_TRUE(ds.contains(in_valid, SplitSet::all()));
  EXPECT_FALSE(ds.contains({eid(ds, "a"), rid(ds, "r"), eid(ds, "a")}, SplitSet::all()));
}

TEST(KgStore, EntityFrequencyCountsTrainSlots) {
  const Dataset ds = make_dataset({{"e", "r", "a"}, {"b", "r", "e"}, {"e", "s", "c"}, {"a", "r", "b"}}, {},
                                  {{"z", "r", "e"}});
  EXPECT_EQ(ds.entity_frequency(eid(ds, "e")), 3u);
  EXPECT_EQ(ds.entity_frequency(eid(ds, "z")), 0u);
  std::size_t total = 0;
  for (EntityId e = 0; e < ds.num_entities(); ++e) total += ds.entity_frequency(e);
  EXPECT_EQ(total, 2 * ds.train().size());
}

TEST(KgStore, DuplicateLinesCollapseInPairSetOnly) {
  const Dataset ds = make_dataset({{"a", "r", "b"}, {"a", "r", "b"}, {"a", "r", "c"}});
  const auto& p = ds.profile(rid(ds, "r"));
  EXPECT_EQ(p.triple_count, 3u);
  EXPECT_EQ(p.pair_set.size(), 2u);
  EXPECT_EQ(p.subjects.size(), 1u);
  EXPECT_EQ(p.objects.size(), 2u);
}

TEST(KgStore, ProfileScopeIsConfigurable) {
  const Lines train{{"a", "r", "b"}}, test{{"c", "r", "d"}};
  EXPECT_EQ(make_dataset(train, {}, test).profile(0).triple_count, 1u);
  EXPECT_EQ(make_dataset(train, {}, test, {SplitSet::all()}).profile(0).triple_count, 2u);
}

TEST(KgStore, WriteToUnwritableLocationFails) {
  const Dataset ds = make_dataset({{"a", "r", "b"}});
  const auto dir = temp_dir("ro");
  write_text(dir / "blocker", "x");
  EXPECT_THROW(write_dataset(ds, dir / "blocker" / "out"), Error);
}

// Index/scan equivalence, dictionary bijectivity and write/load round trip
// over random graphs.
TEST(KgStoreProperty, IndicesAgreeWithLinearScan) {
  for (std::uint64_t seed = 1; seed <= 150; ++seed) {
    const Dataset ds = random_dataset(seed, {.max_entities = 40, .max_relations = 5, .max_triples = 1000});
    const auto train = lines_of(ds, SplitSet::train_only());
    const auto all = lines_of(ds, SplitSet::all());
    std::size_t neighbor_total = 0;
    for (EntityId a = 0; a < ds.num_entities(); ++a) {
      for (RelationId r = 0; r < ds.num_relations(); ++r) {
        std::set<EntityId> tails, heads;
        for (const auto& t : train) {
          if (t.head == a && t.relation == r) tails.insert(t.tail);
          if (t.tail == a && t.relation == r) heads.insert(t.head);
        }
        const auto nt = ds.neighbors(a, r, Direction::tail);
        ASSERT_EQ(std::vector<EntityId>(tails.begin(), tails.end()), nt) << "seed " << seed;
        ASSERT_EQ(std::vector<EntityId>(heads.begin(), heads.end()), ds.neighbors(a, r, Direction::head));
        neighbor_total += nt.size();
        for (EntityId b = 0; b < ds.num_entities(); ++b) {
          const Triple t{a, r, b};
          ASSERT_EQ(ds.contains(t, SplitSet::all()), oracle_contains(all, t));
          ASSERT_EQ(ds.contains(t, SplitSet::train_only()), oracle_contains(train, t));
        }
      }
    }
    std::size_t distinct_train = 0;
    for (RelationId r = 0; r < ds.num_relations(); ++r) distinct_train += oracle_pairs(train, r).size();
    EXPECT_EQ(neighbor_total, distinct_train);
  }
}

TEST(KgStoreProperty, DictionaryIsBijective) {
  const Dataset ds = random_dataset(7);
  for (EntityId e = 0; e < ds.num_entities(); ++e) EXPECT_EQ(*ds.entities().find(ds.entities().name(e)), e);
  for (RelationId r = 0; r < ds.num_relations(); ++r) EXPECT_EQ(*ds.relations().find(ds.relations().name(r)), r);
}

TEST(KgStoreProperty, WriteThenLoadRoundTrips) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Dataset ds = random_dataset(seed);
    const auto dir = temp_dir("roundtrip");
    write_dataset(ds, dir);
    const Dataset back = load_dataset(dir);
    for (Split s : kAllSplits) {
      ASSERT_EQ(ds.split(s).size(), back.split(s).size());
      for (std::size_t i = 0; i < ds.split(s).size(); ++i) {
        const auto x = ds.named(ds.split(s)[i]), y = back.named(back.split(s)[i]);
        ASSERT_EQ(std::tie(x.head, x.relation, x.tail), std::tie(y.head, y.relation, y.tail));
      }
    }
  }
}

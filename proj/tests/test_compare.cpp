#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "compare/compare.hpp"
#include "doctest.h"
#include "ingest/records.hpp"
#include "oracles.hpp"
#include "tmpdir.hpp"
#include "util/errors.hpp"
#include "util/rng.hpp"

using namespace linkmse;

namespace {

FieldCompareSpec name_spec() {
  FieldCompareSpec s;
  s.field_name = "given";
  s.measure = MeasureKind::NormalizedEdit;
  s.bounds = {0.0, 0.25, 0.5};
  return s;
}

FieldCompareSpec year_spec() {
  FieldCompareSpec s;
  s.field_name = "year";
  s.measure = MeasureKind::AbsoluteDifference;
  s.bounds = {0.0, 1.0, 3.0};
  return s;
}

FieldCompareSpec day_spec() {
  FieldCompareSpec s;
  s.field_name = "day";
  s.measure = MeasureKind::AbsoluteDifference;
  s.bounds = {0.0, 2.0, 7.0};
  return s;
}

FieldCompareSpec binary_spec() {
  FieldCompareSpec s;
  s.field_name = "muni";
  s.measure = MeasureKind::Binary;
  return s;
}

}  // namespace

TEST_CASE("levenshtein agrees with a naive recursion") {
  Rng rng(99);
  auto random_string = [&](int max_len) {
    std::string s;
    const int len = static_cast<int>(rng.uniform() * (max_len + 1));
    for (int i = 0; i < len; ++i) s.push_back("ABC"[static_cast<int>(rng.uniform() * 3)]);
    return s;
  };
  for (int t = 0; t < 200; ++t) {
    const std::string a = random_string(7), b = random_string(7);
    CHECK(levenshtein(a, b) == doctest::Approx(oracles::naive_levenshtein(a, b)));
  }
  CHECK(levenshtein("", "abc") == 3);
  CHECK(levenshtein("kitten", "sitting") == 3);
}

TEST_CASE("normalized edit distance") {
  using V = std::vector<std::string>;
  CHECK(normalized_edit_distance(V{"JUAN"}, V{"JUAN"}) == 0.0);
  CHECK(normalized_edit_distance(V{"ABC"}, V{"ABD"}) ==
        doctest::Approx(oracles::naive_levenshtein("ABC", "ABD") / 3.0));
  CHECK(normalized_edit_distance(V{"ABC"}, V{"ABD"}) == doctest::Approx(1.0 / 3.0));
  CHECK(normalized_edit_distance(V{"GARCIA", "LOPEZ"}, V{"LOPEZ", "GARCIA"}) == 0.0);
  CHECK(normalized_edit_distance(V{"GARCIA", "LOPEZ"}, V{"LOPEZ", "GARCIA"}, false) > 0.0);
  CHECK_THROWS_AS(normalized_edit_distance(V{}, V{}), ConstraintError);

  // one adjacent swap on a 4-token side
  CHECK(normalized_edit_distance(V{"A", "B", "C", "D"}, V{"B", "A", "C", "D"}) == 0.0);
  // full reversal is not reachable by a single adjacent swap
  CHECK(normalized_edit_distance(V{"AX", "BX", "CX", "DX"}, V{"DX", "CX", "BX", "AX"}) > 0.0);
}

TEST_CASE("normalized edit distance is symmetric") {
  using V = std::vector<std::string>;
  const std::vector<V> names = {
      V{"JUAN"}, V{"JUAN", "CARLOS"}, V{"CARLOS", "JUAN", "MARIA"},
      V{"A", "B", "C", "D"}, V{"D", "A", "B", "C"}, V{"GARCIA"},
  };
  for (const auto& a : names)
    for (const auto& b : names)
      CHECK(normalized_edit_distance(a, b) == doctest::Approx(normalized_edit_distance(b, a)));
}

TEST_CASE("discretize matches the default cut points") {
  const auto name = name_spec();
  CHECK(discretize(0.0, name) == 0);
  CHECK(discretize(0.2, name) == 1);
  CHECK(discretize(0.25, name) == 1);
  CHECK(discretize(0.3, name) == 2);
  CHECK(discretize(0.5, name) == 2);
  CHECK(discretize(0.51, name) == 3);
  CHECK(discretize(1.0, name) == 3);
  CHECK_THROWS_AS(discretize(1.2, name), ConstraintError);
  CHECK_THROWS_AS(discretize(-0.1, name), ConstraintError);

  const auto year = year_spec();
  CHECK(discretize(0, year) == 0);
  CHECK(discretize(1, year) == 1);
  CHECK(discretize(2, year) == 2);
  CHECK(discretize(3, year) == 2);
  CHECK(discretize(4, year) == 3);
  CHECK(discretize(40, year) == 3);

  const auto day = day_spec();
  CHECK(discretize(5, day) == 2);
  CHECK(discretize(1, day) == 1);
  CHECK(discretize(2, day) == 1);
  CHECK(discretize(8, day) == 3);

  const auto muni = binary_spec();
  CHECK(discretize(0.0, muni) == 0);
  CHECK(discretize(1.0, muni) == 1);
  CHECK_THROWS_AS(discretize(0.5, muni), ConstraintError);
}

TEST_CASE("absolute-difference levels are monotone") {
  const auto year = year_spec();
  int prev = 0;
  for (int d = 0; d <= 25; ++d) {
    const int level = discretize(d, year);
    CHECK(level >= prev);
    prev = level;
  }
}

namespace {

const char* kSchemaText =
    "[field]\nname = given\nkind = name-string\n"
    "[field]\nname = year\nkind = date-year\n"
    "[field]\nname = muni\nkind = categorical\n";

const char* kCompareText =
    "[compare]\n"
    "field = given\n"
    "measure = normalized-edit-distance\n"
    "levels = 0, 0.25, 0.5\n"
    "[compare]\n"
    "field = year\n"
    "measure = absolute-difference\n"
    "levels = 0, 1, 3\n"
    "[compare]\n"
    "field = muni\n"
    "measure = binary\n";

struct Fixture {
  testutil::TmpDir tmp;
  Schema schema;
  Fixture() { schema = read_schema(tmp.file("schema.ini", kSchemaText)); }

  RecordStore store(const std::string& a_csv, const std::string& b_csv) {
    return load_lists({tmp.file("la.csv", a_csv), tmp.file("lb.csv", b_csv)}, schema);
  }
  ComparisonConfig config(const std::string& text) {
    return read_compare_config(tmp.file("cmp.ini", text), schema);
  }
};

}  // namespace

TEST_CASE("read_compare_config parses and validates") {
  Fixture fx;
  ComparisonConfig cfg = fx.config(kCompareText);
  REQUIRE(cfg.fields.size() == 3);
  CHECK(cfg.fields[0].measure == MeasureKind::NormalizedEdit);
  CHECK(cfg.fields[0].num_levels() == 3);
  CHECK(cfg.fields[2].num_levels() == 1);
  CHECK(cfg.blocking_index == -1);

  CHECK_THROWS_AS(fx.config("[compare]\nfield = nope\nmeasure = binary\n"), ParseError);
  CHECK_THROWS_AS(fx.config("[compare]\nfield = year\n"
                            "measure = normalized-edit-distance\nlevels = 0, 0.25\n"),
                  ParseError);
  CHECK_THROWS_AS(fx.config("[compare]\nfield = given\n"
                            "measure = normalized-edit-distance\nlevels = 0.25, 0.25\n"),
                  ParseError);
  CHECK_THROWS_AS(fx.config("[compare]\nfield = muni\nmeasure = binary\nlevels = 0,1\n"),
                  ParseError);
  CHECK_THROWS_AS(fx.config(std::string(kCompareText) + "[fix]\nfield = height\nmin_level = 3\n"),
                  ParseError);
  CHECK_THROWS_AS(fx.config(std::string(kCompareText) + "[fix]\nfield = given\nmin_level = 9\n"),
                  ParseError);

  ComparisonConfig with_rules =
      fx.config(std::string(kCompareText) + "[fix]\nfield = given\nmin_level = 3\n"
                "[blocking]\nfield = year\n");
  CHECK(with_rules.fix_rules.size() == 1);
  CHECK(with_rules.fix_rules[0].spec_index == 0);
  CHECK(with_rules.blocking_index == 1);
}

TEST_CASE("two records make one pair") {
  Fixture fx;
  RecordStore store = fx.store("given,year,muni\nJuan,1990,X\n", "given,year,muni\nJuana,1990,X\n");
  ComparisonSet set = build_comparisons(store, fx.config(kCompareText));
  REQUIRE(set.pairs.size() == 1);
  CHECK(set.pairs[0].i == 0);
  CHECK(set.pairs[0].j == 1);
  // JUAN vs JUANA: distance 1, longer length 5
  CHECK(set.pairs[0].levels[0] == discretize(1.0 / 5.0, fx.config(kCompareText).fields[0]));
  CHECK(set.pairs[0].levels[1] == 0);
  CHECK(set.pairs[0].levels[2] == 0);
}

TEST_CASE("missing fields propagate and never trigger fix rules") {
  Fixture fx;
  RecordStore store = fx.store("given,year,muni\n,1990,X\nZZZZ,1990,X\n",
                               "given,year,muni\nAAAA,1990,Y\n");
  ComparisonConfig cfg =
      fx.config(std::string(kCompareText) + "[fix]\nfield = given\nmin_level = 3\n");
  ComparisonSet set = build_comparisons(store, cfg);
  REQUIRE(set.pairs.size() == 3);
  CHECK(set.pairs[0].levels[0] == kLevelMissing);  // (0,1): given missing on 0

  CandidateSets cs = filter_candidates(set, cfg, {2, 1});
  // (0,1) and (0,2) have missing given -> stay in C; (1,2) ZZZZ vs AAAA level 3 -> fixed
  CHECK(cs.total_pairs == 3);
  REQUIRE(cs.candidate_count() == 2);
  CHECK(cs.candidates[0].i == 0);
  CHECK(cs.candidates[1].j == 2);
  CHECK(cs.fixed_tallies[0][3] == 1);  // the fixed pair's given level
  CHECK(cs.fixed_tallies[1][0] == 1);  // its year level
  CHECK(cs.fixed_tallies[2][1] == 1);  // its muni level
}

TEST_CASE("blocking matches a brute-force count on 20 records") {
  Fixture fx;
  // years chosen to create uneven groups plus two records with missing year
  std::string a = "given,year,muni\n", b = "given,year,muni\n";
  std::vector<int> years = {1990, 1991, 1990, 1992, 1991, 1990, 1993, 1991, 1990, 1992};
  for (int i = 0; i < 10; ++i)
    a += "A" + std::to_string(i) + "," + std::to_string(years[i]) + ",X\n";
  for (int i = 0; i < 8; ++i)
    b += "B" + std::to_string(i) + "," + std::to_string(years[9 - i]) + ",Y\n";
  b += "B8,,Y\nB9,,Y\n";
  RecordStore store = fx.store(a, b);
  REQUIRE(store.record_count() == 20);

  ComparisonConfig cfg = fx.config(std::string(kCompareText) + "[blocking]\nfield = year\n");
  ComparisonSet set = build_comparisons(store, cfg);

  // oracle: group records by year, count within-group pairs
  std::map<int, int> group_sizes;
  for (const auto& rec : store.records)
    if (rec.values[1]) group_sizes[rec.values[1]->number]++;
  std::size_t expect = 0;
  for (auto [year, g] : group_sizes) expect += static_cast<std::size_t>(g) * (g - 1) / 2;
  CHECK(set.pairs.size() == expect);
  CHECK(expect > 0);

  // all pairs agree on year, none involve the missing-year records, (i,j) sorted
  for (std::size_t k = 0; k < set.pairs.size(); ++k) {
    const auto& p = set.pairs[k];
    CHECK(p.levels[1] == 0);
    CHECK(store.records[p.i].values[1]->number == store.records[p.j].values[1]->number);
    if (k) CHECK(std::make_pair(set.pairs[k - 1].i, set.pairs[k - 1].j) <
                 std::make_pair(p.i, p.j));
  }

  // no blocking: all 190 pairs
  CHECK(build_comparisons(store, fx.config(kCompareText)).pairs.size() == 190);
}

TEST_CASE("components agree with a BFS oracle") {
  Fixture fx;
  std::string a = "given,year,muni\n", b = "given,year,muni\n";
  const std::vector<std::string> names = {"JUAN",  "JUAN",  "PEDRO", "PEDRO", "MARIA",
                                          "MARTA", "XAVI",  "QQQQ",  "WWWW",  "EEEE"};
  for (int i = 0; i < 5; ++i) a += names[i] + ",1990,X\n";
  for (int i = 5; i < 10; ++i) b += names[i] + ",1990,X\n";
  RecordStore store = fx.store(a, b);

  ComparisonConfig cfg =
      fx.config(std::string(kCompareText) + "[fix]\nfield = given\nmin_level = 3\n");
  CandidateSets cs = build_candidates(store, cfg);

  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (const auto& p : cs.candidates) edges.emplace_back(p.i, p.j);
  CHECK(cs.components == oracles::bfs_components(edges));

  // every record in a component is touched by some candidate pair
  std::set<std::uint32_t> touched;
  for (const auto& p : cs.candidates) {
    touched.insert(p.i);
    touched.insert(p.j);
  }
  std::set<std::uint32_t> in_comps;
  for (const auto& comp : cs.components)
    for (auto rec : comp) CHECK(in_comps.insert(rec).second);  // disjoint cover
  CHECK(touched == in_comps);
}

TEST_CASE("no rules means C equals P") {
  Fixture fx;
  RecordStore store = fx.store("given,year,muni\nJuan,1990,X\nAna,1991,Y\n",
                               "given,year,muni\nLuis,1992,Z\n");
  ComparisonConfig cfg = fx.config(kCompareText);
  CandidateSets cs = build_candidates(store, cfg);
  CHECK(cs.total_pairs == 3);
  CHECK(cs.candidate_count() == 3);
  for (const auto& per_field : cs.fixed_tallies)
    for (long c : per_field) CHECK(c == 0);
}

TEST_CASE("streaming builder matches filter of the materialized set") {
  Fixture fx;
  Rng rng(123);
  std::string a = "given,year,muni\n", b = "given,year,muni\n";
  const char* pool[] = {"GARCIA", "GARZIA", "LOPEZ", "LOPES", "TORRES", ""};
  for (int i = 0; i < 12; ++i) {
    std::string row = std::string(pool[rng.raw() % 6]) + "," +
                      (rng.bernoulli(0.2) ? "" : std::to_string(1990 + int(rng.raw() % 4))) +
                      "," + (rng.bernoulli(0.5) ? "X" : "Y") + "\n";
    (i < 6 ? a : b) += row;
  }
  RecordStore store = fx.store(a, b);
  ComparisonConfig cfg =
      fx.config(std::string(kCompareText) + "[fix]\nfield = given\nmin_level = 3\n");

  CandidateSets streamed = build_candidates(store, cfg);
  CandidateSets filtered =
      filter_candidates(build_comparisons(store, cfg), cfg, {6, 6});

  REQUIRE(streamed.candidate_count() == filtered.candidate_count());
  for (std::size_t k = 0; k < streamed.candidates.size(); ++k) {
    CHECK(streamed.candidates[k].i == filtered.candidates[k].i);
    CHECK(streamed.candidates[k].j == filtered.candidates[k].j);
    CHECK(streamed.candidates[k].levels == filtered.candidates[k].levels);
  }
  CHECK(streamed.fixed_tallies == filtered.fixed_tallies);
  CHECK(streamed.components == filtered.components);
  CHECK(streamed.total_pairs == filtered.total_pairs);
  CHECK(streamed.list_sizes == filtered.list_sizes);
}

TEST_CASE("candidate sets round-trip through a directory") {
  Fixture fx;
  RecordStore store = fx.store("given,year,muni\nJuan,1990,X\nJuana,,Y\nPedro,1990,X\n",
                               "given,year,muni\nJoan,1991,X\nZZZZZZ,1993,Y\n");
  ComparisonConfig cfg =
      fx.config(std::string(kCompareText) + "[fix]\nfield = given\nmin_level = 3\n");
  CandidateSets cs = build_candidates(store, cfg);

  const std::string dir = fx.tmp.sub("cand");
  write_candidates(cs, dir);
  CandidateSets back = read_candidates(dir);

  CHECK(back.record_count == cs.record_count);
  CHECK(back.total_pairs == cs.total_pairs);
  CHECK(back.list_sizes == cs.list_sizes);
  REQUIRE(back.fields.size() == cs.fields.size());
  for (std::size_t f = 0; f < cs.fields.size(); ++f) {
    CHECK(back.fields[f].field_name == cs.fields[f].field_name);
    CHECK(back.fields[f].num_levels() == cs.fields[f].num_levels());
  }
  REQUIRE(back.candidate_count() == cs.candidate_count());
  for (std::size_t k = 0; k < cs.candidates.size(); ++k) {
    CHECK(back.candidates[k].i == cs.candidates[k].i);
    CHECK(back.candidates[k].j == cs.candidates[k].j);
    CHECK(back.candidates[k].levels == cs.candidates[k].levels);
  }
  CHECK(back.fixed_tallies == cs.fixed_tallies);
  CHECK(back.components == cs.components);
}

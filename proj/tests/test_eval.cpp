#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "dop/errors.hpp"
#include "dop/eval.hpp"
#include "dop/tree.hpp"
#include "helpers.hpp"

using namespace dop;
using namespace dop::testing;

TEST_CASE("binarization right-folds wide nodes under auxiliary labels") {
  CHECK(serialize_tree(binarize(parse_bracketed("(X a b c)"))) ==
        "(X a (X| b c))");
  CHECK(serialize_tree(binarize(parse_bracketed("(X a b c d)"))) ==
        "(X a (X| b (X| c d)))");
  CHECK(serialize_tree(binarize(parse_bracketed("(S (A a) (B b) (C c))"))) ==
        "(S (A a) (S| (B b) (C c)))");
  // binary and unary nodes pass through
  const Tree narrow = parse_bracketed("(S (NP John) (VP (V likes) (NP Mary)))");
  CHECK(binarize(narrow) == narrow);
  // idempotent
  const Tree wide = parse_bracketed("(S (A a) (B b) (C c) (D d))");
  CHECK(binarize(binarize(wide)) == binarize(wide));
}

TEST_CASE("bracket sets use leaf positions and skip width-one spans") {
  CHECK(brackets_of(parse_bracketed("(S (NP John) (VP (V likes) (NP Mary)))")) ==
        std::set<Span>{{0, 3}, {1, 3}});
  CHECK(brackets_of(parse_bracketed("(NP Mary)")) == std::set<Span>{});
  CHECK(brackets_of(binarize(parse_bracketed("(S (A a) (B b) (C c))"))) ==
        std::set<Span>{{0, 3}, {1, 3}});
}

TEST_CASE("crossing is strict overlap") {
  CHECK(crosses({0, 2}, {1, 3}));
  CHECK(crosses({1, 3}, {0, 2}));
  CHECK_FALSE(crosses({0, 2}, {0, 2}));
  CHECK_FALSE(crosses({0, 3}, {1, 3}));   // nested, sharing an endpoint
  CHECK_FALSE(crosses({1, 2}, {0, 3}));   // properly nested
  CHECK_FALSE(crosses({0, 1}, {1, 2}));   // adjacent
}

TEST_CASE("identical candidates score perfectly") {
  const std::vector<Tree> golds = {
      parse_bracketed("(S (NP John) (VP (V likes) (NP Mary)))"),
      parse_bracketed("(S (A a) (B b) (C c))"),
  };
  std::vector<std::optional<Tree>> candidates(golds.begin(), golds.end());
  const AccuracyReport report = score(candidates, golds);
  CHECK(report.parse_accuracy == 100.0);
  CHECK(report.sentence_accuracy == 100.0);
  CHECK(report.bracketing_accuracy == 100.0);
  CHECK(report.coverage == 100.0);
  CHECK(report.n_test == 2);
  REQUIRE(report.rows.size() == 2);
  CHECK(report.rows[0].parsed);
  CHECK(report.rows[0].exact_match);
  CHECK(report.rows[0].zero_crossings);
}

TEST_CASE("the worked crossing example scores fifty percent") {
  // candidate brackets {(0,2),(0,3)}; gold {(1,3),(0,3)}: (0,2) crosses,
  // the root span does not.
  const std::vector<Tree> golds = {parse_bracketed("(S a (Y b c))")};
  const std::vector<std::optional<Tree>> candidates = {
      parse_bracketed("(S (X a b) c)")};
  const AccuracyReport report = score(candidates, golds);
  CHECK(report.parse_accuracy == 0.0);
  CHECK(report.sentence_accuracy == 0.0);
  CHECK(report.bracketing_accuracy == 50.0);
  CHECK(report.coverage == 100.0);
  CHECK(report.rows[0].clean_brackets == 1);
  CHECK(report.rows[0].candidate_brackets == 2);
}

TEST_CASE("bracketing compares spans, not labels") {
  const std::vector<Tree> golds = {parse_bracketed("(S (Y a b) c)")};
  const std::vector<std::optional<Tree>> candidates = {
      parse_bracketed("(S (X a b) c)")};
  const AccuracyReport report = score(candidates, golds);
  CHECK(report.parse_accuracy == 0.0);      // trees differ
  CHECK(report.sentence_accuracy == 100.0);  // no crossings
  CHECK(report.bracketing_accuracy == 100.0);
}

TEST_CASE("parse accuracy compares raw trees, not binarized ones") {
  // same binarized shape, different raw arity
  const std::vector<Tree> golds = {parse_bracketed("(S (A a) (S| (B b) (C c)))")};
  const std::vector<std::optional<Tree>> candidates = {
      parse_bracketed("(S (A a) (B b) (C c))")};
  const AccuracyReport report = score(candidates, golds);
  CHECK(report.parse_accuracy == 0.0);
  CHECK(report.bracketing_accuracy == 100.0);
}

TEST_CASE("absent candidates fail all three metrics but stay in the pool") {
  const std::vector<Tree> golds = {
      parse_bracketed("(S (NP John) (VP (V likes) (NP Mary)))"),
      parse_bracketed("(S (NP John) (VP (V likes) (NP Mary)))"),
  };
  const std::vector<std::optional<Tree>> half = {golds[0], std::nullopt};
  const AccuracyReport report = score(half, golds);
  CHECK(report.parse_accuracy == 50.0);
  CHECK(report.sentence_accuracy == 50.0);
  CHECK(report.coverage == 50.0);
  // candidate contributes its 2 clean brackets; the failure contributes the
  // 2 gold brackets it failed to produce
  CHECK(report.bracketing_accuracy == 50.0);
  CHECK_FALSE(report.rows[1].parsed);

  const std::vector<std::optional<Tree>> none = {std::nullopt, std::nullopt};
  const AccuracyReport empty = score(none, golds);
  CHECK(empty.parse_accuracy == 0.0);
  CHECK(empty.sentence_accuracy == 0.0);
  CHECK(empty.bracketing_accuracy == 0.0);
  CHECK(empty.coverage == 0.0);

  CHECK_THROWS_AS(score({}, golds), EvalError);
  const AccuracyReport blank = score({}, {});
  CHECK(blank.n_test == 0);
  CHECK(blank.parse_accuracy == 0.0);
}

TEST_CASE("splits are deterministic, complete, and sized by the fraction") {
  Corpus corpus;
  for (int i = 0; i < 10; ++i)
    corpus.trees.push_back(
        parse_bracketed("(S (A a) (B b" + std::to_string(i) + "))"));

  const auto [train, test] = split_corpus(corpus, SplitSpec{0.9, 5});
  CHECK(train.size() == 9);
  CHECK(test.size() == 1);

  const auto [train2, test2] = split_corpus(corpus, SplitSpec{0.9, 5});
  CHECK(train.trees == train2.trees);
  CHECK(test.trees == test2.trees);

  std::multiset<std::string> seen;
  for (const Tree& tree : train.trees) seen.insert(serialize_tree(tree));
  for (const Tree& tree : test.trees) seen.insert(serialize_tree(tree));
  std::multiset<std::string> expect;
  for (const Tree& tree : corpus.trees) expect.insert(serialize_tree(tree));
  CHECK(seen == expect);

  const auto [half_train, half_test] = split_corpus(corpus, SplitSpec{0.5, 1});
  CHECK(half_train.size() == 5);
  CHECK(half_test.size() == 5);

  // the shuffle actually moves things: some seed puts a different tree in test
  bool moved = false;
  for (std::uint64_t seed = 0; seed < 20 && !moved; ++seed) {
    const auto [t, held] = split_corpus(corpus, SplitSpec{0.9, seed});
    moved = held.trees != test.trees;
  }
  CHECK(moved);

  Corpus tiny;
  tiny.trees.push_back(corpus.trees[0]);
  CHECK_THROWS_AS(split_corpus(tiny, SplitSpec{0.9, 1}), EvalError);
  CHECK_THROWS_AS(split_corpus(corpus, SplitSpec{0.0, 1}), EvalError);
  CHECK_THROWS_AS(split_corpus(corpus, SplitSpec{1.0, 1}), EvalError);
}

TEST_CASE("a memorizable corpus evaluates perfectly") {
  Corpus corpus;
  for (int i = 0; i < 12; ++i) {
    corpus.trees.push_back(
        parse_bracketed("(S (NP John) (VP (V likes) (NP Mary)))"));
    corpus.trees.push_back(
        parse_bracketed("(S (NP Peter) (VP (V hates) (NP Susan)))"));
  }
  const DisambigMode mode{.kind = DisambigMode::Kind::Mpd};
  const auto reports =
      run_experiment(corpus, SplitSpec{0.9, 3}, {FragmentFilter{}}, mode, 0, 1);
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].parse_accuracy == 100.0);
  CHECK(reports[0].sentence_accuracy == 100.0);
  CHECK(reports[0].bracketing_accuracy == 100.0);
  CHECK(reports[0].coverage == 100.0);
  CHECK(reports[0].n_test == 2);
  CHECK(reports[0].mode == "mpd");
  CHECK(reports[0].filter_id == "f0");
}

TEST_CASE("experiments are deterministic and thread-count invariant") {
  std::mt19937_64 rng(8);
  const Corpus corpus = random_corpus(rng, 40);
  const DisambigMode mc{.kind = DisambigMode::Kind::MppMc,
                        .sigma = 0.1,
                        .samples = std::nullopt};
  const std::vector<FragmentFilter> grid = {
      FragmentFilter{.max_depth = 1},
      FragmentFilter{.max_depth = 2},
      FragmentFilter{},
  };
  const auto one = run_experiment(corpus, SplitSpec{0.8, 9}, grid, mc, 77, 1);
  const auto two = run_experiment(corpus, SplitSpec{0.8, 9}, grid, mc, 77, 4);
  CHECK(reports_to_tsv(one) == reports_to_tsv(two));
  REQUIRE(one.size() == 3);
  CHECK(one[0].samples == 25);
  CHECK(one[0].seed == 77);

  const auto again = run_experiment(corpus, SplitSpec{0.8, 9}, grid, mc, 77, 1);
  CHECK(reports_to_tsv(again) == reports_to_tsv(one));
}

TEST_CASE("dropping hapax fragments is a comparable run") {
  std::mt19937_64 rng(13);
  const Corpus corpus = random_corpus(rng, 30);
  const DisambigMode mode{.kind = DisambigMode::Kind::Mpd};
  const auto reports = run_experiment(
      corpus, SplitSpec{0.8, 2},
      {FragmentFilter{}, FragmentFilter{.min_count = 2, .hapax_min_depth = 1}},
      mode, 0, 1);
  REQUIRE(reports.size() == 2);
  for (const auto& report : reports) {
    CHECK(report.parse_accuracy >= 0.0);
    CHECK(report.parse_accuracy <= 100.0);
    CHECK(report.coverage <= 100.0);
    CHECK(report.n_test == 6);
  }
}

TEST_CASE("sampling mode needs a sample budget") {
  Corpus corpus;
  for (int i = 0; i < 4; ++i)
    corpus.trees.push_back(parse_bracketed("(S (A a) (B b))"));
  const DisambigMode broken{.kind = DisambigMode::Kind::MppMc};
  CHECK_THROWS_AS(run_experiment(corpus, SplitSpec{0.5, 1}, {FragmentFilter{}},
                                 broken, 1, 1),
                  Error);
}

TEST_CASE("report tables have the fixed column set") {
  AccuracyReport row;
  row.filter_id = "f0";
  row.filter = FragmentFilter{.max_depth = 2, .max_sites = std::nullopt,
                              .roots = std::nullopt, .min_count = 1};
  row.mode = "mpd";
  row.parse_accuracy = 64.0;
  row.sentence_accuracy = 75.0;
  row.bracketing_accuracy = 94.8;
  row.coverage = 98.0;
  row.n_test = 100;
  row.seed = 42;
  const std::string tsv = reports_to_tsv({row});
  CHECK(tsv ==
        "#filter-id\tmax-depth\tmax-sites\tmin-count\tmode\tparse-acc"
        "\tsentence-acc\tbracketing-acc\tcoverage\tn-test\tseed\n"
        "f0\t2\tunbounded\t1\tmpd\t64.00\t75.00\t94.80\t98.00\t100\t42\n");
}

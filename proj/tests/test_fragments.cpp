#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "dop/errors.hpp"
#include "dop/fragments.hpp"
#include "dop/tree.hpp"
#include "helpers.hpp"

using namespace dop;
using namespace dop::testing;

namespace {

// Independent oracle: a fragment rooted at v is determined by the set of
// internal nodes it retains, which is any subset containing v whose members'
// parents (other than v's) are also members. Enumerate all subsets of the
// internal-node list and keep the connected ones.
void collect_internal(const Tree& node, std::vector<const Tree*>& out) {
  if (node.is_leaf()) return;
  out.push_back(&node);
  for (const Tree& child : node.children) collect_internal(child, out);
}

Tree project_fragment(const Tree& node, const std::set<const Tree*>& kept) {
  std::vector<Tree> children;
  for (const Tree& child : node.children) {
    if (child.is_leaf()) {
      children.push_back(child);  // terminal or site, kept verbatim
    } else if (kept.count(&child)) {
      children.push_back(project_fragment(child, kept));
    } else {
      children.push_back(make_open_site(child.label.text));
    }
  }
  return make_tree(node.label, std::move(children));
}

bool upward_closed(const Tree& root, const std::set<const Tree*>& kept) {
  // every kept node other than the root must have a kept parent
  std::vector<const Tree*> stack{&root};
  std::set<const Tree*> reachable{&root};
  while (!stack.empty()) {
    const Tree* node = stack.back();
    stack.pop_back();
    for (const Tree& child : node->children)
      if (!child.is_leaf() && kept.count(&child)) {
        reachable.insert(&child);
        stack.push_back(&child);
      }
  }
  return reachable.size() == kept.size();
}

std::map<std::string, std::int64_t> oracle_fragments(const Tree& tree) {
  std::map<std::string, std::int64_t> out;
  std::vector<const Tree*> roots;
  collect_internal(tree, roots);
  for (const Tree* root : roots) {
    std::vector<const Tree*> below;
    collect_internal(*root, below);
    below.erase(below.begin());  // drop the root itself
    REQUIRE(below.size() < 20);
    for (std::uint64_t mask = 0; mask < (1ull << below.size()); ++mask) {
      std::set<const Tree*> kept{root};
      for (std::size_t i = 0; i < below.size(); ++i)
        if (mask & (1ull << i)) kept.insert(below[i]);
      if (!upward_closed(*root, kept)) continue;
      out[serialize_tree(project_fragment(*root, kept))] += 1;
    }
  }
  return out;
}

std::map<std::string, std::int64_t> bag_counts(const FragmentBag& bag) {
  std::map<std::string, std::int64_t> out;
  for (const auto& [key, entry] : bag.fragments) out[key] = entry.count;
  return out;
}

// Fragments rooted at a node: product over internal children of
// (1 + fragments rooted there).
std::int64_t count_law(const Tree& node) {
  std::int64_t product = 1;
  for (const Tree& child : node.children)
    if (!child.is_leaf()) product *= 1 + count_law(child);
  return product;
}

std::int64_t count_law_total(const Tree& tree) {
  std::int64_t total = 0;
  std::vector<const Tree*> internal;
  collect_internal(tree, internal);
  for (const Tree* node : internal) total += count_law(*node);
  return total;
}

}  // namespace

TEST_CASE("toy corpus root totals match the worked arithmetic") {
  const FragmentBag bag = corpus_fragments(toy_corpus(), FragmentFilter{});
  CHECK(bag.root_total("S") == 20);
  CHECK(bag.root_total("NP") == 4);
  CHECK(bag.root_total("VP") == 8);
  CHECK(bag.root_total("V") == 2);
  CHECK(bag.total_count() == 34);
  CHECK(bag.distinct() == 31);  // three unlexicalized fragments are shared
  CHECK(bag.count_of(parse_bracketed("(S (NP) (VP))")) == 2);
  CHECK(bag.count_of(parse_bracketed("(VP (V) (NP))")) == 2);
  CHECK(bag.count_of(parse_bracketed("(S (NP John) (VP (V likes) (NP Mary)))")) == 1);
  CHECK(bag.count_of(parse_bracketed("(S (NP Ringo) (VP))")) == 0);
}

TEST_CASE("every extracted fragment is a well-formed connected piece") {
  const Tree tree = parse_bracketed("(S (NP John) (VP (V likes) (NP Mary)))");
  const FragmentBag bag = extract_subtrees(tree);
  CHECK(bag.total_count() == 17);
  for (const auto& [key, entry] : bag.fragments) {
    CHECK(node_count(entry.tree) > 1);
    CHECK(serialize_tree(entry.tree) == key);
  }
}

TEST_CASE("extraction agrees with the subset-enumeration oracle") {
  std::mt19937_64 rng(20260818);
  std::vector<Tree> cases = {
      parse_bracketed("(S (NP John) (VP (V likes) (NP Mary)))"),
      parse_bracketed("(S (A a) (A a))"),  // identical siblings merge counts
      parse_bracketed("(A (A (A x)))"),
      parse_bracketed("(S x)"),
  };
  for (int i = 0; i < 40; ++i) cases.push_back(random_corpus_node(rng, "S", 2));
  for (const Tree& tree : cases) {
    const FragmentBag bag = extract_subtrees(tree);
    CHECK(bag_counts(bag) == oracle_fragments(tree));
    CHECK(bag.total_count() == count_law_total(tree));
  }
}

TEST_CASE("depth budget during extraction equals filtering afterwards") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 25; ++i) {
    const Tree tree = random_corpus_node(rng, "S", 3);
    const FragmentBag full = extract_subtrees(tree);
    for (int depth = 1; depth <= 4; ++depth) {
      const FragmentBag bounded = extract_subtrees(tree, depth);
      std::map<std::string, std::int64_t> expect;
      for (const auto& [key, entry] : full.fragments)
        if (static_cast<int>(tree_depth(entry.tree)) <= depth)
          expect[key] = entry.count;
      CHECK(bag_counts(bounded) == expect);
    }
  }
}

TEST_CASE("depth-1 extraction is the classic rule set") {
  const FragmentBag bag = corpus_fragments(
      toy_corpus(), FragmentFilter{.max_depth = 1});
  // one fragment per internal node shape
  CHECK(bag.count_of(parse_bracketed("(S (NP) (VP))")) == 2);
  CHECK(bag.count_of(parse_bracketed("(VP (V) (NP))")) == 2);
  CHECK(bag.count_of(parse_bracketed("(NP John)")) == 1);
  CHECK(bag.count_of(parse_bracketed("(V likes)")) == 1);
  CHECK(bag.distinct() == 8);  // 2 shared shapes + 4 NPs + 2 Vs
  for (const auto& [key, entry] : bag.fragments)
    CHECK(tree_depth(entry.tree) == 1);
}

TEST_CASE("site and root filters") {
  const FragmentBag sites0 = corpus_fragments(
      toy_corpus(), FragmentFilter{.max_sites = 0});
  for (const auto& [key, entry] : sites0.fragments)
    CHECK(open_site_count(entry.tree) == 0);
  CHECK(sites0.count_of(parse_bracketed("(S (NP John) (VP (V likes) (NP Mary)))")) == 1);
  CHECK(sites0.count_of(parse_bracketed("(S (NP) (VP))")) == 0);

  const FragmentBag only_np = corpus_fragments(
      toy_corpus(), FragmentFilter{.roots = std::set<std::string>{"NP", "S"}},
      "S");
  for (const auto& [key, entry] : only_np.fragments) {
    const std::string root = entry.tree.label.text;
    CHECK((root == "NP" || root == "S"));
  }
  CHECK(only_np.root_total("VP") == 0);
}

TEST_CASE("root totals are recomputed after filtering") {
  const FragmentBag bag = corpus_fragments(
      toy_corpus(), FragmentFilter{.max_depth = 1});
  CHECK(bag.root_total("S") == 2);
  CHECK(bag.root_total("NP") == 4);
  CHECK(bag.root_total("VP") == 2);
  CHECK(bag.root_total("V") == 2);
}

TEST_CASE("hapax filtering spares shallow rare fragments when asked") {
  // min_count 2 drops everything seen once
  const FragmentBag strict = corpus_fragments(
      toy_corpus(), FragmentFilter{.min_count = 2});
  CHECK(strict.distinct() == 3);
  CHECK(strict.count_of(parse_bracketed("(S (NP) (VP))")) == 2);
  CHECK(strict.count_of(parse_bracketed("(S (NP) (VP (V) (NP)))")) == 2);
  CHECK(strict.count_of(parse_bracketed("(NP John)")) == 0);
  CHECK(strict.root_total("S") == 4);

  // with the depth carve-out, rare-but-shallow fragments survive
  const FragmentBag spared = corpus_fragments(
      toy_corpus(), FragmentFilter{.min_count = 2, .hapax_min_depth = 1});
  CHECK(spared.count_of(parse_bracketed("(NP John)")) == 1);
  CHECK(spared.count_of(parse_bracketed("(V likes)")) == 1);
  CHECK(spared.count_of(parse_bracketed("(S (NP John) (VP))")) == 0);
  const FragmentBag all_spared = corpus_fragments(
      toy_corpus(), FragmentFilter{.min_count = 2, .hapax_min_depth = 99});
  CHECK(bag_counts(all_spared) ==
        bag_counts(corpus_fragments(toy_corpus(), FragmentFilter{})));
}

TEST_CASE("filtering everything away is an error") {
  CHECK_THROWS_AS(corpus_fragments(
                      toy_corpus(),
                      FragmentFilter{.roots = std::set<std::string>{"VP"}}),
                  GrammarError);
  try {
    corpus_fragments(toy_corpus(),
                     FragmentFilter{.roots = std::set<std::string>{"VP"}});
  } catch (const GrammarError& e) {
    CHECK(e.kind() == GrammarError::Kind::EmptyBagAfterFiltering);
  }
  CHECK_THROWS_AS(corpus_fragments(Corpus{}, FragmentFilter{}), GrammarError);
  // an explicit start symbol overrides the first-tree default
  const FragmentBag vp_bag = corpus_fragments(
      toy_corpus(), FragmentFilter{.roots = std::set<std::string>{"VP"}},
      "VP");
  CHECK(vp_bag.root_total("VP") == 8);
}

TEST_CASE("bag TSV round-trips counts exactly") {
  const FragmentBag bag = corpus_fragments(toy_corpus(), FragmentFilter{});
  const FragmentBag back = bag_from_tsv(bag_to_tsv(bag));
  CHECK(bag_counts(back) == bag_counts(bag));
  CHECK(back.root_totals == bag.root_totals);
}

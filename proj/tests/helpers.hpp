// Shared test fixtures: the two-sentence toy corpus, random grammar and
// corpus generators, and multiset comparison of weighted derivation lists.
#ifndef DOP_TEST_HELPERS_HPP
#define DOP_TEST_HELPERS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "dop/chart.hpp"
#include "dop/fragments.hpp"
#include "dop/rational.hpp"
#include "dop/stsg.hpp"
#include "dop/tree.hpp"

namespace dop::testing {

inline Corpus toy_corpus() {
  return load_corpus({"(S (NP John) (VP (V likes) (NP Mary)))",
                      "(S (NP Peter) (VP (V hates) (NP Susan)))"});
}

inline Stsg toy_grammar() {
  return project_stsg(corpus_fragments(toy_corpus(), FragmentFilter{}),
                      Label{"S", SymbolKind::Nonterminal});
}

// The constructed grammar where one tree of "a b" wins by derivation
// probability (0.4) while the other wins by parse probability (0.3 + 0.3).
inline Stsg split_vote_grammar() {
  FragmentBag bag;
  bag.add(parse_bracketed("(S (A a) (B b))"), 4);
  bag.add(parse_bracketed("(S (C) (D b))"), 3);
  bag.add(parse_bracketed("(S (C a) (D))"), 3);
  bag.add(parse_bracketed("(A a)"), 1);
  bag.add(parse_bracketed("(B b)"), 1);
  bag.add(parse_bracketed("(C a)"), 1);
  bag.add(parse_bracketed("(D b)"), 1);
  return project_stsg(bag, Label{"S", SymbolKind::Nonterminal});
}

// Four derivations, two trees, both trees derived twice.
inline Stsg four_two_grammar() {
  FragmentBag bag;
  bag.add(parse_bracketed("(S (A a b) (B c d))"), 1);
  bag.add(parse_bracketed("(S (A) (B c d))"), 1);
  bag.add(parse_bracketed("(A a b)"), 1);
  bag.add(parse_bracketed("(S (A a) (B b c d))"), 1);
  bag.add(parse_bracketed("(S (A a) (B))"), 1);
  bag.add(parse_bracketed("(B b c d)"), 1);
  return project_stsg(bag, Label{"S", SymbolKind::Nonterminal});
}

inline std::string derivation_key(const Derivation& steps) {
  std::string key;
  for (const Tree& step : steps) {
    key += serialize_tree(step);
    key += '\x1e';
  }
  return key;
}

struct WeightedMultiset {
  std::map<std::string, std::pair<int, Rational>> items;  // key -> (count, mass)

  static WeightedMultiset of(const std::vector<std::pair<Derivation, Rational>>& list) {
    WeightedMultiset set;
    for (const auto& [steps, prob] : list) {
      auto& slot = set.items[derivation_key(steps)];
      slot.first += 1;
      slot.second += prob;
    }
    return set;
  }

  bool operator==(const WeightedMultiset& other) const = default;

  Rational total() const {
    Rational sum = 0;
    for (const auto& [key, slot] : items) sum += slot.second;
    return sum;
  }
};

// --- random generators ------------------------------------------------

inline int pick(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

inline const std::vector<std::string>& gen_nonterminals() {
  static const std::vector<std::string> labels{"S", "A", "B", "C"};
  return labels;
}

inline const std::vector<std::string>& gen_terminals() {
  static const std::vector<std::string> words{"a", "b", "c", "d"};
  return words;
}

inline Tree random_elementary_node(std::mt19937_64& rng, const std::string& label,
                                   int depth) {
  std::vector<Tree> children;
  const int arity = pick(rng, 1, 3);
  for (int i = 0; i < arity; ++i) {
    const int roll = pick(rng, 0, 9);
    if (roll < 4 || depth == 0) {
      children.push_back(
          make_terminal(gen_terminals()[static_cast<std::size_t>(
              pick(rng, 0, static_cast<int>(gen_terminals().size()) - 1))]));
    } else if (roll < 8) {
      children.push_back(
          make_open_site(gen_nonterminals()[static_cast<std::size_t>(
              pick(rng, 0, static_cast<int>(gen_nonterminals().size()) - 1))]));
    } else {
      children.push_back(random_elementary_node(
          rng,
          gen_nonterminals()[static_cast<std::size_t>(
              pick(rng, 0, static_cast<int>(gen_nonterminals().size()) - 1))],
          depth - 1));
    }
  }
  return make_node(label, std::move(children));
}

// Never returns a tree with no terminals and at most one open site: those
// are the shapes that let a derivation loop without consuming input.
inline Tree random_elementary(std::mt19937_64& rng, const std::string& root) {
  for (;;) {
    Tree tree = random_elementary_node(rng, root, 2);
    const bool lexical = !terminal_yield(tree).empty();
    if (lexical || open_site_count(tree) >= 2) return tree;
  }
}

inline Stsg random_grammar(std::mt19937_64& rng) {
  FragmentBag bag;
  const int n_trees = pick(rng, 3, 8);
  for (int i = 0; i < n_trees; ++i) {
    const std::string root =
        i == 0 ? "S"
               : gen_nonterminals()[static_cast<std::size_t>(pick(
                     rng, 0, static_cast<int>(gen_nonterminals().size()) - 1))];
    bag.add(random_elementary(rng, root), pick(rng, 1, 5));
  }
  return project_stsg(bag, Label{"S", SymbolKind::Nonterminal});
}

inline std::vector<std::string> random_sentence(std::mt19937_64& rng,
                                                int max_len = 6) {
  std::vector<std::string> words;
  const int len = pick(rng, 1, max_len);
  for (int i = 0; i < len; ++i)
    words.push_back(gen_terminals()[static_cast<std::size_t>(
        pick(rng, 0, static_cast<int>(gen_terminals().size()) - 1))]);
  return words;
}

inline const Tree* leftmost_site(const Tree& tree) {
  if (tree.is_open_site()) return &tree;
  for (const Tree& child : tree.children)
    if (const Tree* site = leftmost_site(child)) return site;
  return nullptr;
}

// Yield of a random complete derivation, or nothing if the walk ran out of
// budget or hit a label with no elementary trees.
inline std::optional<std::vector<std::string>> random_yield(
    const Stsg& grammar, std::mt19937_64& rng, int max_steps = 8,
    int max_len = 6) {
  const auto& start_ids = grammar.rooted(grammar.start.text);
  if (start_ids.empty()) return std::nullopt;
  Tree current =
      grammar
          .at(start_ids[static_cast<std::size_t>(
              pick(rng, 0, static_cast<int>(start_ids.size()) - 1))])
          .tree;
  for (int step = 0; step < max_steps; ++step) {
    const Tree* site = leftmost_site(current);
    if (!site) {
      const std::vector<std::string> words = terminal_yield(current);
      if (static_cast<int>(words.size()) > max_len) return std::nullopt;
      return words;
    }
    const auto& ids = grammar.rooted(site->label.text);
    if (ids.empty()) return std::nullopt;
    current = compose(current,
                      grammar
                          .at(ids[static_cast<std::size_t>(
                              pick(rng, 0, static_cast<int>(ids.size()) - 1))])
                          .tree);
  }
  return std::nullopt;
}

// Random fully lexicalized corpus tree with no unary nonterminal chains,
// so every extracted fragment keeps the derivation forests acyclic.
inline Tree random_corpus_node(std::mt19937_64& rng, const std::string& label,
                               int depth) {
  if (depth == 0 || pick(rng, 0, 2) == 0) {
    return make_node(label,
                     {make_terminal(gen_terminals()[static_cast<std::size_t>(
                         pick(rng, 0, static_cast<int>(gen_terminals().size()) -
                                          1))])});
  }
  std::vector<Tree> children;
  const int arity = pick(rng, 2, 3);
  for (int i = 0; i < arity; ++i)
    children.push_back(random_corpus_node(
        rng,
        gen_nonterminals()[static_cast<std::size_t>(
            pick(rng, 0, static_cast<int>(gen_nonterminals().size()) - 1))],
        depth - 1));
  return make_node(label, std::move(children));
}

inline Corpus random_corpus(std::mt19937_64& rng, int n_trees) {
  Corpus corpus;
  for (int i = 0; i < n_trees; ++i)
    corpus.trees.push_back(random_corpus_node(rng, "S", pick(rng, 1, 3)));
  return corpus;
}

}  // namespace dop::testing

#endif  // DOP_TEST_HELPERS_HPP

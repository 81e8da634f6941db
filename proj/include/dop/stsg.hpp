#ifndef DOP_STSG_HPP
#define DOP_STSG_HPP

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dop/fragments.hpp"
#include "dop/rational.hpp"
#include "dop/tree.hpp"

namespace dop {

// Stochastic tree-substitution grammar: elementary trees with per-root
// normalized probabilities. Elementary trees are kept sorted by canonical
// serialization, so tree ids are stable across runs.
struct Stsg {
  struct Elementary {
    Tree tree;
    std::string key;     // canonical serialization, the tree's identity
    std::int64_t count;  // corpus occurrences behind prob
    Rational prob;       // exact relative frequency, in (0, 1]
    double weight;       // prob as double, for chart-scale arithmetic
    int sites;           // open substitution sites
  };

  Label start;
  std::vector<Elementary> trees;
  std::map<std::string, std::vector<int>> by_root;  // root label -> ids
  std::set<std::string> nonterminals;
  std::set<std::string> terminals;

  std::size_t size() const { return trees.size(); }
  const Elementary& at(int id) const { return trees[static_cast<std::size_t>(id)]; }
  // Id of an elementary tree, -1 if absent.
  int find(const Tree& tree) const;
  int find_key(const std::string& key) const;
  const std::vector<int>& rooted(const std::string& label) const;
  bool has_terminal(const std::string& word) const {
    return terminals.count(word) != 0;
  }
};

// Builds the grammar from a fragment bag: R = distinct fragments,
// P(t) = count(t) / root_total(root(t)). Throws
// GrammarError(NoStartFragments) if nothing is rooted at `start`.
Stsg project_stsg(const FragmentBag& bag, const Label& start);

// Checks the grammar axioms (per-root probability sums exactly 1, every
// probability in (0,1], start nonterminal present). Throws GrammarError.
void validate_stsg(const Stsg& g);

// A derivation is the ordered sequence of elementary trees combined by
// iterated leftmost composition.
using Derivation = std::vector<Tree>;

// Leftmost composition t ∘ u: copy of t with u substituted at t's leftmost
// nonterminal leaf. Throws ComposeError (NoOpenSite / LabelMismatch).
Tree compose(const Tree& t, const Tree& u);

// Left fold of compose over the steps; rethrows ComposeError with the
// failing step index attached.
Tree derive(const Derivation& steps);

// Product of the steps' probabilities. Every step must be an elementary
// tree of g, else GrammarError(StepNotInGrammar).
Rational derivation_probability(const Stsg& g, const Derivation& steps);

// All leftmost derivations of the sentence, with probabilities, found by
// backtracking search over the grammar. Test oracle: exponential in the
// worst case; throws CapExceeded past `cap` derivations (including grammars
// with unary site cycles, which admit infinitely many).
std::vector<std::pair<Derivation, Rational>> enumerate_derivations(
    const Stsg& g, const std::vector<std::string>& sentence,
    std::int64_t cap = 100000);

// Sum over all derivations producing exactly this tree, via decomposition
// into elementary trees at each node. Returns 0 if underivable.
Rational exact_parse_probability(const Stsg& g, const Tree& parse);

// TSV persistence: header "# start: <label>", then one line per elementary
// tree "serialized-tree<TAB>count<TAB>p/q", lexicographic by tree.
std::string grammar_to_tsv(const Stsg& g);
Stsg grammar_from_tsv(const std::string& text);
void save_grammar(const Stsg& g, const std::string& path);
Stsg load_grammar(const std::string& path);

}  // namespace dop

#endif  // DOP_STSG_HPP

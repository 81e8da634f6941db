#ifndef DOP_CHART_HPP
#define DOP_CHART_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "dop/rational.hpp"
#include "dop/stsg.hpp"
#include "dop/tree.hpp"

namespace dop {

// One way of building a forest entry: an elementary tree whose open sites
// are filled by the listed sub-entries, in leftmost order.
struct ForestEdge {
  int tree_id = -1;
  std::vector<int> children;  // entry ids, one per open site

  bool operator==(const ForestEdge& other) const = default;
};

// A recognized constituent: span [start, end) of the sentence derivable
// from `label`, with every distinct (elementary tree, sub-entries) way of
// deriving it kept as a separate edge.
struct ForestEntry {
  int start = 0;
  int end = 0;
  std::string label;
  std::vector<ForestEdge> edges;
};

// Packed chart of all leftmost derivations of one sentence. Derivations of
// identical trees stay distinct; only shared sub-spans are reused. `goal`
// is the id of the (0, n, start-symbol) entry, or -1 when the sentence has
// no parse.
struct DerivationForest {
  std::shared_ptr<const Stsg> grammar;
  std::vector<std::string> sentence;
  std::vector<ForestEntry> entries;
  int goal = -1;

  bool has_parse() const { return goal >= 0; }
  const ForestEntry& entry(int id) const {
    return entries[static_cast<std::size_t>(id)];
  }
};

// Chart-parses the sentence, treating each elementary tree as the rewrite
// rule root(t) -> yield(t) scanned left to right with dotted items.
// Throws UnknownTerminal for a word outside the grammar's vocabulary.
DerivationForest build_forest(std::shared_ptr<const Stsg> grammar,
                              const std::vector<std::string>& sentence);

// Exhaustively unpacks the forest into derivations with probabilities.
// Equals enumerate_derivations on the same grammar and sentence. Throws
// CapExceeded past `cap` derivations (cyclic forests included). Test use.
std::vector<std::pair<Derivation, Rational>> unpack_forest(
    const DerivationForest& forest, std::int64_t cap = 100000);

// Debug dump, one line per edge:
//   (i,j,LABEL) <- serialized-elementary-tree [(i,k,A) (k,j,B)]
std::string dump_forest(const DerivationForest& forest);

}  // namespace dop

#endif  // DOP_CHART_HPP

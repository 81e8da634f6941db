#ifndef DOP_FRAGMENTS_HPP
#define DOP_FRAGMENTS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dop/tree.hpp"

namespace dop {

// Restrictions applied to the extracted fragment bag, in this order:
// depth cap, substitution-site cap, root whitelist, rare-fragment rule.
// Unset optionals mean "unbounded" / "no restriction".
struct FragmentFilter {
  std::optional<int> max_depth;         // >= 1 when set
  std::optional<int> max_sites;         // >= 1 when set
  std::optional<std::set<std::string>> roots;
  int min_count = 1;                    // 2 drops once-occurring fragments
  std::optional<int> hapax_min_depth;   // keep rare fragments this shallow

  bool operator==(const FragmentFilter& other) const = default;
};

// Multiset of fragments (trees, possibly with open substitution sites)
// keyed by canonical serialization so iteration order is deterministic.
struct FragmentBag {
  struct Entry {
    Tree tree;
    std::int64_t count = 0;
  };

  std::map<std::string, Entry> fragments;
  // root label -> total count of fragments with that root
  std::map<std::string, std::int64_t> root_totals;

  void add(const Tree& fragment, std::int64_t count = 1);
  std::int64_t count_of(const Tree& fragment) const;
  std::int64_t root_total(const std::string& label) const;
  std::int64_t total_count() const;
  bool empty() const { return fragments.empty(); }
  std::size_t distinct() const { return fragments.size(); }
  void recompute_root_totals();
};

// All fragments of one fully lexicalized tree: for every internal node, the
// fragments rooted there arise from independently deciding, per internal
// descendant, whether to cut (leaving an open site) or expand. A fragment
// identified at k positions gets count k. Single-node trees yield nothing.
// A depth cap prunes during generation; the result equals generating
// everything and then dropping fragments deeper than the cap.
FragmentBag extract_subtrees(const Tree& tree,
                             std::optional<int> max_depth = std::nullopt);

// Sums extract_subtrees over the corpus bag, then applies the filter.
// `start` defaults to the root label of the first corpus tree; throws
// GrammarError(EmptyBagAfterFiltering) if no fragment rooted `start`
// survives.
FragmentBag corpus_fragments(const Corpus& corpus, const FragmentFilter& filter,
                             std::optional<std::string> start = std::nullopt);

// TSV persistence: "serialized-fragment<TAB>count", lexicographic order.
std::string bag_to_tsv(const FragmentBag& bag);
FragmentBag bag_from_tsv(const std::string& text);
void save_bag(const FragmentBag& bag, const std::string& path);
FragmentBag load_bag(const std::string& path);

}  // namespace dop

#endif  // DOP_FRAGMENTS_HPP

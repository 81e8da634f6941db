#include "dop/fragments.hpp"

#include <fstream>
#include <sstream>
#include <utility>

#include "dop/errors.hpp"

namespace dop {

namespace {

void fragments_at(const Tree& node, int budget, std::vector<Tree>& out);

// The ways a child position can appear in a fragment: a terminal leaf is
// kept verbatim; an internal child is either cut (open site) or expanded
// into any fragment rooted there.
void child_choices(const Tree& child, int budget, std::vector<Tree>& out) {
  if (child.is_leaf()) {
    out.push_back(child);
    return;
  }
  out.push_back(make_open_site(child.label.text));
  fragments_at(child, budget, out);
}

void cross_children(const Tree& node,
                    const std::vector<std::vector<Tree>>& per_child,
                    std::size_t index, std::vector<Tree>& partial,
                    std::vector<Tree>& out) {
  if (index == per_child.size()) {
    out.push_back(Tree{node.label, partial});
    return;
  }
  for (const Tree& choice : per_child[index]) {
    partial.push_back(choice);
    cross_children(node, per_child, index + 1, partial, out);
    partial.pop_back();
  }
}

// All fragments rooted at `node` with depth <= budget (budget < 0 means
// unbounded). Every fragment keeps the full daughter sequence of each
// retained node, so one level always costs one unit of budget.
void fragments_at(const Tree& node, int budget, std::vector<Tree>& out) {
  if (budget == 0) return;
  const int child_budget = budget < 0 ? -1 : budget - 1;
  std::vector<std::vector<Tree>> per_child(node.children.size());
  for (std::size_t i = 0; i < node.children.size(); ++i)
    child_choices(node.children[i], child_budget, per_child[i]);
  std::vector<Tree> partial;
  partial.reserve(node.children.size());
  cross_children(node, per_child, 0, partial, out);
}

template <typename Fn>
void for_each_node(const Tree& tree, Fn&& fn) {
  fn(tree);
  for (const Tree& child : tree.children) for_each_node(child, fn);
}

}  // namespace

void FragmentBag::add(const Tree& fragment, std::int64_t count) {
  std::string key = serialize_tree(fragment);
  auto it = fragments.find(key);
  if (it == fragments.end())
    fragments.emplace(std::move(key), Entry{fragment, count});
  else
    it->second.count += count;
  root_totals[fragment.label.text] += count;
}

std::int64_t FragmentBag::count_of(const Tree& fragment) const {
  auto it = fragments.find(serialize_tree(fragment));
  return it == fragments.end() ? 0 : it->second.count;
}

std::int64_t FragmentBag::root_total(const std::string& label) const {
  auto it = root_totals.find(label);
  return it == root_totals.end() ? 0 : it->second;
}

std::int64_t FragmentBag::total_count() const {
  std::int64_t sum = 0;
  for (const auto& [label, count] : root_totals) sum += count;
  return sum;
}

void FragmentBag::recompute_root_totals() {
  root_totals.clear();
  for (const auto& [key, entry] : fragments)
    root_totals[entry.tree.label.text] += entry.count;
}

FragmentBag extract_subtrees(const Tree& tree, std::optional<int> max_depth) {
  FragmentBag bag;
  const int budget = max_depth ? *max_depth : -1;
  for_each_node(tree, [&](const Tree& node) {
    if (node.is_leaf()) return;
    std::vector<Tree> found;
    fragments_at(node, budget, found);
    for (const Tree& fragment : found) bag.add(fragment);
  });
  return bag;
}

FragmentBag corpus_fragments(const Corpus& corpus, const FragmentFilter& filter,
                             std::optional<std::string> start) {
  FragmentBag bag;
  for (const Tree& tree : corpus.trees) {
    FragmentBag one = extract_subtrees(tree, filter.max_depth);
    for (const auto& [key, entry] : one.fragments)
      bag.add(entry.tree, entry.count);
  }

  if (filter.max_sites) {
    for (auto it = bag.fragments.begin(); it != bag.fragments.end();)
      it = static_cast<int>(open_site_count(it->second.tree)) > *filter.max_sites
               ? bag.fragments.erase(it)
               : std::next(it);
  }
  if (filter.roots) {
    for (auto it = bag.fragments.begin(); it != bag.fragments.end();)
      it = filter.roots->count(it->second.tree.label.text) == 0
               ? bag.fragments.erase(it)
               : std::next(it);
  }
  if (filter.min_count > 1) {
    for (auto it = bag.fragments.begin(); it != bag.fragments.end();) {
      const bool rare = it->second.count < filter.min_count;
      const bool spared =
          filter.hapax_min_depth &&
          static_cast<int>(tree_depth(it->second.tree)) <= *filter.hapax_min_depth;
      it = rare && !spared ? bag.fragments.erase(it) : std::next(it);
    }
  }
  bag.recompute_root_totals();

  std::string start_label;
  if (start)
    start_label = *start;
  else if (!corpus.trees.empty())
    start_label = corpus.trees.front().label.text;
  if (start_label.empty() || bag.root_total(start_label) == 0)
    throw GrammarError(GrammarError::Kind::EmptyBagAfterFiltering,
                       "no fragment rooted '" + start_label +
                           "' survives the filter");
  return bag;
}

std::string bag_to_tsv(const FragmentBag& bag) {
  std::ostringstream out;
  for (const auto& [key, entry] : bag.fragments)
    out << key << '\t' << entry.count << '\n';
  return out.str();
}

FragmentBag bag_from_tsv(const std::string& text) {
  FragmentBag bag;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw GrammarError(GrammarError::Kind::BadFile,
                         "line " + std::to_string(lineno) + ": expected TAB");
    std::int64_t count = 0;
    try {
      count = std::stoll(line.substr(tab + 1));
    } catch (const std::exception&) {
      throw GrammarError(GrammarError::Kind::BadFile,
                         "line " + std::to_string(lineno) + ": bad count");
    }
    if (count <= 0)
      throw GrammarError(GrammarError::Kind::BadFile,
                         "line " + std::to_string(lineno) +
                             ": count must be positive");
    try {
      bag.add(parse_bracketed(line.substr(0, tab)), count);
    } catch (const BracketError& e) {
      throw GrammarError(GrammarError::Kind::BadFile,
                         "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return bag;
}

void save_bag(const FragmentBag& bag, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << bag_to_tsv(bag);
}

FragmentBag load_bag(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return bag_from_tsv(text.str());
}

}  // namespace dop

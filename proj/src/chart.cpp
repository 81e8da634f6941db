#include "dop/chart.hpp"

#include <deque>
#include <functional>
#include <map>
#include <sstream>
#include <tuple>

#include "dop/errors.hpp"

namespace dop {

namespace {

// An elementary tree viewed as the rewrite rule root -> yield.
struct Rule {
  int tree_id;
  std::string lhs;
  std::vector<Label> rhs;
};

// Dotted item: rhs[0..dot) recognized over [start, end), with the entry ids
// of the nonterminals consumed so far.
struct Item {
  int rule;
  int start;
  std::size_t dot;
  int end;
  std::vector<int> children;
};

// Greedy in-order scan; sound because terminals must appear as a
// subsequence of the sentence for the rule to apply anywhere.
bool terminals_in_order(const std::vector<Label>& rhs,
                        const std::vector<std::string>& words) {
  std::size_t pos = 0;
  for (const Label& sym : rhs) {
    if (sym.kind != SymbolKind::Terminal) continue;
    while (pos < words.size() && words[pos] != sym.text) ++pos;
    if (pos == words.size()) return false;
    ++pos;
  }
  return true;
}

struct Builder {
  const Stsg& g;
  const std::vector<std::string>& words;
  const int n;
  DerivationForest forest;
  std::vector<Rule> rules;
  std::deque<Item> agenda;
  // (start, label) -> passive entry ids, for newly created active items
  std::map<std::pair<int, std::string>, std::vector<int>> passives_at;
  // (start, label) -> items waiting for a passive entry starting there
  std::map<std::pair<int, std::string>, std::vector<Item>> waiting;
  std::map<std::tuple<int, int, std::string>, int> entry_id;

  Builder(std::shared_ptr<const Stsg> grammar,
          const std::vector<std::string>& sentence)
      : g(*grammar), words(sentence), n(static_cast<int>(sentence.size())) {
    forest.grammar = std::move(grammar);
    forest.sentence = sentence;
  }

  void check_vocabulary() const {
    for (std::size_t pos = 0; pos < words.size(); ++pos)
      if (!g.has_terminal(words[pos])) throw UnknownTerminal(words[pos], pos);
  }

  void seed() {
    for (std::size_t id = 0; id < g.size(); ++id) {
      const Tree& tree = g.at(static_cast<int>(id)).tree;
      std::vector<Label> rhs = tree_yield(tree);
      if (static_cast<int>(rhs.size()) > n) continue;
      if (!terminals_in_order(rhs, words)) continue;
      rules.push_back(
          Rule{static_cast<int>(id), tree.label.text, std::move(rhs)});
    }
    for (std::size_t r = 0; r < rules.size(); ++r)
      for (int i = 0; i < n; ++i)
        push(Item{static_cast<int>(r), i, 0, i, {}});
  }

  void push(Item item) {
    if (item.dot == rules[static_cast<std::size_t>(item.rule)].rhs.size()) {
      complete(std::move(item));
      return;
    }
    agenda.push_back(std::move(item));
  }

  void advance(const Item& item, int child_entry, int child_end) {
    Item next{item.rule, item.start, item.dot + 1, child_end, item.children};
    next.children.push_back(child_entry);
    push(std::move(next));
  }

  void complete(Item item) {
    const Rule& rule = rules[static_cast<std::size_t>(item.rule)];
    const auto key = std::make_tuple(item.start, item.end, rule.lhs);
    auto found = entry_id.find(key);
    if (found != entry_id.end()) {
      forest.entries[static_cast<std::size_t>(found->second)].edges.push_back(
          ForestEdge{rule.tree_id, std::move(item.children)});
      return;
    }
    const int id = static_cast<int>(forest.entries.size());
    entry_id.emplace(key, id);
    ForestEntry entry{item.start, item.end, rule.lhs, {}};
    entry.edges.push_back(ForestEdge{rule.tree_id, std::move(item.children)});
    forest.entries.push_back(std::move(entry));
    passives_at[{item.start, rule.lhs}].push_back(id);
    // Wake every item waiting for this span start + label. New edges on an
    // existing entry never re-fire: that is exactly the packing. Iterate a
    // snapshot: advancing can recursively complete and touch this list.
    auto waiters = waiting.find({item.start, rule.lhs});
    if (waiters != waiting.end()) {
      const std::vector<Item> snapshot = waiters->second;
      for (const Item& waiter : snapshot) advance(waiter, id, item.end);
    }
  }

  void process(const Item& item) {
    const Rule& rule = rules[static_cast<std::size_t>(item.rule)];
    const Label& symbol = rule.rhs[item.dot];
    if (symbol.kind == SymbolKind::Terminal) {
      if (item.end < n && words[static_cast<std::size_t>(item.end)] == symbol.text) {
        Item next{item.rule, item.start, item.dot + 1, item.end + 1,
                  item.children};
        push(std::move(next));
      }
      return;
    }
    const auto key = std::make_pair(item.end, symbol.text);
    // Register before scanning so a passive completed mid-scan wakes this
    // item instead of slipping between the two steps; scan a snapshot since
    // advancing can recursively extend the passive list.
    waiting[key].push_back(item);
    auto found = passives_at.find(key);
    if (found != passives_at.end()) {
      const std::vector<int> snapshot = found->second;
      for (int entry : snapshot) advance(item, entry, forest.entry(entry).end);
    }
  }

  DerivationForest run() {
    check_vocabulary();
    seed();
    while (!agenda.empty()) {
      Item item = std::move(agenda.front());
      agenda.pop_front();
      process(item);
    }
    auto goal = entry_id.find(std::make_tuple(0, n, g.start.text));
    forest.goal = goal == entry_id.end() ? -1 : goal->second;
    return std::move(forest);
  }
};

}  // namespace

DerivationForest build_forest(std::shared_ptr<const Stsg> grammar,
                              const std::vector<std::string>& sentence) {
  if (!grammar) throw Error("build_forest: null grammar");
  if (sentence.empty()) throw Error("build_forest: empty sentence");
  Builder builder(std::move(grammar), sentence);
  return builder.run();
}

std::vector<std::pair<Derivation, Rational>> unpack_forest(
    const DerivationForest& forest, std::int64_t cap) {
  std::vector<std::pair<Derivation, Rational>> results;
  if (!forest.has_parse()) return results;
  const Stsg& g = *forest.grammar;

  enum class State { Fresh, InProgress, Done };
  std::vector<State> state(forest.entries.size(), State::Fresh);
  std::vector<std::vector<std::vector<int>>> memo(forest.entries.size());
  const auto over_cap = [cap] {
    return CapExceeded("more than " + std::to_string(cap) +
                       " derivations in the forest");
  };

  // Leftmost derivation order is preorder: the edge's tree, then each site
  // subderivation left to right.
  std::function<const std::vector<std::vector<int>>&(int)> derivs =
      [&](int id) -> const std::vector<std::vector<int>>& {
    auto& slot = memo[static_cast<std::size_t>(id)];
    auto& mark = state[static_cast<std::size_t>(id)];
    if (mark == State::InProgress)
      throw CapExceeded("forest cycle: unboundedly many derivations");
    if (mark == State::Done) return slot;
    mark = State::InProgress;
    std::vector<std::vector<int>> out;
    for (const ForestEdge& edge : forest.entry(id).edges) {
      std::vector<std::vector<int>> acc{{edge.tree_id}};
      for (int child : edge.children) {
        const auto& subs = derivs(child);
        std::vector<std::vector<int>> next;
        for (const auto& prefix : acc)
          for (const auto& sub : subs) {
            if (static_cast<std::int64_t>(next.size()) >= cap) throw over_cap();
            std::vector<int> joined = prefix;
            joined.insert(joined.end(), sub.begin(), sub.end());
            next.push_back(std::move(joined));
          }
        acc = std::move(next);
      }
      for (auto& seq : acc) {
        if (static_cast<std::int64_t>(out.size()) >= cap) throw over_cap();
        out.push_back(std::move(seq));
      }
    }
    slot = std::move(out);
    mark = State::Done;
    return slot;
  };

  for (const std::vector<int>& seq : derivs(forest.goal)) {
    Derivation derivation;
    derivation.reserve(seq.size());
    Rational prob = 1;
    for (int tree_id : seq) {
      derivation.push_back(g.at(tree_id).tree);
      prob *= g.at(tree_id).prob;
    }
    results.emplace_back(std::move(derivation), std::move(prob));
  }
  return results;
}

std::string dump_forest(const DerivationForest& forest) {
  std::ostringstream out;
  const Stsg& g = *forest.grammar;
  for (const ForestEntry& entry : forest.entries) {
    for (const ForestEdge& edge : entry.edges) {
      out << '(' << entry.start << ',' << entry.end << ',' << entry.label
          << ") <- " << g.at(edge.tree_id).key << " [";
      for (std::size_t i = 0; i < edge.children.size(); ++i) {
        const ForestEntry& child = forest.entry(edge.children[i]);
        if (i > 0) out << ' ';
        out << '(' << child.start << ',' << child.end << ',' << child.label
            << ')';
      }
      out << "]\n";
    }
  }
  return out.str();
}

}  // namespace dop

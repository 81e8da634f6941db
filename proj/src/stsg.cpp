#include "dop/stsg.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "dop/errors.hpp"

namespace dop {

namespace {

void collect_symbols(const Tree& t, std::set<std::string>& nonterminals,
                     std::set<std::string>& terminals) {
  if (t.is_terminal_leaf()) {
    terminals.insert(t.label.text);
    return;
  }
  nonterminals.insert(t.label.text);
  for (const Tree& child : t.children) collect_symbols(child, nonterminals, terminals);
}

Stsg::Elementary make_elementary(const Tree& tree, std::string key,
                                 std::int64_t count, Rational prob) {
  Stsg::Elementary e;
  e.tree = tree;
  e.key = std::move(key);
  e.count = count;
  e.prob = std::move(prob);
  e.weight = to_double(e.prob);
  e.sites = open_site_count(tree);
  return e;
}

void index_grammar(Stsg& g) {
  g.by_root.clear();
  g.nonterminals.clear();
  g.terminals.clear();
  for (std::size_t id = 0; id < g.trees.size(); ++id) {
    const Stsg::Elementary& e = g.trees[id];
    g.by_root[e.tree.label.text].push_back(static_cast<int>(id));
    collect_symbols(e.tree, g.nonterminals, g.terminals);
  }
  g.nonterminals.insert(g.start.text);
}

Tree* leftmost_site(Tree& t) {
  if (t.is_open_site()) return &t;
  for (Tree& child : t.children)
    if (Tree* site = leftmost_site(child)) return site;
  return nullptr;
}

}  // namespace

int Stsg::find(const Tree& tree) const { return find_key(serialize_tree(tree)); }

int Stsg::find_key(const std::string& key) const {
  auto it = std::lower_bound(
      trees.begin(), trees.end(), key,
      [](const Elementary& e, const std::string& k) { return e.key < k; });
  if (it == trees.end() || it->key != key) return -1;
  return static_cast<int>(it - trees.begin());
}

const std::vector<int>& Stsg::rooted(const std::string& label) const {
  static const std::vector<int> kNone;
  auto it = by_root.find(label);
  return it == by_root.end() ? kNone : it->second;
}

Stsg project_stsg(const FragmentBag& bag, const Label& start) {
  if (bag.root_total(start.text) == 0)
    throw GrammarError(GrammarError::Kind::NoStartFragments,
                       "no fragment rooted '" + start.text + "'");
  Stsg g;
  g.start = Label{start.text, SymbolKind::Nonterminal};
  g.trees.reserve(bag.fragments.size());
  for (const auto& [key, entry] : bag.fragments) {
    const std::int64_t total = bag.root_total(entry.tree.label.text);
    g.trees.push_back(make_elementary(
        entry.tree, key, entry.count,
        Rational(BigInt(entry.count), BigInt(total))));
  }
  index_grammar(g);
  validate_stsg(g);
  return g;
}

void validate_stsg(const Stsg& g) {
  if (g.start.kind != SymbolKind::Nonterminal || g.start.text.empty())
    throw GrammarError(GrammarError::Kind::BadFile, "bad start symbol");
  if (g.rooted(g.start.text).empty())
    throw GrammarError(GrammarError::Kind::NoStartFragments,
                       "no elementary tree rooted '" + g.start.text + "'");
  std::map<std::string, Rational> sums;
  for (std::size_t id = 0; id < g.trees.size(); ++id) {
    const Stsg::Elementary& e = g.trees[id];
    if (id > 0 && !(g.trees[id - 1].key < e.key))
      throw GrammarError(GrammarError::Kind::BadFile,
                         "elementary trees out of order or duplicated: " + e.key);
    if (e.key != serialize_tree(e.tree))
      throw GrammarError(GrammarError::Kind::BadFile, "stale key: " + e.key);
    if (node_count(e.tree) < 2)
      throw GrammarError(GrammarError::Kind::BadFile,
                         "single-node elementary tree: " + e.key);
    if (e.tree.label.kind != SymbolKind::Nonterminal)
      throw GrammarError(GrammarError::Kind::BadFile,
                         "terminal-rooted elementary tree: " + e.key);
    if (e.prob <= 0 || e.prob > 1)
      throw GrammarError(GrammarError::Kind::BadFile,
                         "probability out of (0,1] for " + e.key);
    if (e.count < 1)
      throw GrammarError(GrammarError::Kind::BadFile,
                         "nonpositive count for " + e.key);
    sums[e.tree.label.text] += e.prob;
  }
  for (const auto& [root, sum] : sums)
    if (sum != 1)
      throw GrammarError(GrammarError::Kind::BadFile,
                         "probabilities for root '" + root + "' sum to " +
                             rational_to_string(sum) + ", not 1");
}

Tree compose(const Tree& t, const Tree& u) {
  Tree result = t;
  Tree* site = leftmost_site(result);
  if (!site)
    throw ComposeError(ComposeError::Kind::NoOpenSite,
                       "no open substitution site in " + serialize_tree(t));
  if (!(site->label == u.label))
    throw ComposeError(ComposeError::Kind::LabelMismatch,
                       "leftmost site '" + site->label.text + "' does not match root '" +
                           u.label.text + "'");
  *site = u;
  return result;
}

Tree derive(const Derivation& steps) {
  if (steps.empty()) throw Error("cannot derive from an empty derivation");
  Tree result = steps.front();
  for (std::size_t i = 1; i < steps.size(); ++i) {
    try {
      result = compose(result, steps[i]);
    } catch (const ComposeError& e) {
      throw ComposeError(e.kind(),
                         std::string(e.what()) + " (step " + std::to_string(i) + ")",
                         static_cast<long>(i));
    }
  }
  return result;
}

Rational derivation_probability(const Stsg& g, const Derivation& steps) {
  Rational product = 1;
  for (const Tree& step : steps) {
    const int id = g.find(step);
    if (id < 0)
      throw GrammarError(GrammarError::Kind::StepNotInGrammar,
                         "not an elementary tree: " + serialize_tree(step));
    product *= g.at(id).prob;
  }
  return product;
}

namespace {

// Root labels from which a fully lexicalized completion is reachable.
std::set<std::string> productive_labels(const Stsg& g) {
  std::set<std::string> productive;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const Stsg::Elementary& e : g.trees) {
      if (productive.count(e.tree.label.text)) continue;
      bool all = true;
      for (const Label& leaf : tree_yield(e.tree))
        if (leaf.kind == SymbolKind::Nonterminal && !productive.count(leaf.text)) {
          all = false;
          break;
        }
      if (all) {
        productive.insert(e.tree.label.text);
        changed = true;
      }
    }
  }
  return productive;
}

struct DerivationSearch {
  const Stsg& g;
  const std::vector<std::string>& words;
  std::int64_t cap;
  std::set<std::string> productive;
  std::vector<bool> sites_productive;  // per elementary tree
  std::vector<int> steps;
  std::vector<std::pair<Derivation, Rational>> results;

  DerivationSearch(const Stsg& grammar, const std::vector<std::string>& sentence,
                   std::int64_t limit)
      : g(grammar), words(sentence), cap(limit), productive(productive_labels(g)) {
    sites_productive.reserve(g.size());
    for (const Stsg::Elementary& e : g.trees) {
      bool ok = true;
      for (const Label& leaf : tree_yield(e.tree))
        if (leaf.kind == SymbolKind::Nonterminal && !productive.count(leaf.text))
          ok = false;
      sites_productive.push_back(ok);
    }
  }

  void record(Rational prob) {
    if (static_cast<std::int64_t>(results.size()) >= cap)
      throw CapExceeded("more than " + std::to_string(cap) +
                        " derivations of the sentence");
    Derivation derivation;
    derivation.reserve(steps.size());
    for (int id : steps) derivation.push_back(g.at(id).tree);
    results.emplace_back(std::move(derivation), std::move(prob));
  }

  // Prunes partial derivations whose yield can no longer match: the
  // terminal prefix before the first open site and the terminal suffix
  // after the last one must agree with the sentence, and every open site
  // must eventually contribute at least one word.
  bool viable(const std::vector<Label>& yield, std::size_t& first_site) const {
    const std::size_t n = words.size();
    if (yield.size() > n) return false;
    first_site = yield.size();
    std::size_t last_site = yield.size();
    for (std::size_t i = 0; i < yield.size(); ++i)
      if (yield[i].kind == SymbolKind::Nonterminal) {
        if (first_site == yield.size()) first_site = i;
        last_site = i;
      }
    for (std::size_t i = 0; i < first_site; ++i)
      if (yield[i].text != words[i]) return false;
    if (first_site == yield.size()) return yield.size() == n;
    const std::size_t tail = yield.size() - last_site - 1;
    for (std::size_t i = 0; i < tail; ++i)
      if (yield[yield.size() - 1 - i].text != words[n - 1 - i]) return false;
    return true;
  }

  // `unary_run` carries the site labels seen at the current leftmost
  // position through consecutive compositions that add no words; a repeat
  // means the grammar can pump that cycle into unboundedly many
  // derivations, which the cap treats as exceeding it.
  void expand(const Tree& current, const Rational& prob,
              std::vector<std::string> unary_run) {
    const std::vector<Label> yield = tree_yield(current);
    std::size_t first_site = yield.size();
    if (!viable(yield, first_site)) return;
    if (first_site == yield.size()) {
      record(prob);
      return;
    }
    const std::string& site = yield[first_site].text;
    for (int id : g.rooted(site)) {
      const Stsg::Elementary& e = g.at(id);
      if (!sites_productive[static_cast<std::size_t>(id)]) continue;
      const bool unary = e.sites == 1 && leaf_count(e.tree) == 1;
      std::vector<std::string> next_run;
      if (unary) {
        const std::string next_site = tree_yield(e.tree).front().text;
        next_run = unary_run;
        if (next_run.empty()) next_run.push_back(site);
        if (std::find(next_run.begin(), next_run.end(), next_site) != next_run.end())
          throw CapExceeded("unary substitution cycle through '" + next_site +
                            "' admits unboundedly many derivations");
        next_run.push_back(next_site);
      }
      steps.push_back(id);
      expand(compose(current, e.tree), prob * e.prob, std::move(next_run));
      steps.pop_back();
    }
  }
};

}  // namespace

std::vector<std::pair<Derivation, Rational>> enumerate_derivations(
    const Stsg& g, const std::vector<std::string>& sentence, std::int64_t cap) {
  if (sentence.empty()) throw Error("cannot enumerate derivations of an empty sentence");
  DerivationSearch search(g, sentence, cap);
  for (int id : g.rooted(g.start.text)) {
    if (!search.sites_productive[static_cast<std::size_t>(id)]) continue;
    const Stsg::Elementary& e = g.at(id);
    search.steps.push_back(id);
    std::vector<std::string> run;
    if (e.sites == 1 && leaf_count(e.tree) == 1)
      run.push_back(tree_yield(e.tree).front().text);
    search.expand(e.tree, e.prob, std::move(run));
    search.steps.pop_back();
  }
  return std::move(search.results);
}

namespace {

// Overlays elementary tree `t` on the parse at `node`; on success the parse
// nodes under t's open sites are appended in leftmost order.
bool overlay(const Tree& t, const Tree& node, std::vector<const Tree*>& sites) {
  if (!(t.label == node.label)) return false;
  if (t.is_leaf()) {
    if (t.label.kind == SymbolKind::Nonterminal) sites.push_back(&node);
    return true;
  }
  if (t.children.size() != node.children.size()) return false;
  for (std::size_t i = 0; i < t.children.size(); ++i)
    if (!overlay(t.children[i], node.children[i], sites)) return false;
  return true;
}

Rational decomposition_mass(const Stsg& g, const Tree& node,
                            std::map<const Tree*, Rational>& memo) {
  auto it = memo.find(&node);
  if (it != memo.end()) return it->second;
  Rational sum = 0;
  for (int id : g.rooted(node.label.text)) {
    const Stsg::Elementary& e = g.at(id);
    std::vector<const Tree*> sites;
    if (!overlay(e.tree, node, sites)) continue;
    Rational term = e.prob;
    for (const Tree* sub : sites) term *= decomposition_mass(g, *sub, memo);
    sum += term;
  }
  memo.emplace(&node, sum);
  return sum;
}

}  // namespace

Rational exact_parse_probability(const Stsg& g, const Tree& parse) {
  if (!(parse.label == g.start)) return 0;
  std::map<const Tree*, Rational> memo;
  return decomposition_mass(g, parse, memo);
}

std::string grammar_to_tsv(const Stsg& g) {
  std::ostringstream out;
  out << "# start: " << g.start.text << '\n';
  for (const Stsg::Elementary& e : g.trees)
    out << e.key << '\t' << e.count << '\t' << rational_to_string(e.prob) << '\n';
  return out.str();
}

Stsg grammar_from_tsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::optional<std::string> start;
  std::map<std::string, Stsg::Elementary> entries;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string tag = "# start:";
      if (line.compare(0, tag.size(), tag) == 0 && !start) {
        std::string symbol = line.substr(tag.size());
        symbol.erase(0, symbol.find_first_not_of(' '));
        if (symbol.empty())
          throw GrammarError(GrammarError::Kind::BadFile,
                             "line " + std::to_string(lineno) + ": empty start symbol");
        start = symbol;
      }
      continue;
    }
    const auto tab1 = line.find('\t');
    const auto tab2 = tab1 == std::string::npos ? tab1 : line.find('\t', tab1 + 1);
    if (tab2 == std::string::npos)
      throw GrammarError(GrammarError::Kind::BadFile,
                         "line " + std::to_string(lineno) +
                             ": expected tree<TAB>count<TAB>probability");
    Tree tree;
    std::int64_t count = 0;
    Rational prob;
    try {
      tree = parse_bracketed(line.substr(0, tab1));
      count = std::stoll(line.substr(tab1 + 1, tab2 - tab1 - 1));
      prob = rational_from_string(line.substr(tab2 + 1));
    } catch (const std::exception& e) {
      throw GrammarError(GrammarError::Kind::BadFile,
                         "line " + std::to_string(lineno) + ": " + e.what());
    }
    std::string key = serialize_tree(tree);
    if (entries.count(key))
      throw GrammarError(GrammarError::Kind::BadFile,
                         "line " + std::to_string(lineno) + ": duplicate tree " + key);
    entries.emplace(key, make_elementary(tree, key, count, prob));
  }
  if (!start)
    throw GrammarError(GrammarError::Kind::BadFile, "missing '# start:' header");

  Stsg g;
  g.start = Label{*start, SymbolKind::Nonterminal};
  g.trees.reserve(entries.size());
  for (auto& [key, e] : entries) g.trees.push_back(std::move(e));
  index_grammar(g);
  validate_stsg(g);
  return g;
}

void save_grammar(const Stsg& g, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << grammar_to_tsv(g);
}

Stsg load_grammar(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return grammar_from_tsv(text.str());
}

}  // namespace dop

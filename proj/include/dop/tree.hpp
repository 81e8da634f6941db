#ifndef DOP_TREE_HPP
#define DOP_TREE_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace dop {

enum class SymbolKind { Nonterminal, Terminal };

// A node label. Whether a symbol is terminal is positional in the bracketed
// format: a bare token is a terminal word, a parenthesized label is a
// nonterminal (with children, or an open substitution site when childless).
struct Label {
  std::string text;
  SymbolKind kind = SymbolKind::Nonterminal;

  bool operator==(const Label& other) const = default;
};

// Labelled ordered tree. Internal nodes carry nonterminal labels; a leaf is
// either a terminal word or a nonterminal open substitution site.
// Immutable by convention after construction; all operations return copies.
struct Tree {
  Label label;
  std::vector<Tree> children;

  bool is_leaf() const { return children.empty(); }
  bool is_terminal_leaf() const {
    return children.empty() && label.kind == SymbolKind::Terminal;
  }
  bool is_open_site() const {
    return children.empty() && label.kind == SymbolKind::Nonterminal;
  }

  bool operator==(const Tree& other) const = default;
};

// Builds a leaf / internal node, validating the internal-node invariant.
Tree make_terminal(std::string word);
Tree make_open_site(std::string label);
Tree make_node(std::string label, std::vector<Tree> children);
Tree make_tree(Label label, std::vector<Tree> children);

// Checks the structural invariants (internal nodes nonterminal, labels free
// of reserved characters). Throws BracketError / Error on violation.
void validate_tree(const Tree& tree);

// Penn-style bracketed notation: "(LABEL child...)" or a bare token.
Tree parse_bracketed(std::string_view text);

// Canonical single-space form; parse_bracketed round-trips it.
std::string serialize_tree(const Tree& tree);

// Left-to-right leaf labels: terminal words and open nonterminal sites.
std::vector<Label> tree_yield(const Tree& tree);

// Terminal words only, in yield order.
std::vector<std::string> terminal_yield(const Tree& tree);

std::size_t node_count(const Tree& tree);
std::size_t leaf_count(const Tree& tree);

// Number of edges on the longest root-to-leaf path; 0 for a single node.
std::size_t tree_depth(const Tree& tree);

// Number of open nonterminal leaves (substitution sites).
std::size_t open_site_count(const Tree& tree);

bool is_fully_lexicalized(const Tree& tree);

// A corpus is a bag of fully lexicalized trees; duplicates are significant
// and kept as separate instances in file order.
struct Corpus {
  std::vector<Tree> trees;

  std::size_t size() const { return trees.size(); }
  // Occurrence count of a structurally identical tree.
  std::size_t multiplicity(const Tree& tree) const;
};

// One bracketed tree per non-blank line; blank lines and lines starting with
// '#' are ignored. Open substitution sites are rejected.
Corpus load_corpus(const std::vector<std::string>& lines);
Corpus load_corpus_file(const std::string& path);

std::ostream& operator<<(std::ostream& os, const Tree& tree);

}  // namespace dop

#endif  // DOP_TREE_HPP

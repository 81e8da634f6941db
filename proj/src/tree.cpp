#include "dop/tree.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "dop/errors.hpp"

namespace dop {

namespace {

bool is_reserved(char c) {
  return c == '(' || c == ')' || c == ' ' || c == '\t' || c == '\r' ||
         c == '\n';
}

struct Reader {
  std::string_view text;
  std::size_t pos = 0;

  bool done() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }

  void skip_space() {
    while (!done() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  }

  std::string token() {
    std::size_t start = pos;
    while (!done() && !is_reserved(text[pos])) ++pos;
    return std::string(text.substr(start, pos - start));
  }
};

Tree parse_node(Reader& r) {
  r.skip_space();
  if (r.done())
    throw BracketError(BracketError::Kind::UnbalancedParens, r.pos,
                       "unexpected end of input");
  if (r.peek() == ')')
    throw BracketError(BracketError::Kind::UnbalancedParens, r.pos,
                       "unexpected ')' at offset " + std::to_string(r.pos));
  if (r.peek() != '(') {
    std::size_t at = r.pos;
    std::string word = r.token();
    if (word.empty())
      throw BracketError(BracketError::Kind::EmptyLabel, at,
                         "empty token at offset " + std::to_string(at));
    return Tree{Label{std::move(word), SymbolKind::Terminal}, {}};
  }

  std::size_t open_at = r.pos;
  ++r.pos;  // '('
  r.skip_space();
  std::size_t label_at = r.pos;
  std::string label = r.done() ? std::string() : r.token();
  if (label.empty())
    throw BracketError(BracketError::Kind::EmptyLabel, label_at,
                       "missing label after '(' at offset " +
                           std::to_string(open_at));

  std::vector<Tree> children;
  for (;;) {
    r.skip_space();
    if (r.done())
      throw BracketError(BracketError::Kind::UnbalancedParens, r.pos,
                         "missing ')' for '(' at offset " +
                             std::to_string(open_at));
    if (r.peek() == ')') {
      ++r.pos;
      break;
    }
    children.push_back(parse_node(r));
  }
  return Tree{Label{std::move(label), SymbolKind::Nonterminal},
              std::move(children)};
}

void serialize_into(const Tree& tree, std::string& out) {
  if (tree.is_terminal_leaf()) {
    out += tree.label.text;
    return;
  }
  out += '(';
  out += tree.label.text;
  for (const Tree& child : tree.children) {
    out += ' ';
    serialize_into(child, out);
  }
  out += ')';
}

void validate_label_text(const std::string& text) {
  if (text.empty()) throw BracketError(BracketError::Kind::EmptyLabel, 0,
                                       "empty label");
  for (char c : text)
    if (is_reserved(c))
      throw Error("label '" + text +
                  "' contains whitespace or parentheses");
}

}  // namespace

Tree make_terminal(std::string word) {
  validate_label_text(word);
  return Tree{Label{std::move(word), SymbolKind::Terminal}, {}};
}

Tree make_open_site(std::string label) {
  validate_label_text(label);
  return Tree{Label{std::move(label), SymbolKind::Nonterminal}, {}};
}

Tree make_node(std::string label, std::vector<Tree> children) {
  validate_label_text(label);
  if (children.empty()) return make_open_site(std::move(label));
  return Tree{Label{std::move(label), SymbolKind::Nonterminal},
              std::move(children)};
}

Tree make_tree(Label label, std::vector<Tree> children) {
  validate_label_text(label.text);
  if (label.kind == SymbolKind::Terminal && !children.empty())
    throw BracketError(BracketError::Kind::InternalNodeWithTerminalLabel, 0,
                       "terminal '" + label.text + "' cannot have children");
  return Tree{std::move(label), std::move(children)};
}

void validate_tree(const Tree& tree) {
  validate_label_text(tree.label.text);
  if (tree.label.kind == SymbolKind::Terminal && !tree.children.empty())
    throw BracketError(BracketError::Kind::InternalNodeWithTerminalLabel, 0,
                       "terminal '" + tree.label.text + "' cannot have children");
  for (const Tree& child : tree.children) validate_tree(child);
}

Tree parse_bracketed(std::string_view text) {
  Reader r{text};
  Tree tree = parse_node(r);
  r.skip_space();
  if (!r.done()) {
    if (r.peek() == ')')
      throw BracketError(BracketError::Kind::UnbalancedParens, r.pos,
                         "unexpected ')' at offset " + std::to_string(r.pos));
    throw BracketError(BracketError::Kind::TrailingContent, r.pos,
                       "trailing content at offset " + std::to_string(r.pos));
  }
  return tree;
}

std::string serialize_tree(const Tree& tree) {
  std::string out;
  serialize_into(tree, out);
  return out;
}

namespace {
void collect_yield(const Tree& tree, std::vector<Label>& out) {
  if (tree.is_leaf()) {
    out.push_back(tree.label);
    return;
  }
  for (const Tree& child : tree.children) collect_yield(child, out);
}
}  // namespace

std::vector<Label> tree_yield(const Tree& tree) {
  std::vector<Label> out;
  collect_yield(tree, out);
  return out;
}

std::vector<std::string> terminal_yield(const Tree& tree) {
  std::vector<std::string> out;
  for (const Label& leaf : tree_yield(tree))
    if (leaf.kind == SymbolKind::Terminal) out.push_back(leaf.text);
  return out;
}

std::size_t node_count(const Tree& tree) {
  std::size_t n = 1;
  for (const Tree& child : tree.children) n += node_count(child);
  return n;
}

std::size_t leaf_count(const Tree& tree) {
  if (tree.is_leaf()) return 1;
  std::size_t n = 0;
  for (const Tree& child : tree.children) n += leaf_count(child);
  return n;
}

std::size_t tree_depth(const Tree& tree) {
  std::size_t deepest = 0;
  for (const Tree& child : tree.children)
    deepest = std::max(deepest, 1 + tree_depth(child));
  return deepest;
}

std::size_t open_site_count(const Tree& tree) {
  if (tree.is_leaf()) return tree.is_open_site() ? 1 : 0;
  std::size_t n = 0;
  for (const Tree& child : tree.children) n += open_site_count(child);
  return n;
}

bool is_fully_lexicalized(const Tree& tree) {
  return open_site_count(tree) == 0;
}

std::size_t Corpus::multiplicity(const Tree& tree) const {
  std::size_t n = 0;
  for (const Tree& t : trees)
    if (t == tree) ++n;
  return n;
}

Corpus load_corpus(const std::vector<std::string>& lines) {
  Corpus corpus;
  std::size_t line_no = 0;
  for (const std::string& raw : lines) {
    ++line_no;
    std::string_view line = raw;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
      line.remove_suffix(1);
    std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos) continue;
    if (line[first] == '#') continue;
    Tree tree;
    try {
      tree = parse_bracketed(line);
    } catch (const BracketError& e) {
      throw CorpusError(CorpusError::Kind::BadTree, line_no,
                        "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (tree.label.kind != SymbolKind::Nonterminal || tree.children.empty())
      throw CorpusError(CorpusError::Kind::BadTree, line_no,
                        "line " + std::to_string(line_no) +
                            ": corpus tree must be a bracketed constituent");
    if (!is_fully_lexicalized(tree))
      throw CorpusError(CorpusError::Kind::RejectsOpenSites, line_no,
                        "line " + std::to_string(line_no) +
                            ": corpus tree has an open substitution site");
    corpus.trees.push_back(std::move(tree));
  }
  return corpus;
}

Corpus load_corpus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return load_corpus(lines);
}

std::ostream& operator<<(std::ostream& os, const Tree& tree) {
  return os << serialize_tree(tree);
}

}  // namespace dop

#ifndef DOP_ERRORS_HPP
#define DOP_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dop {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed bracketed-tree text. `offset` is the byte position in the input.
class BracketError : public Error {
 public:
  enum class Kind {
    UnbalancedParens,
    EmptyLabel,
    InternalNodeWithTerminalLabel,
    TrailingContent,
  };

  BracketError(Kind kind, std::size_t offset, const std::string& msg)
      : Error(msg), kind_(kind), offset_(offset) {}

  Kind kind() const { return kind_; }
  std::size_t offset() const { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

// Corpus file problem: carries the 1-based line number.
class CorpusError : public Error {
 public:
  enum class Kind { BadTree, RejectsOpenSites };

  CorpusError(Kind kind, std::size_t line, const std::string& msg)
      : Error(msg), kind_(kind), line_(line) {}

  Kind kind() const { return kind_; }
  std::size_t line() const { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

// Composition failure; `step` is set when raised from derive().
class ComposeError : public Error {
 public:
  enum class Kind { NoOpenSite, LabelMismatch };

  ComposeError(Kind kind, const std::string& msg, long step = -1)
      : Error(msg), kind_(kind), step_(step) {}

  Kind kind() const { return kind_; }
  long step() const { return step_; }

 private:
  Kind kind_;
  long step_;
};

// Grammar construction / lookup problems.
class GrammarError : public Error {
 public:
  enum class Kind {
    NoStartFragments,
    EmptyBagAfterFiltering,
    StepNotInGrammar,
    BadFile,
    CyclicForest,
  };

  GrammarError(Kind kind, const std::string& msg) : Error(msg), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// An enumeration exceeded its derivation cap (or diverges).
class CapExceeded : public Error {
 public:
  explicit CapExceeded(const std::string& msg) : Error(msg) {}
};

// Sentence word absent from the grammar's terminal vocabulary.
class UnknownTerminal : public Error {
 public:
  UnknownTerminal(std::string word, std::size_t position)
      : Error("unknown terminal '" + word + "' at position " +
              std::to_string(position)),
        word_(std::move(word)),
        position_(position) {}

  const std::string& word() const { return word_; }
  std::size_t position() const { return position_; }

 private:
  std::string word_;
  std::size_t position_;
};

// The forest has no goal entry: the sentence is not in the tree language.
class NoParse : public Error {
 public:
  explicit NoParse(const std::string& msg) : Error(msg) {}
};

// Scoring / experiment harness misuse.
class EvalError : public Error {
 public:
  enum class Kind { LengthMismatch, InvalidSplit };

  EvalError(Kind kind, const std::string& msg) : Error(msg), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

}  // namespace dop

#endif  // DOP_ERRORS_HPP

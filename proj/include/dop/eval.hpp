#ifndef DOP_EVAL_HPP
#define DOP_EVAL_HPP

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dop/fragments.hpp"
#include "dop/tree.hpp"

namespace dop {

// Right-fold binarization: a node with more than two children becomes a
// chain of auxiliary nodes labelled "<label>|", yield unchanged. Idempotent;
// the marker keeps the transform reversible.
Tree binarize(const Tree& tree);

// Spans (over leaf positions) of every nonterminal node of width >= 2,
// the whole-sentence span included. Width-1 spans can never cross and are
// excluded.
using Span = std::pair<int, int>;
std::set<Span> brackets_of(const Tree& tree);

// Strict overlap without nesting: i < k < j < l or k < i < l < j.
bool crosses(Span a, Span b);

// Per-sentence scoring detail.
struct SentenceScore {
  bool parsed = false;
  bool exact_match = false;       // candidate structurally equals gold
  bool zero_crossings = false;    // no candidate bracket crosses gold
  int candidate_brackets = 0;
  int clean_brackets = 0;         // candidate brackets crossing nothing
  int gold_brackets = 0;
};

// Scores plus the configuration that produced them (filled by
// run_experiment; score() leaves the echo fields default).
struct AccuracyReport {
  double parse_accuracy = 0.0;       // % candidates identical to gold
  double sentence_accuracy = 0.0;    // % candidates with zero crossings
  double bracketing_accuracy = 0.0;  // % candidate brackets crossing nothing
  double coverage = 0.0;             // % sentences with any candidate
  int n_test = 0;
  std::vector<SentenceScore> rows;

  // configuration echo
  std::string filter_id;
  FragmentFilter filter;
  std::string mode;
  std::int64_t samples = 0;  // N when sampling, else 0
  std::uint64_t seed = 0;
};

// Candidates may be absent (no parse found); an absent candidate fails all
// three accuracy metrics, contributing its gold bracket count to the
// bracketing denominator. Exact match is judged on raw trees; crossing
// metrics on binarized ones. Throws EvalError(LengthMismatch).
AccuracyReport score(const std::vector<std::optional<Tree>>& candidates,
                     const std::vector<Tree>& golds);

// Deterministic shuffle split into train/test parts.
struct SplitSpec {
  double train_fraction = 0.9;
  std::uint64_t seed = 0;
};
std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus, SplitSpec split);

// How one sentence's forest is turned into a single candidate parse.
struct DisambigMode {
  enum class Kind { Mpd, MppMc, MppExact };
  Kind kind = Kind::Mpd;
  std::optional<double> sigma;          // mpp-mc: sample count from sigma
  std::optional<std::int64_t> samples;  // mpp-mc: explicit sample count
  std::int64_t cap = 100000;            // mpp-exact: unpacking cap
  double tie_width = 0.0;               // mpp-mc forced-choice width

  std::string name() const;
};

// Full harness: split the corpus, then for every filter extract fragments
// from the train part, project the grammar, parse each held-out yield,
// disambiguate per mode, and score. Per-sentence failures (unknown word,
// no parse, cap exceeded) are recorded, not fatal. Sentence i draws its
// sampling seed from mix_seed(rng_seed, i), so reports are reproducible
// for any --jobs value.
std::vector<AccuracyReport> run_experiment(
    const Corpus& corpus, SplitSpec split,
    const std::vector<FragmentFilter>& filter_grid, const DisambigMode& mode,
    std::uint64_t rng_seed, int jobs = 1);

// One row per report: filter-id, max-depth, max-sites, min-count, mode,
// parse-acc, sentence-acc, bracketing-acc, coverage, n-test, seed.
std::string reports_to_tsv(const std::vector<AccuracyReport>& reports);

}  // namespace dop

#endif  // DOP_EVAL_HPP

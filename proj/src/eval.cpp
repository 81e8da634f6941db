#include "dop/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "dop/chart.hpp"
#include "dop/disambiguation.hpp"
#include "dop/errors.hpp"
#include "dop/stsg.hpp"

namespace dop {

Tree binarize(const Tree& tree) {
  if (tree.is_leaf()) return tree;
  std::vector<Tree> children;
  children.reserve(tree.children.size());
  for (const Tree& child : tree.children) children.push_back(binarize(child));
  if (children.size() <= 2) return Tree{tree.label, std::move(children)};

  const Label aux{tree.label.text + "|", SymbolKind::Nonterminal};
  const std::size_t k = children.size();
  Tree chain{aux, {children[k - 2], children[k - 1]}};
  for (int i = static_cast<int>(k) - 3; i >= 1; --i)
    chain = Tree{aux, {children[static_cast<std::size_t>(i)], std::move(chain)}};
  return Tree{tree.label, {children[0], std::move(chain)}};
}

namespace {

int collect_spans(const Tree& node, int start, std::set<Span>& out) {
  if (node.is_leaf()) return start + 1;
  int end = start;
  for (const Tree& child : node.children) end = collect_spans(child, end, out);
  if (end - start >= 2) out.insert({start, end});
  return end;
}

}  // namespace

std::set<Span> brackets_of(const Tree& tree) {
  std::set<Span> out;
  collect_spans(tree, 0, out);
  return out;
}

bool crosses(Span a, Span b) {
  return (a.first < b.first && b.first < a.second && a.second < b.second) ||
         (b.first < a.first && a.first < b.second && b.second < a.second);
}

AccuracyReport score(const std::vector<std::optional<Tree>>& candidates,
                     const std::vector<Tree>& golds) {
  if (candidates.size() != golds.size())
    throw EvalError(EvalError::Kind::LengthMismatch,
                    std::to_string(candidates.size()) + " candidates vs " +
                        std::to_string(golds.size()) + " gold trees");
  AccuracyReport report;
  report.n_test = static_cast<int>(golds.size());
  int parsed = 0, exact = 0, no_crossings = 0;
  std::int64_t clean_total = 0, bracket_total = 0;

  for (std::size_t i = 0; i < golds.size(); ++i) {
    SentenceScore row;
    const std::set<Span> gold_brackets = brackets_of(binarize(golds[i]));
    row.gold_brackets = static_cast<int>(gold_brackets.size());
    if (candidates[i]) {
      row.parsed = true;
      ++parsed;
      row.exact_match = (*candidates[i] == golds[i]);
      const std::set<Span> cand_brackets = brackets_of(binarize(*candidates[i]));
      row.candidate_brackets = static_cast<int>(cand_brackets.size());
      for (const Span& span : cand_brackets) {
        const bool crossing =
            std::any_of(gold_brackets.begin(), gold_brackets.end(),
                        [&](const Span& gold) { return crosses(span, gold); });
        if (!crossing) ++row.clean_brackets;
      }
      row.zero_crossings = (row.clean_brackets == row.candidate_brackets);
      bracket_total += row.candidate_brackets;
      clean_total += row.clean_brackets;
      if (row.exact_match) ++exact;
      if (row.zero_crossings) ++no_crossings;
    } else {
      // a failure is as wrong as a parse whose every bracket crosses
      bracket_total += row.gold_brackets;
    }
    report.rows.push_back(row);
  }

  const double n = static_cast<double>(golds.size());
  report.parse_accuracy = n > 0 ? 100.0 * exact / n : 0.0;
  report.sentence_accuracy = n > 0 ? 100.0 * no_crossings / n : 0.0;
  report.bracketing_accuracy =
      bracket_total > 0
          ? 100.0 * static_cast<double>(clean_total) / static_cast<double>(bracket_total)
          : 0.0;
  report.coverage = n > 0 ? 100.0 * parsed / n : 0.0;
  return report;
}

std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus, SplitSpec split) {
  const std::size_t n = corpus.trees.size();
  if (n < 2)
    throw EvalError(EvalError::Kind::InvalidSplit, "corpus too small to split");
  if (!(split.train_fraction > 0.0) || !(split.train_fraction < 1.0))
    throw EvalError(EvalError::Kind::InvalidSplit,
                    "train fraction must lie in (0, 1)");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  SampleRng rng(split.seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = rng.next() % (i + 1);
    std::swap(order[i], order[j]);
  }

  auto train_n = static_cast<std::size_t>(
      std::llround(split.train_fraction * static_cast<double>(n)));
  train_n = std::min(std::max<std::size_t>(train_n, 1), n - 1);

  std::pair<Corpus, Corpus> parts;
  for (std::size_t i = 0; i < n; ++i)
    (i < train_n ? parts.first : parts.second).trees.push_back(corpus.trees[order[i]]);
  return parts;
}

std::string DisambigMode::name() const {
  switch (kind) {
    case Kind::Mpd: return "mpd";
    case Kind::MppMc: return "mpp-mc";
    case Kind::MppExact: return "mpp-exact";
  }
  return "?";
}

std::vector<AccuracyReport> run_experiment(
    const Corpus& corpus, SplitSpec split,
    const std::vector<FragmentFilter>& filter_grid, const DisambigMode& mode,
    std::uint64_t rng_seed, int jobs) {
  auto [train, test] = split_corpus(corpus, split);
  const std::string start_text = corpus.trees.front().label.text;
  const Label start{start_text, SymbolKind::Nonterminal};

  std::int64_t n_samples = 0;
  if (mode.kind == DisambigMode::Kind::MppMc) {
    if (mode.samples)
      n_samples = *mode.samples;
    else if (mode.sigma)
      n_samples = samples_for_sigma(*mode.sigma);
    else
      throw Error("sampling mode needs a sigma bound or a sample count");
    if (n_samples < 1) throw Error("sample count must be positive");
  }

  std::vector<AccuracyReport> reports;
  reports.reserve(filter_grid.size());
  for (std::size_t f = 0; f < filter_grid.size(); ++f) {
    const FragmentBag bag = corpus_fragments(train, filter_grid[f], start_text);
    const auto grammar = std::make_shared<const Stsg>(project_stsg(bag, start));

    std::vector<std::optional<Tree>> candidates(test.trees.size());
    auto parse_one = [&](std::size_t i) {
      try {
        const std::vector<std::string> words = terminal_yield(test.trees[i]);
        const DerivationForest forest = build_forest(grammar, words);
        if (!forest.has_parse()) return;
        switch (mode.kind) {
          case DisambigMode::Kind::Mpd: {
            const auto [steps, prob] = most_probable_derivation(forest);
            candidates[i] = derive(steps);
            break;
          }
          case DisambigMode::Kind::MppMc: {
            const InsideMasses masses = compute_inside(forest);
            const ParseDistribution dist = estimate_parse_distribution(
                forest, masses, n_samples, mix_seed(rng_seed, i));
            const std::vector<Tree> top = select_top_parses(dist, mode.tie_width);
            if (!top.empty()) candidates[i] = top.front();
            break;
          }
          case DisambigMode::Kind::MppExact: {
            const auto ranked = exact_parse_masses(forest, mode.cap);
            if (!ranked.empty()) candidates[i] = ranked.front().first;
            break;
          }
        }
      } catch (const UnknownTerminal&) {
      } catch (const NoParse&) {
      } catch (const CapExceeded&) {
      } catch (const GrammarError& e) {
        if (e.kind() != GrammarError::Kind::CyclicForest) throw;
      }
    };

    if (jobs <= 1) {
      for (std::size_t i = 0; i < test.trees.size(); ++i) parse_one(i);
    } else {
      std::atomic<std::size_t> cursor{0};
      std::exception_ptr failure;
      std::mutex failure_lock;
      auto drain = [&] {
        for (;;) {
          const std::size_t i = cursor.fetch_add(1);
          if (i >= test.trees.size()) return;
          try {
            parse_one(i);
          } catch (...) {
            const std::lock_guard<std::mutex> guard(failure_lock);
            if (!failure) failure = std::current_exception();
            return;
          }
        }
      };
      std::vector<std::thread> pool;
      const int width = std::min<int>(jobs, static_cast<int>(test.trees.size()));
      pool.reserve(static_cast<std::size_t>(width));
      for (int t = 0; t < width; ++t) pool.emplace_back(drain);
      for (std::thread& t : pool) t.join();
      if (failure) std::rethrow_exception(failure);
    }

    AccuracyReport report = score(candidates, test.trees);
    report.filter_id = "f" + std::to_string(f);
    report.filter = filter_grid[f];
    report.mode = mode.name();
    report.samples = mode.kind == DisambigMode::Kind::MppMc ? n_samples : 0;
    report.seed = rng_seed;
    reports.push_back(std::move(report));
  }
  return reports;
}

namespace {

std::string cap_text(const std::optional<int>& cap) {
  return cap ? std::to_string(*cap) : "unbounded";
}

}  // namespace

std::string reports_to_tsv(const std::vector<AccuracyReport>& reports) {
  std::ostringstream out;
  out << "#filter-id\tmax-depth\tmax-sites\tmin-count\tmode\tparse-acc"
         "\tsentence-acc\tbracketing-acc\tcoverage\tn-test\tseed\n";
  char cell[64];
  for (const AccuracyReport& r : reports) {
    out << r.filter_id << '\t' << cap_text(r.filter.max_depth) << '\t'
        << cap_text(r.filter.max_sites) << '\t' << r.filter.min_count << '\t'
        << r.mode;
    for (double value : {r.parse_accuracy, r.sentence_accuracy,
                         r.bracketing_accuracy, r.coverage}) {
      std::snprintf(cell, sizeof cell, "%.2f", value);
      out << '\t' << cell;
    }
    out << '\t' << r.n_test << '\t' << r.seed << '\n';
  }
  return out.str();
}

}  // namespace dop

// Command-line front end: extract | parse | eval | sweep.
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dop/chart.hpp"
#include "dop/disambiguation.hpp"
#include "dop/errors.hpp"
#include "dop/eval.hpp"
#include "dop/fragments.hpp"
#include "dop/rational.hpp"
#include "dop/stsg.hpp"
#include "dop/tree.hpp"

namespace {

// Command-line misuse found after flag parsing; exits with status 1.
struct UsageFail : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_commas(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) out.push_back(item);
  return out;
}

int parse_int_token(const std::string& token, const std::string& flag) {
  try {
    std::size_t used = 0;
    const int value = std::stoi(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return value;
  } catch (const std::exception&) {
    throw UsageFail(flag + ": expected an integer, got '" + token + "'");
  }
}

// A sweep axis: comma-separated ints, "unbounded" allowed where a bound is
// optional. An empty spec yields the single default entry.
std::vector<std::optional<int>> parse_axis(const std::string& spec,
                                           const std::string& flag,
                                           bool allow_unbounded,
                                           int min_value) {
  if (spec.empty()) return {std::nullopt};
  std::vector<std::optional<int>> out;
  for (const std::string& token : split_commas(spec)) {
    if (token == "unbounded") {
      if (!allow_unbounded) throw UsageFail(flag + ": 'unbounded' not allowed");
      out.push_back(std::nullopt);
    } else {
      const int value = parse_int_token(token, flag);
      if (value < min_value)
        throw UsageFail(flag + ": values must be >= " +
                        std::to_string(min_value));
      out.push_back(value);
    }
  }
  if (out.empty()) throw UsageFail(flag + ": empty list");
  return out;
}

std::set<std::string> parse_roots(const std::string& spec) {
  std::set<std::string> roots;
  for (const std::string& token : split_commas(spec)) {
    if (token.empty()) throw UsageFail("--roots: empty label in list");
    roots.insert(token);
  }
  if (roots.empty()) throw UsageFail("--roots: empty list");
  return roots;
}

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", value);
  return buf;
}

// Where output goes: a file path, or stdout for "-" / unset.
class OutputTarget {
 public:
  explicit OutputTarget(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path, std::ios::binary);
      if (!file_) throw dop::Error("cannot open output file: " + path);
      use_file_ = true;
    }
  }
  std::ostream& stream() { return use_file_ ? file_ : std::cout; }

 private:
  std::ofstream file_;
  bool use_file_ = false;
};

struct ModeFlags {
  std::string mode = "mpd";
  double sigma = 0.0;
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
  double tie_width = 0.0;
  bool has_sigma = false;
  bool has_samples = false;
  bool has_seed = false;
};

dop::DisambigMode make_mode(const ModeFlags& flags) {
  dop::DisambigMode mode;
  if (flags.mode == "mpd") {
    mode.kind = dop::DisambigMode::Kind::Mpd;
  } else if (flags.mode == "mpp-mc") {
    mode.kind = dop::DisambigMode::Kind::MppMc;
  } else if (flags.mode == "mpp-exact") {
    mode.kind = dop::DisambigMode::Kind::MppExact;
  } else {
    throw UsageFail("--mode: expected mpd, mpp-mc or mpp-exact");
  }
  if (mode.kind == dop::DisambigMode::Kind::MppMc) {
    if (flags.has_sigma == flags.has_samples)
      throw UsageFail("--mode mpp-mc needs exactly one of --sigma/--samples");
    if (!flags.has_seed) throw UsageFail("--mode mpp-mc needs --seed");
    if (flags.has_sigma) {
      if (!(flags.sigma > 0.0) || flags.sigma > 0.5)
        throw UsageFail("--sigma must lie in (0, 0.5]");
      mode.sigma = flags.sigma;
    } else {
      if (flags.samples < 1) throw UsageFail("--samples must be >= 1");
      mode.samples = flags.samples;
    }
  } else if (flags.has_sigma || flags.has_samples) {
    throw UsageFail("--sigma/--samples only apply to --mode mpp-mc");
  }
  if (flags.tie_width < 0.0) throw UsageFail("--tie-width must be >= 0");
  mode.tie_width = flags.tie_width;
  return mode;
}

void add_mode_flags(CLI::App* cmd, ModeFlags& flags) {
  cmd->add_option("--mode", flags.mode, "Disambiguation mode")
      ->check(CLI::IsMember({"mpd", "mpp-mc", "mpp-exact"}));
  auto* sigma = cmd->add_option("--sigma", flags.sigma,
                                "Standard-error bound for sampling");
  auto* samples =
      cmd->add_option("--samples", flags.samples, "Sample count for sampling");
  auto* seed = cmd->add_option("--seed", flags.seed, "Sampling seed");
  cmd->add_option("--tie-width", flags.tie_width,
                  "Frequency margin treated as a tie");
  cmd->parse_complete_callback([&flags, sigma, samples, seed] {
    flags.has_sigma = sigma->count() > 0;
    flags.has_samples = samples->count() > 0;
    flags.has_seed = seed->count() > 0;
  });
}

struct FilterFlags {
  int max_depth = 0;
  int max_sites = 0;
  std::string roots;
  int min_count = 1;
  int hapax_min_depth = 0;
  CLI::Option* depth_opt = nullptr;
  CLI::Option* sites_opt = nullptr;
  CLI::Option* hapax_opt = nullptr;
};

void add_filter_flags(CLI::App* cmd, FilterFlags& flags) {
  flags.depth_opt = cmd->add_option("--max-depth", flags.max_depth,
                                    "Keep fragments of at most this depth")
                        ->check(CLI::PositiveNumber);
  flags.sites_opt =
      cmd->add_option("--max-sites", flags.max_sites,
                      "Keep fragments with at most this many open sites")
          ->check(CLI::NonNegativeNumber);
  cmd->add_option("--roots", flags.roots,
                  "Comma-separated root labels to keep");
  cmd->add_option("--min-count", flags.min_count,
                  "Drop fragments seen fewer times than this")
      ->check(CLI::PositiveNumber);
  flags.hapax_opt =
      cmd->add_option("--hapax-min-depth", flags.hapax_min_depth,
                      "Drop only rare fragments deeper than this")
          ->check(CLI::NonNegativeNumber);
}

dop::FragmentFilter make_filter(const FilterFlags& flags) {
  dop::FragmentFilter filter;
  if (flags.depth_opt->count() > 0) filter.max_depth = flags.max_depth;
  if (flags.sites_opt->count() > 0) filter.max_sites = flags.max_sites;
  if (!flags.roots.empty()) filter.roots = parse_roots(flags.roots);
  filter.min_count = flags.min_count;
  if (flags.hapax_opt->count() > 0)
    filter.hapax_min_depth = flags.hapax_min_depth;
  return filter;
}

int run_extract(const std::string& corpus_path, const FilterFlags& filter_flags,
                const std::string& out_path) {
  const dop::Corpus corpus = dop::load_corpus_file(corpus_path);
  const dop::FragmentFilter filter = make_filter(filter_flags);
  const dop::FragmentBag bag = dop::corpus_fragments(corpus, filter);
  const dop::Stsg grammar =
      dop::project_stsg(bag, corpus.trees.front().label);
  dop::save_grammar(grammar, out_path);
  return 0;
}

std::vector<std::string> split_words(const std::string& line) {
  std::vector<std::string> words;
  std::istringstream in(line);
  std::string word;
  while (in >> word) words.push_back(word);
  return words;
}

int run_parse(const std::string& grammar_path, const std::string& input_path,
              const std::string& out_path, const ModeFlags& mode_flags) {
  const dop::DisambigMode mode = make_mode(mode_flags);
  const auto grammar =
      std::make_shared<const dop::Stsg>(dop::load_grammar(grammar_path));

  std::ifstream file;
  if (!input_path.empty() && input_path != "-") {
    file.open(input_path, std::ios::binary);
    if (!file) throw dop::Error("cannot open input file: " + input_path);
  }
  std::istream& in = file.is_open() ? file : std::cin;
  OutputTarget target(out_path);
  std::ostream& out = target.stream();

  std::int64_t n_samples = 0;
  if (mode.kind == dop::DisambigMode::Kind::MppMc)
    n_samples = mode.samples ? *mode.samples
                             : dop::samples_for_sigma(*mode.sigma);

  std::string line;
  std::size_t index = 0;
  bool first = true;
  while (std::getline(in, line)) {
    const std::vector<std::string> words = split_words(line);
    if (words.empty()) continue;
    if (!first) out << "\n";
    first = false;
    out << "SENT";
    for (const std::string& word : words) out << " " << word;
    out << "\n";
    try {
      const dop::DerivationForest forest = dop::build_forest(grammar, words);
      if (!forest.has_parse()) throw dop::NoParse("no derivation");
      switch (mode.kind) {
        case dop::DisambigMode::Kind::Mpd: {
          const auto [steps, prob] = dop::most_probable_derivation(forest);
          out << "PARSE " << dop::serialize_tree(dop::derive(steps)) << "\n";
          out << "PROB " << dop::rational_to_string(prob) << "\n";
          break;
        }
        case dop::DisambigMode::Kind::MppExact: {
          const auto ranked = dop::exact_parse_masses(forest, mode.cap);
          out << "PARSE " << dop::serialize_tree(ranked.front().first) << "\n";
          out << "PROB " << dop::rational_to_string(ranked.front().second)
              << "\n";
          break;
        }
        case dop::DisambigMode::Kind::MppMc: {
          const dop::InsideMasses masses = dop::compute_inside(forest);
          const dop::ParseDistribution dist = dop::estimate_parse_distribution(
              forest, masses, n_samples, dop::mix_seed(mode_flags.seed, index));
          const std::vector<dop::Tree> top =
              dop::select_top_parses(dist, mode.tie_width);
          const std::string key = dop::serialize_tree(top.front());
          out << "PARSE " << key << "\n";
          out << "ESTIMATE " << format_double(dist.estimate(key)) << "\n";
          out << "N " << dist.samples << "\n";
          out << "SIGMA-BOUND " << format_double(dist.sigma_bound) << "\n";
          break;
        }
      }
    } catch (const dop::UnknownTerminal& e) {
      out << "NO-PARSE unknown-terminal " << e.word() << "@" << e.position()
          << "\n";
    } catch (const dop::NoParse&) {
      out << "NO-PARSE no-derivation\n";
    } catch (const dop::CapExceeded&) {
      out << "NO-PARSE cap-exceeded\n";
    }
    ++index;
  }
  return 0;
}

int run_eval(const std::string& corpus_path,
             const std::vector<dop::FragmentFilter>& grid,
             const ModeFlags& mode_flags, double train_fraction,
             std::uint64_t split_seed, int jobs, const std::string& out_path) {
  const dop::DisambigMode mode = make_mode(mode_flags);
  if (jobs < 1) throw UsageFail("--jobs must be >= 1");
  if (!(train_fraction > 0.0) || !(train_fraction < 1.0))
    throw UsageFail("--train-fraction must lie in (0, 1)");
  const dop::Corpus corpus = dop::load_corpus_file(corpus_path);
  const dop::SplitSpec split{train_fraction, split_seed};
  const std::vector<dop::AccuracyReport> reports =
      dop::run_experiment(corpus, split, grid, mode, mode_flags.seed, jobs);
  OutputTarget target(out_path);
  target.stream() << dop::reports_to_tsv(reports);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tree-substitution grammar toolkit"};
  app.require_subcommand(1);

  // extract
  auto* extract = app.add_subcommand(
      "extract", "Read a treebank, write the fragment grammar");
  std::string extract_corpus, extract_out;
  FilterFlags extract_filter;
  extract->add_option("--corpus", extract_corpus, "Treebank file")
      ->required();
  add_filter_flags(extract, extract_filter);
  extract->add_option("--out", extract_out, "Grammar output path")->required();

  // parse
  auto* parse = app.add_subcommand(
      "parse", "Parse sentence lines with a saved grammar");
  std::string parse_grammar, parse_input = "-", parse_out = "-";
  ModeFlags parse_mode;
  parse->add_option("--grammar", parse_grammar, "Grammar file")->required();
  add_mode_flags(parse, parse_mode);
  parse->add_option("input", parse_input,
                    "Sentence file, one per line ('-' = stdin)");
  parse->add_option("--out", parse_out, "Output path ('-' = stdout)");

  // eval
  auto* eval = app.add_subcommand(
      "eval", "Split a treebank, train, parse the held-out part, score");
  std::string eval_corpus, eval_out = "-";
  FilterFlags eval_filter;
  ModeFlags eval_mode;
  double eval_fraction = 0.9;
  std::uint64_t eval_split_seed = 0;
  int eval_jobs = 1;
  eval->add_option("--corpus", eval_corpus, "Treebank file")->required();
  add_filter_flags(eval, eval_filter);
  add_mode_flags(eval, eval_mode);
  eval->add_option("--train-fraction", eval_fraction,
                   "Fraction of trees used for training");
  eval->add_option("--split-seed", eval_split_seed, "Shuffle seed");
  eval->add_option("--jobs", eval_jobs, "Worker threads");
  eval->add_option("--out", eval_out, "Report path ('-' = stdout)");

  // sweep
  auto* sweep = app.add_subcommand(
      "sweep", "Run eval across a grid of fragment filters");
  std::string sweep_corpus, sweep_out = "-";
  std::string sweep_depths, sweep_sites, sweep_counts, sweep_roots;
  int sweep_hapax = 0;
  ModeFlags sweep_mode;
  double sweep_fraction = 0.9;
  std::uint64_t sweep_split_seed = 0;
  int sweep_jobs = 1;
  sweep->add_option("--corpus", sweep_corpus, "Treebank file")->required();
  sweep->add_option("--max-depth", sweep_depths,
                    "Depth bounds, comma-separated ('unbounded' allowed)");
  sweep->add_option("--max-sites", sweep_sites,
                    "Site bounds, comma-separated ('unbounded' allowed)");
  sweep->add_option("--min-count", sweep_counts,
                    "Count thresholds, comma-separated");
  sweep->add_option("--roots", sweep_roots,
                    "Comma-separated root labels to keep");
  auto* sweep_hapax_opt =
      sweep->add_option("--hapax-min-depth", sweep_hapax,
                        "Drop only rare fragments deeper than this")
          ->check(CLI::NonNegativeNumber);
  add_mode_flags(sweep, sweep_mode);
  sweep->add_option("--train-fraction", sweep_fraction,
                    "Fraction of trees used for training");
  sweep->add_option("--split-seed", sweep_split_seed, "Shuffle seed");
  sweep->add_option("--jobs", sweep_jobs, "Worker threads");
  sweep->add_option("--out", sweep_out, "Report path ('-' = stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (extract->parsed())
      return run_extract(extract_corpus, extract_filter, extract_out);
    if (parse->parsed())
      return run_parse(parse_grammar, parse_input, parse_out, parse_mode);
    if (eval->parsed())
      return run_eval(eval_corpus, {make_filter(eval_filter)}, eval_mode,
                      eval_fraction, eval_split_seed, eval_jobs, eval_out);
    if (sweep->parsed()) {
      std::vector<dop::FragmentFilter> grid;
      const auto depths = parse_axis(sweep_depths, "--max-depth", true, 1);
      const auto sites = parse_axis(sweep_sites, "--max-sites", true, 0);
      std::vector<std::optional<int>> counts =
          parse_axis(sweep_counts, "--min-count", false, 1);
      if (sweep_counts.empty()) counts = {1};
      for (const auto& depth : depths)
        for (const auto& site : sites)
          for (const auto& count : counts) {
            dop::FragmentFilter filter;
            filter.max_depth = depth;
            filter.max_sites = site;
            filter.min_count = count.value_or(1);
            if (!sweep_roots.empty()) filter.roots = parse_roots(sweep_roots);
            if (sweep_hapax_opt->count() > 0)
              filter.hapax_min_depth = sweep_hapax;
            grid.push_back(std::move(filter));
          }
      return run_eval(sweep_corpus, grid, sweep_mode, sweep_fraction,
                      sweep_split_seed, sweep_jobs, sweep_out);
    }
  } catch (const UsageFail& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

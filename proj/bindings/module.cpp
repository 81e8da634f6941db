// Python veneer over the library: trees cross the boundary as bracketed
// strings, probabilities as fractions.Fraction, so the module stays free of
// wrapper types that would shadow the C++ API.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dop/chart.hpp"
#include "dop/disambiguation.hpp"
#include "dop/errors.hpp"
#include "dop/eval.hpp"
#include "dop/fragments.hpp"
#include "dop/rational.hpp"
#include "dop/stsg.hpp"
#include "dop/tree.hpp"

namespace py = pybind11;
using namespace dop;

namespace {

py::object as_fraction(const Rational& r) {
  return py::module_::import("fractions")
      .attr("Fraction")(rational_to_string(r));
}

Derivation steps_from(const std::vector<std::string>& texts) {
  Derivation steps;
  steps.reserve(texts.size());
  for (const std::string& text : texts) steps.push_back(parse_bracketed(text));
  return steps;
}

std::vector<std::string> steps_to(const Derivation& steps) {
  std::vector<std::string> texts;
  texts.reserve(steps.size());
  for (const Tree& step : steps) texts.push_back(serialize_tree(step));
  return texts;
}

py::list pairs_to_py(const std::vector<std::pair<Derivation, Rational>>& xs) {
  py::list out;
  for (const auto& [steps, prob] : xs)
    out.append(py::make_tuple(steps_to(steps), as_fraction(prob)));
  return out;
}

FragmentFilter make_filter(std::optional<int> max_depth,
                           std::optional<int> max_sites,
                           std::optional<std::set<std::string>> roots,
                           int min_count,
                           std::optional<int> hapax_min_depth) {
  FragmentFilter f;
  f.max_depth = max_depth;
  f.max_sites = max_sites;
  f.roots = std::move(roots);
  f.min_count = min_count;
  f.hapax_min_depth = hapax_min_depth;
  return f;
}

SamplingScheme scheme_from(const std::string& name) {
  if (name == "top-down") return SamplingScheme::TopDown;
  if (name == "bottom-up") return SamplingScheme::BottomUpElimination;
  throw py::value_error("scheme must be 'top-down' or 'bottom-up'");
}

DisambigMode make_mode(const std::string& name, std::optional<double> sigma,
                       std::optional<std::int64_t> samples, std::int64_t cap,
                       double tie_width) {
  DisambigMode mode;
  if (name == "mpd")
    mode.kind = DisambigMode::Kind::Mpd;
  else if (name == "mpp-mc")
    mode.kind = DisambigMode::Kind::MppMc;
  else if (name == "mpp-exact")
    mode.kind = DisambigMode::Kind::MppExact;
  else
    throw py::value_error("mode must be 'mpd', 'mpp-mc', or 'mpp-exact'");
  mode.sigma = sigma;
  mode.samples = samples;
  mode.cap = cap;
  mode.tie_width = tie_width;
  return mode;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Tree-substitution grammar engine: fragment extraction, chart "
      "parsing, derivation/parse disambiguation, and bracket scoring.";
  m.attr("__version__") = "0.1.0";

  // Exception translators are tried newest-first, so the base goes first.
  static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
  py::register_exception<BracketError>(m, "BracketError", base);
  py::register_exception<CorpusError>(m, "CorpusError", base);
  py::register_exception<ComposeError>(m, "ComposeError", base);
  py::register_exception<GrammarError>(m, "GrammarError", base);
  py::register_exception<UnknownTerminal>(m, "UnknownTerminal", base);
  py::register_exception<NoParse>(m, "NoParse", base);
  py::register_exception<CapExceeded>(m, "CapExceeded", base);
  py::register_exception<EvalError>(m, "EvalError", base);

  // --- trees ----------------------------------------------------------
  m.def(
      "parse_tree",
      [](const std::string& text) {
        return serialize_tree(parse_bracketed(text));
      },
      py::arg("text"),
      "Parse a bracketed tree and return its canonical serialization.");
  m.def(
      "terminal_yield",
      [](const std::string& tree) {
        return terminal_yield(parse_bracketed(tree));
      },
      py::arg("tree"));
  m.def(
      "open_site_count",
      [](const std::string& tree) {
        return open_site_count(parse_bracketed(tree));
      },
      py::arg("tree"));
  m.def(
      "tree_depth",
      [](const std::string& tree) {
        return tree_depth(parse_bracketed(tree));
      },
      py::arg("tree"));

  // --- corpora --------------------------------------------------------
  py::class_<Corpus>(m, "Corpus", "A treebank: a multiset of parsed trees.")
      .def(py::init([](const std::vector<std::string>& lines) {
             return load_corpus(lines);
           }),
           py::arg("lines"))
      .def("__len__", &Corpus::size)
      .def("multiplicity",
           [](const Corpus& c, const std::string& tree) {
             return c.multiplicity(parse_bracketed(tree));
           },
           py::arg("tree"))
      .def_property_readonly("trees",
                             [](const Corpus& c) {
                               std::vector<std::string> out;
                               out.reserve(c.trees.size());
                               for (const Tree& t : c.trees)
                                 out.push_back(serialize_tree(t));
                               return out;
                             })
      .def("__repr__", [](const Corpus& c) {
        return "Corpus(" + std::to_string(c.size()) + " trees)";
      });
  m.def("load_corpus_file", &load_corpus_file, py::arg("path"));

  // --- fragments ------------------------------------------------------
  py::class_<FragmentBag>(m, "FragmentBag",
                          "Multiset of grammar fragments with exact counts.")
      .def("root_total", &FragmentBag::root_total, py::arg("label"))
      .def("count_of",
           [](const FragmentBag& bag, const std::string& tree) {
             return bag.count_of(parse_bracketed(tree));
           },
           py::arg("fragment"))
      .def_property_readonly("distinct", &FragmentBag::distinct)
      .def_property_readonly("total_count", &FragmentBag::total_count)
      .def("items",
           [](const FragmentBag& bag) {
             py::list out;
             for (const auto& [key, entry] : bag.fragments)
               out.append(py::make_tuple(key, entry.count));
             return out;
           })
      .def("to_tsv", &bag_to_tsv)
      .def("__len__", &FragmentBag::distinct)
      .def("__repr__", [](const FragmentBag& bag) {
        return "FragmentBag(" + std::to_string(bag.distinct()) +
               " distinct, total " + std::to_string(bag.total_count()) + ")";
      });

  m.def(
      "extract_fragments",
      [](const Corpus& corpus, std::optional<int> max_depth,
         std::optional<int> max_sites,
         std::optional<std::set<std::string>> roots, int min_count,
         std::optional<int> hapax_min_depth,
         std::optional<std::string> start) {
        return corpus_fragments(
            corpus,
            make_filter(max_depth, max_sites, std::move(roots), min_count,
                        hapax_min_depth),
            std::move(start));
      },
      py::arg("corpus"), py::kw_only(), py::arg("max_depth") = std::nullopt,
      py::arg("max_sites") = std::nullopt, py::arg("roots") = std::nullopt,
      py::arg("min_count") = 1, py::arg("hapax_min_depth") = std::nullopt,
      py::arg("start") = std::nullopt,
      "Extract every fragment of every corpus tree, then filter.");

  // --- grammars -------------------------------------------------------
  py::class_<Stsg, std::shared_ptr<Stsg>>(
      m, "Grammar",
      "Stochastic tree-substitution grammar with exact probabilities.")
      .def_property_readonly(
          "start", [](const Stsg& g) { return g.start.text; })
      .def("__len__", &Stsg::size)
      .def("prob",
           [](const Stsg& g, const std::string& tree) {
             const int id = g.find(parse_bracketed(tree));
             return id < 0 ? as_fraction(Rational(0))
                           : as_fraction(g.at(id).prob);
           },
           py::arg("tree"),
           "Probability of an elementary tree, 0 if absent.")
      .def("count",
           [](const Stsg& g, const std::string& tree) {
             const int id = g.find(parse_bracketed(tree));
             return id < 0 ? 0 : g.at(id).count;
           },
           py::arg("tree"))
      .def("trees",
           [](const Stsg& g) {
             py::list out;
             for (const auto& e : g.trees)
               out.append(
                   py::make_tuple(e.key, e.count, as_fraction(e.prob)));
             return out;
           },
           "All elementary trees as (tree, count, prob), id order.")
      .def("to_tsv", &grammar_to_tsv)
      .def("__repr__", [](const Stsg& g) {
        return "Grammar(start='" + g.start.text + "', " +
               std::to_string(g.size()) + " trees)";
      });

  m.def(
      "project_grammar",
      [](const FragmentBag& bag, const std::string& start) {
        return std::make_shared<Stsg>(
            project_stsg(bag, Label{start, SymbolKind::Nonterminal}));
      },
      py::arg("bag"), py::arg("start"));
  m.def(
      "grammar_from_tsv",
      [](const std::string& text) {
        return std::make_shared<Stsg>(grammar_from_tsv(text));
      },
      py::arg("text"));
  m.def(
      "load_grammar",
      [](const std::string& path) {
        return std::make_shared<Stsg>(load_grammar(path));
      },
      py::arg("path"));
  m.def("save_grammar",
        [](const std::shared_ptr<Stsg>& g, const std::string& path) {
          save_grammar(*g, path);
        },
        py::arg("grammar"), py::arg("path"));

  // --- derivations ----------------------------------------------------
  m.def(
      "compose",
      [](const std::string& t, const std::string& u) {
        return serialize_tree(compose(parse_bracketed(t), parse_bracketed(u)));
      },
      py::arg("t"), py::arg("u"),
      "Leftmost composition: substitute u at t's leftmost open site.");
  m.def(
      "derive",
      [](const std::vector<std::string>& steps) {
        return serialize_tree(derive(steps_from(steps)));
      },
      py::arg("steps"));
  m.def(
      "derivation_probability",
      [](const std::shared_ptr<Stsg>& g, const std::vector<std::string>& steps) {
        return as_fraction(derivation_probability(*g, steps_from(steps)));
      },
      py::arg("grammar"), py::arg("steps"));
  m.def(
      "enumerate_derivations",
      [](const std::shared_ptr<Stsg>& g, const std::vector<std::string>& sentence,
         std::int64_t cap) {
        return pairs_to_py(enumerate_derivations(*g, sentence, cap));
      },
      py::arg("grammar"), py::arg("sentence"), py::arg("cap") = 100000,
      "Backtracking oracle: every leftmost derivation of the sentence.");
  m.def(
      "parse_probability",
      [](const std::shared_ptr<Stsg>& g, const std::string& tree) {
        return as_fraction(exact_parse_probability(*g, parse_bracketed(tree)));
      },
      py::arg("grammar"), py::arg("tree"),
      "Exact probability of a parse: the sum over its derivations.");

  // --- charts and disambiguation --------------------------------------
  py::class_<ParseDistribution>(
      m, "ParseDistribution",
      "Monte Carlo tally of sampled derivations grouped by parse tree.")
      .def_property_readonly(
          "samples", [](const ParseDistribution& d) { return d.samples; })
      .def_property_readonly(
          "sigma_bound",
          [](const ParseDistribution& d) { return d.sigma_bound; })
      .def_property_readonly(
          "seed", [](const ParseDistribution& d) { return d.seed; })
      .def("estimate", &ParseDistribution::estimate, py::arg("tree"))
      .def("items",
           [](const ParseDistribution& d) {
             std::vector<std::pair<std::string, std::int64_t>> rows;
             for (const auto& [key, item] : d.counts)
               rows.emplace_back(key, item.count);
             std::sort(rows.begin(), rows.end(), [](const auto& a,
                                                    const auto& b) {
               if (a.second != b.second) return a.second > b.second;
               return a.first < b.first;
             });
             py::list out;
             for (const auto& [key, count] : rows)
               out.append(py::make_tuple(key, count));
             return out;
           },
           "(tree, count) pairs, most sampled first.")
      .def("top",
           [](const ParseDistribution& d, double tie_width) {
             std::vector<std::string> out;
             for (const Tree& t : select_top_parses(d, tie_width))
               out.push_back(serialize_tree(t));
             return out;
           },
           py::arg("tie_width") = 0.0)
      .def("to_tsv", &distribution_to_tsv)
      .def("__repr__", [](const ParseDistribution& d) {
        return "ParseDistribution(" + std::to_string(d.samples) +
               " samples, " + std::to_string(d.counts.size()) + " parses)";
      });

  py::class_<DerivationForest>(
      m, "Forest",
      "Packed derivation forest for one sentence under one grammar.")
      .def_property_readonly("has_parse", &DerivationForest::has_parse)
      .def_property_readonly(
          "sentence",
          [](const DerivationForest& f) { return f.sentence; })
      .def("dump", &dump_forest)
      .def("derivations",
           [](const DerivationForest& f, std::int64_t cap) {
             return pairs_to_py(unpack_forest(f, cap));
           },
           py::arg("cap") = 100000,
           "Every derivation in the forest with its probability.")
      .def("best_derivation",
           [](const DerivationForest& f) {
             const auto [steps, prob] = most_probable_derivation(f);
             return py::make_tuple(steps_to(steps), as_fraction(prob));
           },
           "Viterbi: (steps, probability) of the most probable derivation.")
      .def("best_parse",
           [](const DerivationForest& f) {
             const auto [steps, prob] = most_probable_derivation(f);
             return py::make_tuple(serialize_tree(derive(steps)),
                                   as_fraction(prob));
           },
           "Tree derived by the most probable derivation.")
      .def("exact_parse_masses",
           [](const DerivationForest& f, std::int64_t cap) {
             py::list out;
             for (const auto& [tree, mass] : exact_parse_masses(f, cap))
               out.append(
                   py::make_tuple(serialize_tree(tree), as_fraction(mass)));
             return out;
           },
           py::arg("cap") = 100000,
           "(tree, mass) pairs, heaviest parse first.")
      .def("sample_distribution",
           [](const DerivationForest& f, std::optional<std::int64_t> samples,
              std::optional<double> sigma, std::uint64_t seed,
              const std::string& scheme) {
             const InsideMasses masses = compute_inside(f);
             if (samples.has_value() == sigma.has_value())
               throw py::value_error(
                   "pass exactly one of samples= or sigma=");
             if (samples)
               return estimate_parse_distribution(f, masses, *samples, seed,
                                                  scheme_from(scheme));
             return estimate_parse_distribution(f, masses, *sigma, seed,
                                                scheme_from(scheme));
           },
           py::kw_only(), py::arg("samples") = std::nullopt,
           py::arg("sigma") = std::nullopt, py::arg("seed"),
           py::arg("scheme") = "top-down",
           "Monte Carlo parse distribution from repeated forest sampling.")
      .def("__repr__", [](const DerivationForest& f) {
        return "Forest(" + std::to_string(f.sentence.size()) + " words, " +
               std::to_string(f.entries.size()) + " entries" +
               (f.has_parse() ? "" : ", no parse") + ")";
      });

  m.def(
      "parse",
      [](const std::shared_ptr<Stsg>& g, const std::vector<std::string>& sentence) {
        return build_forest(g, sentence);
      },
      py::arg("grammar"), py::arg("sentence"),
      "Chart-parse the sentence into a packed derivation forest.");

  m.def("samples_for_sigma", &samples_for_sigma, py::arg("sigma_max"));
  m.def("mc_error_bound", &mc_error_bound, py::arg("masses"), py::arg("n"),
        "Bound on the chance N samples miss the most probable parse.");
  m.def("mix_seed", &mix_seed, py::arg("seed"), py::arg("index"));

  // --- evaluation -----------------------------------------------------
  m.def(
      "binarize",
      [](const std::string& tree) {
        return serialize_tree(binarize(parse_bracketed(tree)));
      },
      py::arg("tree"));
  m.def(
      "brackets",
      [](const std::string& tree) {
        return brackets_of(parse_bracketed(tree));
      },
      py::arg("tree"), "Spans of width >= 2 over leaf positions.");

  py::class_<AccuracyReport>(m, "AccuracyReport")
      .def_readonly("parse_accuracy", &AccuracyReport::parse_accuracy)
      .def_readonly("sentence_accuracy", &AccuracyReport::sentence_accuracy)
      .def_readonly("bracketing_accuracy",
                    &AccuracyReport::bracketing_accuracy)
      .def_readonly("coverage", &AccuracyReport::coverage)
      .def_readonly("n_test", &AccuracyReport::n_test)
      .def_readonly("filter_id", &AccuracyReport::filter_id)
      .def_readonly("mode", &AccuracyReport::mode)
      .def_readonly("samples", &AccuracyReport::samples)
      .def_readonly("seed", &AccuracyReport::seed)
      .def("__repr__", [](const AccuracyReport& r) {
        char buf[128];
        std::snprintf(buf, sizeof buf,
                      "AccuracyReport(parse=%.2f, sentence=%.2f, "
                      "bracketing=%.2f, coverage=%.2f, n=%d)",
                      r.parse_accuracy, r.sentence_accuracy,
                      r.bracketing_accuracy, r.coverage, r.n_test);
        return std::string(buf);
      });

  m.def(
      "score",
      [](const std::vector<std::optional<std::string>>& candidates,
         const std::vector<std::string>& golds) {
        std::vector<std::optional<Tree>> cand;
        cand.reserve(candidates.size());
        for (const auto& text : candidates)
          cand.push_back(text ? std::optional<Tree>(parse_bracketed(*text))
                              : std::nullopt);
        std::vector<Tree> gold;
        gold.reserve(golds.size());
        for (const std::string& text : golds)
          gold.push_back(parse_bracketed(text));
        return score(cand, gold);
      },
      py::arg("candidates"), py::arg("golds"),
      "Bracket scoring; a None candidate counts as an unparsed sentence.");

  m.def(
      "split_corpus",
      [](const Corpus& corpus, double train_fraction, std::uint64_t seed) {
        return split_corpus(corpus, SplitSpec{train_fraction, seed});
      },
      py::arg("corpus"), py::arg("train_fraction") = 0.9, py::arg("seed") = 0,
      "Deterministic shuffle split; returns (train, test).");

  m.def(
      "run_experiment",
      [](const Corpus& corpus, double train_fraction, std::uint64_t split_seed,
         const std::vector<py::dict>& grid, const std::string& mode,
         std::optional<double> sigma, std::optional<std::int64_t> samples,
         std::int64_t cap, double tie_width, std::uint64_t seed, int jobs) {
        std::vector<FragmentFilter> filters;
        for (const py::dict& spec : grid) {
          FragmentFilter f;
          for (const auto& [key_obj, value] : spec) {
            const std::string key = py::cast<std::string>(key_obj);
            if (key == "max_depth")
              f.max_depth = py::cast<std::optional<int>>(value);
            else if (key == "max_sites")
              f.max_sites = py::cast<std::optional<int>>(value);
            else if (key == "roots")
              f.roots = py::cast<std::optional<std::set<std::string>>>(value);
            else if (key == "min_count")
              f.min_count = py::cast<int>(value);
            else if (key == "hapax_min_depth")
              f.hapax_min_depth = py::cast<std::optional<int>>(value);
            else
              throw py::value_error("unknown filter key: " + key);
          }
          filters.push_back(std::move(f));
        }
        if (filters.empty()) filters.push_back(FragmentFilter{});
        const DisambigMode m2 = make_mode(mode, sigma, samples, cap, tie_width);
        std::vector<AccuracyReport> reports;
        {
          py::gil_scoped_release release;
          reports = run_experiment(corpus, SplitSpec{train_fraction, split_seed},
                                   filters, m2, seed, jobs);
        }
        return reports;
      },
      py::arg("corpus"), py::kw_only(), py::arg("train_fraction") = 0.9,
      py::arg("split_seed") = 0, py::arg("grid") = std::vector<py::dict>{},
      py::arg("mode") = "mpd", py::arg("sigma") = std::nullopt,
      py::arg("samples") = std::nullopt, py::arg("cap") = 100000,
      py::arg("tie_width") = 0.0, py::arg("seed") = 0, py::arg("jobs") = 1,
      "Split, extract, parse, disambiguate, and score one filter grid.");

  m.def("reports_to_tsv", &reports_to_tsv, py::arg("reports"));
}

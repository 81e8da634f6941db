"""Tree-substitution grammar engine.

Extract fragments from a treebank, project a probabilistic grammar, parse
sentences into packed derivation forests, pick parses by most probable
derivation or most probable parse (exact or Monte Carlo), and score the
results against held-out trees.

Trees are passed as bracketed strings such as
``(S (NP Mary) (VP (V likes) (NP Susan)))``; probabilities come back as
:class:`fractions.Fraction`.
"""

from dopkit._core import (
    AccuracyReport,
    BracketError,
    CapExceeded,
    ComposeError,
    Corpus,
    CorpusError,
    Error,
    EvalError,
    Forest,
    FragmentBag,
    Grammar,
    GrammarError,
    NoParse,
    ParseDistribution,
    UnknownTerminal,
    __version__,
    binarize,
    brackets,
    compose,
    derivation_probability,
    derive,
    enumerate_derivations,
    extract_fragments,
    grammar_from_tsv,
    load_corpus_file,
    load_grammar,
    mc_error_bound,
    mix_seed,
    open_site_count,
    parse,
    parse_probability,
    parse_tree,
    project_grammar,
    reports_to_tsv,
    run_experiment,
    samples_for_sigma,
    save_grammar,
    score,
    split_corpus,
    terminal_yield,
    tree_depth,
)

__all__ = [
    "AccuracyReport",
    "BracketError",
    "CapExceeded",
    "ComposeError",
    "Corpus",
    "CorpusError",
    "Error",
    "EvalError",
    "Forest",
    "FragmentBag",
    "Grammar",
    "GrammarError",
    "NoParse",
    "ParseDistribution",
    "UnknownTerminal",
    "__version__",
    "binarize",
    "brackets",
    "compose",
    "derivation_probability",
    "derive",
    "enumerate_derivations",
    "extract_fragments",
    "grammar_from_tsv",
    "load_corpus_file",
    "load_grammar",
    "mc_error_bound",
    "mix_seed",
    "open_site_count",
    "parse",
    "parse_probability",
    "parse_tree",
    "project_grammar",
    "reports_to_tsv",
    "run_experiment",
    "samples_for_sigma",
    "save_grammar",
    "score",
    "split_corpus",
    "terminal_yield",
    "tree_depth",
]

#!/usr/bin/env python3
"""Regenerate data/synthetic-200.mrg, the bundled treebank used by the
evaluation regression tests.

The corpus is fully deterministic (fixed seed, no time-based state): 200
binary-or-wider bracketed trees over a small PP-attachment grammar, with
sentences of at most eight tokens and no unary nonterminal chains.
"""

import argparse
import random

NOUNS = ["dog", "cat", "man", "woman", "park", "telescope", "bone", "bird"]
VERBS = ["saw", "liked", "chased", "found"]
DETS = ["the", "a"]
PREPS = ["in", "with", "near"]


def make_trees(rng, count):
    def np(allow_pp):
        base = f"(NP (D {rng.choice(DETS)}) (N {rng.choice(NOUNS)}))"
        if allow_pp and rng.random() < 0.35:
            inner = np(False)
            return base[:-1] + f" (PP (P {rng.choice(PREPS)}) {inner}))"
        return base

    def sentence():
        subj = np(False)
        verb = rng.choice(VERBS)
        roll = rng.random()
        if roll < 0.4:
            vp = f"(VP (V {verb}) {np(True)})"
        elif roll < 0.7:
            pp = f"(PP (P {rng.choice(PREPS)}) {np(False)})"
            vp = f"(VP (V {verb}) {np(False)} {pp})"
        else:
            vp = f"(VP (V {verb}) {np(False)})"
        return f"(S {subj} {vp})"

    return [sentence() for _ in range(count)]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="data/synthetic-200.mrg")
    parser.add_argument("--count", type=int, default=200)
    parser.add_argument("--seed", type=int, default=914032)
    args = parser.parse_args()

    trees = make_trees(random.Random(args.seed), args.count)
    with open(args.out, "w") as handle:
        handle.write("\n".join(trees) + "\n")
    print(f"wrote {len(trees)} trees to {args.out}")


if __name__ == "__main__":
    main()

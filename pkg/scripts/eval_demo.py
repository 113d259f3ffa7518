#!/usr/bin/env python3
"""Score controlled corruptions of synthesized narratives to show how each metric reacts."""

from __future__ import annotations

import argparse
import random
import re

from slideanim.config import SynthConfig
from slideanim.grammar import narrative_sentence
from slideanim.metrics import METRIC_COLUMNS, evaluate_corpus
from slideanim.synthesizer import derive_seed, synth_scheme, synth_slide


def sentences(plan):
    k = len(plan.steps)
    return [narrative_sentence(s, i, k) for i, s in enumerate(plan.steps)]


def corrupt(sents, mode, rng):
    if mode == "identity":
        return sents
    if mode == "reverse":
        return sents[::-1]
    if mode == "shuffle":
        out = list(sents)
        rng.shuffle(out)
        return out
    if mode == "drop_half":
        return sents[: len(sents) // 2]
    if mode == "wrong_durations":
        double = lambda m: f"over {2 * float(m[1]):.1f} seconds"  # noqa: E731
        return [re.sub(r"over (\d+(?:\.\d+)?) seconds", double, s) for s in sents]
    raise ValueError(mode)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--seed", type=int, default=5)
    args = ap.parse_args()

    cfg = SynthConfig(render=False)
    refs = []
    for i in range(args.n):
        slide = synth_slide(derive_seed(args.seed, 0, i), cfg, f"slide_{i:04d}", "en")
        refs.append(sentences(synth_scheme(derive_seed(args.seed, 1, i, 0), slide, cfg)))

    modes = ["identity", "reverse", "shuffle", "drop_half", "wrong_durations"]
    print(f"{'mode':<16}" + "".join(f"{c:>14}" for c in METRIC_COLUMNS))
    for mode in modes:
        rng = random.Random(args.seed)
        pairs = [(" ".join(corrupt(r, mode, rng)), " ".join(r)) for r in refs]
        means = evaluate_corpus(pairs).means
        print(f"{mode:<16}" + "".join(f"{means[c]:>14.4f}" for c in METRIC_COLUMNS))


if __name__ == "__main__":
    main()

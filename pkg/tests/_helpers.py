"""Shared fixtures-by-function and brute-force oracles for the test suite."""

from __future__ import annotations

import itertools
import math

from slideanim.config import SynthConfig
from slideanim.core_model import AnimationPlan, AnimationStep, Element, SlideSpec
from slideanim.synthesizer import derive_seed, synth_scheme, synth_slide

_CFG = SynthConfig(n_slides=1, schemes_per_slide=1, render=False)


def make_slide(slide_id: str = "s", n_images: int = 2, body: bool = True, language: str = "en") -> SlideSpec:
    els = [Element("Title", "title", 40, 20, 1200, 100, "Quarterly Review")]
    if body:
        els.append(Element("Body", "body", 40, 140, 560, 540, "Revenue grew in every region."))
    for i in range(n_images):
        els.append(Element(f"Img{i + 1}", "image", 640 + (i % 2) * 300, 140 + (i // 2) * 280, 280, 260, f"pool/k/{i:02d}.jpg"))
    return SlideSpec(slide_id, language, (1280, 720), tuple(els))


def step(i, cat, el, effect, direction=None, dur=1.0, delay=0.0, rep=1) -> AnimationStep:
    return AnimationStep(i, cat, el, effect, direction, dur, delay, rep)


def synth_pairs(n: int, seed: int = 11, config: SynthConfig = _CFG, min_steps: int = 0):
    """First ``n`` synthesized (slide, plan) pairs with at least ``min_steps`` steps."""
    out = []
    i = 0
    while len(out) < n:
        slide = synth_slide(derive_seed(seed, 0, i), config, f"slide_{i:04d}", "en" if i % 2 else "zh")
        plan = synth_scheme(derive_seed(seed, 1, i, 0), slide, config)
        if len(plan.steps) >= min_steps:
            out.append((slide, plan))
        i += 1
    return out


def reversed_plan(plan: AnimationPlan) -> AnimationPlan:
    return AnimationPlan(plan.slide_id, tuple(reversed(plan.steps)))


# ---------------------------------------------------------------- oracles

def count_occurrences(seq, gram) -> int:
    n = len(gram)
    return sum(1 for i in range(len(seq) - n + 1) if tuple(seq[i : i + n]) == tuple(gram))


def oracle_bleu4(cand, refs) -> float:
    c = len(cand)
    if c == 0:
        return 0.0
    logs = 0.0
    for n in range(1, 5):
        total = c - n + 1
        if total <= 0:
            return 0.0
        seen = []
        matched = 0
        for i in range(total):
            g = tuple(cand[i : i + n])
            if g in seen:
                continue
            seen.append(g)
            cap = max(count_occurrences(r, g) for r in refs)
            matched += min(count_occurrences(cand, g), cap)
        if matched == 0:
            return 0.0
        logs += 0.25 * math.log(matched / total)
    best = None
    for r in refs:
        key = (abs(len(r) - c), len(r))
        if best is None or key < best[0]:
            best = (key, len(r))
    r = best[1]
    bp = 1.0 if c > r else math.exp(1 - r / c)
    return bp * math.exp(logs)


def oracle_rouge_n(cand, ref, n) -> float:
    grams = []
    for i in range(len(ref) - n + 1):
        g = tuple(ref[i : i + n])
        if g not in grams:
            grams.append(g)
    total = max(len(ref) - n + 1, 0)
    if total == 0:
        return 0.0
    return sum(min(count_occurrences(ref, g), count_occurrences(cand, g)) for g in grams) / total


def is_subsequence(sub, seq) -> bool:
    it = iter(seq)
    return all(any(x == y for y in it) for x in sub)


def oracle_lcs(a, b) -> int:
    """Largest subset of ``a`` (by index) that is a subsequence of ``b``."""
    for k in range(len(a), 0, -1):
        for idx in itertools.combinations(range(len(a)), k):
            if is_subsequence([a[i] for i in idx], b):
                return k
    return 0


def oracle_coda_pairs(pred, ref):
    """k-th reference occurrence of a key pairs with the k-th prediction occurrence."""
    pairs = []
    for i, r in enumerate(ref):
        k = sum(1 for x in ref[:i] if x.key == r.key)
        hits = [j for j, p in enumerate(pred) if p.key == r.key]
        if k < len(hits):
            pairs.append((i, hits[k]))
    return pairs


def oracle_chain(pairs) -> int:
    """Largest subset of pairs increasing in both coordinates, by enumeration."""
    for k in range(len(pairs), 0, -1):
        for sub in itertools.combinations(pairs, k):
            if all(a[0] < b[0] and a[1] < b[1] for a, b in zip(sub, sub[1:])):
                return k
    return 0


def oracle_detail(r, p) -> float:
    fields = ("effect", "direction", "duration_s", "delay_s", "repeat")
    checks = []
    for f in fields:
        a, b = getattr(r, f), getattr(p, f)
        if a is None or b is None:
            continue
        checks.append(abs(a - b) <= 0.05 + 1e-9 if f.endswith("_s") else a == b)
    if len(checks) == sum(checks):
        return 1.0
    return 0.5 if any(checks) else 0.0


def oracle_coda(pred, ref):
    pairs = oracle_coda_pairs(pred, ref)
    n = len(ref)
    cov = len(pairs) / n if n else 0.0
    order = oracle_chain(pairs) / n if n else 1.0
    ds = [oracle_detail(ref[i], pred[j]) for i, j in pairs]
    return cov, order, (sum(ds) / len(ds) if ds else 0.0)

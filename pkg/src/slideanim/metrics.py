"""BLEU-4, ROUGE-1/2/L, tuple-based SPICE and CODA (coverage / order / detail)."""

from __future__ import annotations

import bisect
import csv
import io
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .grammar import ActionUnit, extract_action_units

SECONDS_TOL = 0.05

# ---------------------------------------------------------------- tokens

_EDGE_PUNCT = re.compile(r"^[^\w]+|[^\w]+$", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace, strip punctuation from token edges.

    Interior punctuation survives, so "1.5" stays one token.
    """
    out = []
    for raw in text.lower().split():
        tok = _EDGE_PUNCT.sub("", raw)
        if tok:
            out.append(tok)
    return out


def ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


# ---------------------------------------------------------------- BLEU

@dataclass(frozen=True)
class BleuBreakdown:
    precisions: tuple[float, ...]
    weights: tuple[float, ...]
    bp: float
    c: int
    r: int
    score: float
    matches: tuple[int, ...] = ()
    totals: tuple[int, ...] = ()


def closest_ref_length(c: int, ref_lengths: Sequence[int]) -> int:
    # ties go to the shorter reference
    return min(ref_lengths, key=lambda r: (abs(r - c), r))


def brevity_penalty(c: int, r: int) -> float:
    if c == 0:
        return 0.0
    return 1.0 if c > r else math.exp(1 - r / c)


def bleu4(candidate: Sequence[str], references: Sequence[Sequence[str]], weights=(0.25, 0.25, 0.25, 0.25)) -> BleuBreakdown:
    """Unsmoothed BLEU: any zero n-gram precision gives a zero score.

    An empty candidate scores 0 with the brevity penalty guarded to 0.
    """
    if not references:
        raise ValueError("bleu4 needs at least one reference")
    c = len(candidate)
    r = closest_ref_length(c, [len(ref) for ref in references])
    matches, totals, precisions = [], [], []
    for n in range(1, len(weights) + 1):
        cand = ngrams(candidate, n)
        max_ref: Counter = Counter()
        for ref in references:
            for g, cnt in ngrams(ref, n).items():
                if cnt > max_ref[g]:
                    max_ref[g] = cnt
        m = sum(min(cnt, max_ref[g]) for g, cnt in cand.items())
        t = sum(cand.values())
        matches.append(m)
        totals.append(t)
        precisions.append(m / t if t else 0.0)
    bp = brevity_penalty(c, r)
    if c == 0 or any(p == 0 for p in precisions):
        score = 0.0
    else:
        score = bp * math.exp(sum(w * math.log(p) for w, p in zip(weights, precisions)))
    return BleuBreakdown(tuple(precisions), tuple(weights), bp, c, r, score, tuple(matches), tuple(totals))


# ---------------------------------------------------------------- ROUGE

@dataclass(frozen=True)
class RougeBreakdown:
    variant: str
    matched: int
    total: int
    score: float
    lcs: int | None = None
    degenerate: bool = False


def lcs_length(a: Sequence, b: Sequence) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge(candidate: Sequence[str], reference: Sequence[str], variant="L") -> RougeBreakdown:
    """Recall-oriented ROUGE-N (variant 1, 2, ...) or ROUGE-L = LCS / |reference|."""
    variant = str(variant).upper()
    if variant == "L":
        lcs = lcs_length(reference, candidate)
        total = len(reference)
        if total == 0:
            return RougeBreakdown("L", 0, 0, 0.0, 0, degenerate=True)
        return RougeBreakdown("L", lcs, total, lcs / total, lcs)
    n = int(variant)
    ref = ngrams(reference, n)
    cand = ngrams(candidate, n)
    total = sum(ref.values())
    if total == 0:
        return RougeBreakdown(variant, 0, 0, 0.0, degenerate=True)
    matched = sum(min(cnt, cand[g]) for g, cnt in ref.items())
    return RougeBreakdown(variant, matched, total, matched / total)


# ---------------------------------------------------------------- SPICE (tuples)

@dataclass(frozen=True)
class SpiceBreakdown:
    candidate: frozenset
    reference: frozenset
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float


def f1_score(precision: float, recall: float) -> float:
    return 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)


def unit_tuples(unit: ActionUnit) -> set[tuple]:
    """Scene-graph stand-in: object, object-category, object-category-effect, attributes."""
    el = unit.element
    out = {(el,), (el, unit.category)}
    if unit.effect is not None:
        out.add((el, unit.category, unit.effect))
    if unit.direction is not None:
        out.add((el, "direction", unit.direction))
    if unit.duration_s is not None:
        out.add((el, "duration", round(unit.duration_s, 2)))
    if unit.delay_s is not None:
        out.add((el, "delay", round(unit.delay_s, 2)))
    if unit.repeat is not None:
        out.add((el, "repeat", unit.repeat))
    return out


def tuple_f1(cand: set, ref: set) -> SpiceBreakdown:
    tp = len(cand & ref)
    fp = len(cand - ref)
    fn = len(ref - cand)
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    return SpiceBreakdown(frozenset(cand), frozenset(ref), tp, fp, fn, p, r, f1_score(p, r))


def spice_lite(candidate: Sequence[ActionUnit], reference: Sequence[ActionUnit]) -> SpiceBreakdown:
    cand = set().union(*(unit_tuples(u) for u in candidate)) if candidate else set()
    ref = set().union(*(unit_tuples(u) for u in reference)) if reference else set()
    return tuple_f1(cand, ref)


# ---------------------------------------------------------------- CODA

@dataclass(frozen=True)
class CodaBreakdown:
    m: int
    n: int
    pairs: tuple[tuple[int, int], ...]  # (reference index, prediction index), 0-based
    lcs: int
    coverage: float
    order: float
    detail: float
    pair_details: tuple[float, ...] = ()


def coda_match(prediction: Sequence[ActionUnit], reference: Sequence[ActionUnit]) -> list[tuple[int, int]]:
    """Left-to-right: each reference unit takes the earliest unused prediction with
    the same (element, category). Effect and parameters do not gate matching."""
    free: dict[tuple, list[int]] = {}
    for j, p in enumerate(prediction):
        free.setdefault(p.key, []).append(j)
    pairs = []
    for i, r in enumerate(reference):
        queue = free.get(r.key)
        if queue:
            pairs.append((i, queue.pop(0)))
    return pairs


def longest_increasing_run(seq: Sequence[int]) -> int:
    """Length of the longest strictly increasing subsequence (patience sorting)."""
    tails: list[int] = []
    for x in seq:
        k = bisect.bisect_left(tails, x)
        if k == len(tails):
            tails.append(x)
        else:
            tails[k] = x
    return len(tails)


def _seconds_equal(a: float, b: float) -> bool:
    return abs(a - b) <= SECONDS_TOL + 1e-9


def pair_detail(ref: ActionUnit, pred: ActionUnit) -> float:
    """1 when every comparable parameter agrees, 0.5 for some, 0 for none.

    Parameters absent on either side are not compared; with nothing comparable the
    pair counts as a perfect match.
    """
    checks = []
    if ref.effect is not None and pred.effect is not None:
        checks.append(ref.effect == pred.effect)
    if ref.direction is not None and pred.direction is not None:
        checks.append(ref.direction == pred.direction)
    if ref.duration_s is not None and pred.duration_s is not None:
        checks.append(_seconds_equal(ref.duration_s, pred.duration_s))
    if ref.delay_s is not None and pred.delay_s is not None:
        checks.append(_seconds_equal(ref.delay_s, pred.delay_s))
    if ref.repeat is not None and pred.repeat is not None:
        checks.append(ref.repeat == pred.repeat)
    if all(checks):
        return 1.0
    return 0.5 if any(checks) else 0.0


def coda_score(prediction: Sequence[ActionUnit], reference: Sequence[ActionUnit]) -> CodaBreakdown:
    n = len(reference)
    pairs = coda_match(prediction, reference)
    # pairs are already in reference order; order = LIS over their prediction indices
    lcs = longest_increasing_run([j for _, j in pairs])
    details = tuple(pair_detail(reference[i], prediction[j]) for i, j in pairs)
    coverage = len(pairs) / n if n else 0.0
    order = lcs / n if n else 1.0
    detail = sum(details) / len(details) if details else 0.0
    return CodaBreakdown(len(prediction), n, tuple(pairs), lcs, coverage, order, detail, details)


# ---------------------------------------------------------------- corpus

METRIC_COLUMNS = (
    "bleu4",
    "rouge1",
    "rouge2",
    "rougeL",
    "spice",
    "coda_coverage",
    "coda_order",
    "coda_detail",
)


@dataclass
class PairResult:
    index: int
    scores: dict[str, float] | None
    error: str | None = None
    bleu: BleuBreakdown | None = None
    rouge: dict[str, RougeBreakdown] | None = None
    spice: SpiceBreakdown | None = None
    coda: CodaBreakdown | None = None


@dataclass
class MetricReport:
    pairs: list[PairResult]
    means: dict[str, float]
    n_pairs: int
    n_scored: int
    n_failed: int
    config: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("pair",) + METRIC_COLUMNS + ("error",))
        for p in self.pairs:
            if p.scores is None:
                w.writerow((p.index,) + ("",) * len(METRIC_COLUMNS) + (p.error,))
            else:
                w.writerow((p.index,) + tuple(f"{p.scores[c]:.6f}" for c in METRIC_COLUMNS) + ("",))
        return buf.getvalue()

    def summary(self) -> str:
        lines = [
            f"pairs: {self.n_pairs}",
            f"scored: {self.n_scored}",
            f"failed: {self.n_failed}",
        ]
        lines += [f"{k}: {v}" for k, v in sorted(self.config.items())]
        lines += [f"mean_{c}: {self.means.get(c, float('nan')):.6f}" for c in METRIC_COLUMNS]
        return "\n".join(lines) + "\n"

    def write(self, out_dir: str | Path) -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path, txt_path = out / "metrics.csv", out / "summary.txt"
        csv_path.write_text(self.to_csv(), encoding="utf-8")
        txt_path.write_text(self.summary(), encoding="utf-8")
        return csv_path, txt_path


def score_pair(prediction: str, reference: str, element_names=None) -> PairResult:
    pt, rt = tokenize(prediction), tokenize(reference)
    bleu = bleu4(pt, [rt])
    rouges = {v: rouge(pt, rt, v) for v in ("1", "2", "L")}
    pu = extract_action_units(prediction, element_names)
    ru = extract_action_units(reference, element_names)
    spice = spice_lite(pu, ru)
    coda = coda_score(pu, ru)
    scores = {
        "bleu4": bleu.score,
        "rouge1": rouges["1"].score,
        "rouge2": rouges["2"].score,
        "rougeL": rouges["L"].score,
        "spice": spice.f1,
        "coda_coverage": coda.coverage,
        "coda_order": coda.order,
        "coda_detail": coda.detail,
    }
    return PairResult(0, scores, None, bleu, rouges, spice, coda)


def evaluate_corpus(pairs: Sequence[tuple[str, str]], repetitions: int = 1, element_names=None) -> MetricReport:
    """Score (prediction, reference) pairs; failed pairs are counted and left out of the means."""
    if not pairs:
        raise ValueError("evaluate_corpus needs at least one pair")
    results = []
    for i, (pred, ref) in enumerate(pairs):
        try:
            res = score_pair(pred, ref, element_names)
            res.index = i
        except Exception as exc:  # recorded per pair
            res = PairResult(i, None, f"{type(exc).__name__}: {exc}")
        results.append(res)
    scored = [r for r in results if r.scores is not None]
    means = {c: (sum(r.scores[c] for r in scored) / len(scored) if scored else float("nan")) for c in METRIC_COLUMNS}
    config = {"tokenizer": "lower-whitespace-edgepunct", "coda_repetitions": repetitions, "bleu_smoothing": "none"}
    return MetricReport(results, means, len(results), len(scored), len(results) - len(scored), config)

#!/usr/bin/env python3
"""Synthesize the paper_default schemes (plan-only) and compare headline statistics."""

from __future__ import annotations

import argparse
import time

from slideanim.config import load_config
from slideanim.stats import dataset_stats, emit_reports
from slideanim.synthesizer import synth_dataset

# published reference values and the tolerance each is checked against
TARGETS = [
    ("mean steps per scheme", lambda s: s.mean_steps, 7.6, 0.2),
    ("animation instances", lambda s: s.total_instances, 91411, 0.05 * 91411),
    ("text entrance Box %", lambda s: s.effect_percent("entrance", "text", "Box"), 19.3, 2.0),
    ("text entrance Blinds %", lambda s: s.effect_percent("entrance", "text", "Blinds"), 15.2, 2.0),
    ("image entrance Pinwheel %", lambda s: s.effect_percent("entrance", "image", "Pinwheel"), 17.6, 2.0),
    ("text emphasis Teeter %", lambda s: s.effect_percent("emphasis", "text", "Teeter"), 33.5, 2.0),
    ("image emphasis GrowShrink %", lambda s: s.effect_percent("emphasis", "image", "GrowShrink"), 30.4, 2.0),
    ("image share of instances %", lambda s: 100 * s.image_share, 57.23, 2.0),
]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default="paper_default")
    ap.add_argument("--out", default="runs/stats_dataset")
    ap.add_argument("--reports", default="runs/stats_reports")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--svg", action="store_true")
    args = ap.parse_args()

    cfg = load_config(args.config).replace(render=False)
    t0 = time.perf_counter()
    manifest = synth_dataset(cfg, args.out, jobs=args.jobs, resume=True)
    stats = dataset_stats(manifest)
    emit_reports(stats, args.reports, svg=args.svg)
    print(f"{stats.n_schemes} schemes in {time.perf_counter() - t0:.1f}s; reports in {args.reports}")
    print(f"{'statistic':<30}{'ours':>12}{'target':>12}  ok")
    for name, get, target, tol in TARGETS:
        value = get(stats)
        print(f"{name:<30}{value:>12.3f}{target:>12.3f}  {'yes' if abs(value - target) <= tol else 'NO'}")


if __name__ == "__main__":
    main()

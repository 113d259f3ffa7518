"""Dataset statistics: effect frequencies, step-count / duration / delay histograms."""

from __future__ import annotations

import csv
import io
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .core_model import CATEGORIES, AnimationPlan, SlideSpec, variant_key
from .synthesizer import DatasetManifest

log = logging.getLogger(__name__)

REPORT_FILES = ("effect_frequencies.csv", "step_counts.csv", "durations.csv", "delays.csv", "summary.txt")


@dataclass
class DatasetStats:
    n_schemes: int = 0
    total_instances: int = 0
    category_counts: Counter = field(default_factory=Counter)
    # (category, "text"|"image") -> Counter of variant keys (e.g. FlyFromLeft)
    effects: dict[tuple[str, str], Counter] = field(default_factory=dict)
    step_counts: Counter = field(default_factory=Counter)
    durations: Counter = field(default_factory=Counter)
    delays: Counter = field(default_factory=Counter)
    kind_counts: Counter = field(default_factory=Counter)
    excluded: int = 0

    def add_plan(self, plan: AnimationPlan, kinds: dict[str, str]) -> None:
        self.n_schemes += 1
        self.step_counts[len(plan.steps)] += 1
        for s in plan.steps:
            kind = kinds.get(s.element) or _kind_from_name(s.element)
            self.total_instances += 1
            self.category_counts[s.category] += 1
            self.effects.setdefault((s.category, kind), Counter())[variant_key(s.effect, s.direction)] += 1
            self.durations[s.duration_s] += 1
            self.delays[s.delay_s] += 1
            self.kind_counts[kind] += 1

    def merge(self, other: "DatasetStats") -> "DatasetStats":
        out = DatasetStats()
        for st in (self, other):
            out.n_schemes += st.n_schemes
            out.total_instances += st.total_instances
            out.category_counts.update(st.category_counts)
            for k, c in st.effects.items():
                out.effects.setdefault(k, Counter()).update(c)
            out.step_counts.update(st.step_counts)
            out.durations.update(st.durations)
            out.delays.update(st.delays)
            out.kind_counts.update(st.kind_counts)
            out.excluded += st.excluded
        return out

    @property
    def mean_steps(self) -> float:
        return sum(k * c for k, c in self.step_counts.items()) / self.n_schemes if self.n_schemes else 0.0

    @property
    def image_share(self) -> float:
        return self.kind_counts["image"] / self.total_instances if self.total_instances else 0.0

    def effect_percent(self, category: str, kind: str, key: str) -> float:
        table = self.effects.get((category, kind), Counter())
        total = sum(table.values())
        return 100.0 * table[key] / total if total else 0.0

    def family_percent(self, category: str, kind: str, family: str) -> float:
        """Share of a family across all its directions."""
        table = self.effects.get((category, kind), Counter())
        total = sum(table.values())
        hits = sum(c for k, c in table.items() if k == family or (k.startswith(family) and k[len(family):] in ("Left", "Right", "Top", "Bottom")))
        return 100.0 * hits / total if total else 0.0


def _kind_from_name(name: str) -> str:
    return "text" if name in ("Title", "Body") else "image"


def _slide_kinds(root: Path, slide_id: str, cache: dict) -> dict[str, str]:
    if slide_id not in cache:
        try:
            slide = SlideSpec.from_dict(json.loads((root / slide_id / "slide.json").read_text(encoding="utf-8")))
            cache[slide_id] = {el.name: ("text" if el.is_text else "image") for el in slide.elements}
        except (OSError, ValueError, KeyError):
            cache[slide_id] = {}
    return cache[slide_id]


def dataset_stats(manifest: DatasetManifest | str | Path) -> DatasetStats:
    """Stream every complete record's plan; unreadable plans are tallied in ``excluded``."""
    if not isinstance(manifest, DatasetManifest):
        manifest = DatasetManifest.load(manifest)
    root = manifest.root or Path(".")
    complete = manifest.complete
    if not complete:
        raise ValueError("manifest has no complete records")
    stats = DatasetStats()
    kinds_cache: dict = {}
    # sorted so the result never depends on record order
    for rec in sorted(complete, key=lambda r: (r.slide_id, r.scheme)):
        try:
            plan = AnimationPlan.from_dict(json.loads((root / rec.plan).read_text(encoding="utf-8")))
        except (OSError, ValueError, KeyError, TypeError) as exc:
            log.warning("skipping %s: %s", rec.plan, exc)
            stats.excluded += 1
            continue
        stats.add_plan(plan, _slide_kinds(root, rec.slide_id, kinds_cache))
    return stats


# ---------------------------------------------------------------- reports

def _pct(count: int, total: int) -> str:
    return f"{100.0 * count / total:.3f}"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _effect_rows(stats: DatasetStats):
    rows = []
    for cat in CATEGORIES:
        for kind in ("text", "image"):
            table = stats.effects.get((cat, kind))
            if not table:
                continue
            total = sum(table.values())
            for key, c in sorted(table.items(), key=lambda kv: (-kv[1], kv[0])):
                rows.append((cat, kind, key, c, _pct(c, total)))
    return rows


def _hist_rows(counter: Counter, total: int, fmt=str):
    return [(fmt(k), c, _pct(c, total)) for k, c in sorted(counter.items())]


def summary_text(stats: DatasetStats) -> str:
    n = stats.total_instances
    lines = [
        f"schemes: {stats.n_schemes}",
        f"animation_instances: {n}",
        f"mean_steps_per_scheme: {stats.mean_steps:.4f}",
        f"step_range: {min(stats.step_counts)}..{max(stats.step_counts)}",
        f"image_share_percent: {100 * stats.image_share:.2f}",
        f"text_share_percent: {100 * (1 - stats.image_share):.2f}",
        f"excluded_records: {stats.excluded}",
    ]
    for cat in CATEGORIES:
        lines.append(f"{cat}_percent: {_pct(stats.category_counts[cat], n)}")
    lines.append("")
    lines.append("steps per scheme:")
    peak = max(stats.step_counts.values())
    for k in range(min(stats.step_counts), max(stats.step_counts) + 1):
        c = stats.step_counts.get(k, 0)
        lines.append(f"{k:>3} {c:>7} " + "#" * round(40 * c / peak))
    return "\n".join(lines) + "\n"


def _svg_bars(title: str, labels: list[str], values: list[float]) -> str:
    w, bar_h, pad = 640, 18, 140
    h = 40 + bar_h * len(labels)
    top = max(values) if values else 1
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">',
        f'<text x="10" y="20" font-size="14">{title}</text>',
    ]
    for i, (lab, v) in enumerate(zip(labels, values)):
        y = 30 + i * bar_h
        bw = (w - pad - 20) * v / top if top else 0
        parts.append(f'<text x="10" y="{y + 13}" font-size="11">{lab}</text>')
        parts.append(f'<rect x="{pad}" y="{y}" width="{bw:.1f}" height="{bar_h - 4}" fill="#4a78b5"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_reports(stats: DatasetStats, out_dir: str | Path, svg: bool = False) -> list[Path]:
    if stats.total_instances == 0 or stats.n_schemes == 0:
        raise ValueError("refusing to write reports for empty statistics")
    out = Path(out_dir)
    n = stats.total_instances
    files = {
        "effect_frequencies.csv": _csv(("category", "kind", "effect", "count", "percent"), _effect_rows(stats)),
        "step_counts.csv": _csv(("steps", "count", "percent"), _hist_rows(stats.step_counts, stats.n_schemes)),
        "durations.csv": _csv(("seconds", "count", "percent"), _hist_rows(stats.durations, n, lambda v: f"{v:g}")),
        "delays.csv": _csv(("seconds", "count", "percent"), _hist_rows(stats.delays, n, lambda v: f"{v:g}")),
        "summary.txt": summary_text(stats),
    }
    if svg:
        files["step_counts.svg"] = _svg_bars(
            "steps per scheme", [str(k) for k in sorted(stats.step_counts)], [stats.step_counts[k] for k in sorted(stats.step_counts)]
        )
        files["durations.svg"] = _svg_bars(
            "duration (s)", [f"{k:g}" for k in sorted(stats.durations)], [stats.durations[k] for k in sorted(stats.durations)]
        )
        files["delays.svg"] = _svg_bars(
            "delay (s)", [f"{k:g}" for k in sorted(stats.delays)], [stats.delays[k] for k in sorted(stats.delays)]
        )
    written = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        for name, text in files.items():
            path = out / name
            path.write_text(text, encoding="utf-8")
            written.append(path)
    except OSError as exc:
        raise OSError(f"writing reports to {out}: {exc}") from exc
    return written

"""Synthesis configuration and the bundled presets."""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .core_model import CATEGORIES, STEP_COUNT_RANGE, effect_kind, effect_variants, parse_variant_key

# headline effect shares (percent) per (category, text|image); unnamed mass is spread
# uniformly over the remaining variants of the category
PAPER_EFFECT_WEIGHTS: dict[str, dict[str, float]] = {
    "entrance/text": {"Box": 19.3, "Blinds": 15.2, "FlyFromTop": 15.8},
    "entrance/image": {"Pinwheel": 17.6, "FlyFromLeft": 11.9, "FlyFromTop": 11.1},
    "emphasis/text": {"Teeter": 33.5, "FlashBulb": 30.3},
    "emphasis/image": {"GrowShrink": 30.4, "Spin": 16.3},
    "exit/text": {"Wipe": 22.4, "Checkerboard": 14.1, "Fade": 17.1},
    "exit/image": {"Wipe": 22.8, "Checkerboard": 21.2, "Fade": 17.3, "FlyToBottom": 12.5, "FlyToRight": 6.5},
}

# 91,411 instances over 12,000 schemes
PAPER_MEAN_STEPS = 91411 / 12000


@dataclass
class SynthConfig:
    seed: int = 20250601
    n_slides: int = 300
    schemes_per_slide: int = 40
    mean_steps: float = PAPER_MEAN_STEPS
    step_min: int = STEP_COUNT_RANGE[0]
    step_max: int = STEP_COUNT_RANGE[1]
    # seconds -> weight
    duration_weights: dict[float, float] = field(
        default_factory=lambda: {0.5: 8, 1.0: 33, 1.5: 30, 2.0: 15, 2.5: 8, 3.0: 6}
    )
    delay_weights: dict[float, float] = field(
        default_factory=lambda: {0.0: 18, 0.5: 22, 1.0: 20, 1.5: 13, 2.0: 10, 2.5: 7, 3.0: 5, 3.5: 3, 4.0: 2}
    )
    # repeat counts for emphasis steps; entrances and exits always play once
    repeat_weights: dict[int, float] = field(default_factory=lambda: {1: 80, 2: 15, 3: 5})
    category_weights: dict[str, float] = field(
        default_factory=lambda: {"entrance": 0.40, "emphasis": 0.36, "exit": 0.24}
    )
    # relative pick weight of one element of each kind when choosing whom to animate
    kind_weights: dict[str, float] = field(default_factory=lambda: {"text": 1.0, "image": 3.3})
    title_first_prob: float = 0.7
    reenter_weight: float = 0.3
    effect_weights: dict[str, dict[str, float]] = field(
        default_factory=lambda: {k: dict(v) for k, v in PAPER_EFFECT_WEIGHTS.items()}
    )
    image_count_weights: dict[int, float] = field(default_factory=lambda: {1: 1, 2: 1, 3: 1, 4: 1})
    body_prob: float = 0.85
    language_mix: dict[str, float] = field(default_factory=lambda: {"en": 0.5, "zh": 0.5})
    fps: tuple[int, ...] = (2,)
    test_every: int = 12
    render: bool = True
    placeholder_text: bool = True
    placeholder_images: bool = True
    asset_root: str | None = None
    external_endpoint: str | None = None
    external_timeout: float = 10.0

    def __post_init__(self):
        self.duration_weights = {float(k): float(v) for k, v in self.duration_weights.items()}
        self.delay_weights = {float(k): float(v) for k, v in self.delay_weights.items()}
        self.repeat_weights = {int(k): float(v) for k, v in self.repeat_weights.items()}
        self.image_count_weights = {int(k): float(v) for k, v in self.image_count_weights.items()}
        self.fps = tuple(int(f) if float(f).is_integer() else float(f) for f in self.fps)
        self.validate()

    def validate(self) -> None:
        lo, hi = STEP_COUNT_RANGE
        if not lo <= self.step_min <= self.step_max <= hi:
            raise ValueError(f"step-count support must lie within [{lo}, {hi}]")
        tables = [
            self.duration_weights,
            self.delay_weights,
            self.repeat_weights,
            self.category_weights,
            self.kind_weights,
            self.image_count_weights,
            self.language_mix,
        ]
        tables += list(self.effect_weights.values())
        for t in tables:
            if any(v < 0 for v in t.values()) or sum(t.values()) <= 0:
                raise ValueError(f"weight table must be non-negative with positive mass: {t}")
        if not set(self.image_count_weights) <= {1, 2, 3, 4}:
            raise ValueError("image counts must lie in 1..4")
        for key, table in self.effect_weights.items():
            cat, _, kind = key.partition("/")
            if cat not in CATEGORIES or kind not in ("text", "image"):
                raise ValueError(f"bad effect-weight cell {key!r}")
            for name in table:
                _check_effect_name(cat, name)
        if self.n_slides < 0 or self.schemes_per_slide < 0:
            raise ValueError("counts must be non-negative")
        if not self.fps or any(f <= 0 for f in self.fps):
            raise ValueError("fps must be positive")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        # JSON keys must be strings
        for k in ("duration_weights", "delay_weights", "repeat_weights", "image_count_weights"):
            d[k] = {str(kk): vv for kk, vv in d[k].items()}
        d["fps"] = list(self.fps)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SynthConfig":
        _check_keys(d)
        return cls(**d)

    def replace(self, **changes) -> "SynthConfig":
        _check_keys(changes)
        return dataclasses.replace(self, **changes)

    # ------------------------------------------------------------ derived tables

    def element_count_pmf(self) -> dict[int, float]:
        total = sum(self.image_count_weights.values())
        pmf: dict[int, float] = {}
        for imgs, w in self.image_count_weights.items():
            for body, pb in ((1, self.body_prob), (0, 1 - self.body_prob)):
                n = 1 + body + imgs
                pmf[n] = pmf.get(n, 0.0) + w / total * pb
        return pmf

    def step_count_pmf(self) -> dict[int, float]:
        """Binomial-shaped base pmf on step_min..step_max.

        Schemes redraw counts below the slide's element count, so the base mean is
        solved such that the realised mean equals ``mean_steps``.
        """
        n_el = self.element_count_pmf()

        def realised(q):
            base = binomial_pmf(self.step_min, self.step_max, q)
            mean = 0.0
            for n, pn in n_el.items():
                feasible = {k: p for k, p in base.items() if k >= n}
                mass = sum(feasible.values())
                mean += pn * sum(k * p for k, p in feasible.items()) / mass
            return mean

        lo, hi = 1e-6, 1 - 1e-6
        if not realised(lo) <= self.mean_steps <= realised(hi):
            raise ValueError(f"mean_steps {self.mean_steps} unreachable")
        for _ in range(100):
            mid = (lo + hi) / 2
            if realised(mid) < self.mean_steps:
                lo = mid
            else:
                hi = mid
        return binomial_pmf(self.step_min, self.step_max, (lo + hi) / 2)

    def effect_table(self, category: str, kind: str) -> dict[tuple[str, str | None], float]:
        """Normalized (family, direction) -> probability for one cell."""
        return resolve_effect_weights(category, self.effect_weights.get(f"{category}/{kind}", {}))


def _check_keys(d: dict) -> None:
    unknown = set(d) - {f.name for f in dataclasses.fields(SynthConfig)}
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")


def binomial_pmf(lo: int, hi: int, q: float) -> dict[int, float]:
    n = hi - lo
    return {lo + i: math.comb(n, i) * q**i * (1 - q) ** (n - i) for i in range(n + 1)}


def _check_effect_name(category: str, name: str) -> None:
    try:
        kind = effect_kind(name)
    except KeyError:
        family, _ = parse_variant_key(name)
        kind = effect_kind(family)
    if not kind.supports(category):
        raise ValueError(f"{name} cannot be used as {category}")


def resolve_effect_weights(category: str, named: dict[str, float]) -> dict[tuple[str, str | None], float]:
    variants = effect_variants(category)
    probs: dict[tuple[str, str | None], float] = {}
    for name, pct in named.items():
        kind = None
        try:
            kind = effect_kind(name)
        except KeyError:
            pass
        if kind is not None and kind.directional:
            # a bare directional family spreads over its directions
            dirs = [v for v in variants if v[0] == name]
            for v in dirs:
                probs[v] = probs.get(v, 0.0) + pct / len(dirs)
        else:
            v = parse_variant_key(name) if kind is None else (name, None)
            probs[v] = probs.get(v, 0.0) + pct
    named_total = sum(probs.values())
    rest = [v for v in variants if v not in probs]
    if named_total < 100 and rest:
        share = (100 - named_total) / len(rest)
        for v in rest:
            probs[v] = share
    total = sum(probs.values())
    return {v: probs[v] / total for v in variants if v in probs}


def variant_weight_percent(config: SynthConfig, category: str, kind: str, key: str) -> float:
    table = config.effect_table(category, kind)
    return 100 * table.get(parse_variant_key(key), 0.0)


PRESETS = ("paper_default", "smoke")


def load_preset(name: str) -> SynthConfig:
    text = resources.files("slideanim").joinpath("presets", f"{name}.json").read_text(encoding="utf-8")
    return SynthConfig.from_dict(json.loads(text))


def load_config(ref: str | Path | None) -> SynthConfig:
    """Preset name, JSON or YAML file path; None -> paper_default."""
    if ref is None:
        return load_preset("paper_default")
    ref = str(ref)
    if ref in PRESETS:
        return load_preset(ref)
    path = Path(ref)
    text = path.read_text(encoding="utf-8")
    if path.suffix in (".yaml", ".yml"):
        import yaml

        data = yaml.safe_load(text) or {}
    else:
        data = json.loads(text)
    base = data.pop("preset", "paper_default")
    return load_preset(base).replace(**data) if data else load_preset(base)


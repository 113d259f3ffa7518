"""Seeded generation of slides, animation schemes and full triplet datasets."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import urllib.error
import urllib.request
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .config import SynthConfig
from .core_model import (
    CANVAS_SIZE,
    AnimationPlan,
    AnimationStep,
    Element,
    SlideSpec,
    PlanValidationError,
    validate_plan,
)
from .grammar import extract_action_units, format_action_list, render_description, render_narrative, plan_units
from .renderer import MANIFEST_NAME, RenderOptions, render_video

log = logging.getLogger(__name__)

ENDPOINT_TOKEN_ENV = "SLIDEANIM_ENDPOINT_TOKEN"
MAX_LAYOUT_ATTEMPTS = 64
MAX_OVERLAP = 0.10


class LayoutError(RuntimeError):
    pass


# ---------------------------------------------------------------- seeding

def derive_seed(root: int, *keys: int) -> int:
    """Independent 64-bit child seed for a record path, e.g. (slide, scheme)."""
    ss = np.random.SeedSequence(int(root), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


def _choice(rng: np.random.Generator, items, weights):
    w = np.asarray(weights, dtype=np.float64)
    idx = rng.choice(len(items), p=w / w.sum())
    return items[int(idx)]


# ---------------------------------------------------------------- slide text

KEYWORDS = (
    ("nature", "自然"),
    ("city", "城市"),
    ("technology", "科技"),
    ("ocean", "海洋"),
    ("mountain", "山脉"),
    ("food", "美食"),
    ("travel", "旅行"),
    ("education", "教育"),
    ("health", "健康"),
    ("art", "艺术"),
)
IMAGES_PER_KEYWORD = 40

_TITLES = {
    "en": ("Exploring {k}", "The Future of {k}", "{k}: Key Insights", "Why {k} Matters", "A Brief Guide to {k}"),
    "zh": ("探索{k}", "{k}的未来", "{k}：核心要点", "为什么{k}很重要", "{k}简明指南"),
}
_BODY = {
    "en": (
        "{k} shapes how we live, work and connect with each other.",
        "Recent studies highlight new opportunities in {k}.",
        "Small daily choices about {k} add up over time.",
        "Experts recommend a balanced approach to {k}.",
        "This page summarizes three lessons learned from {k}.",
        "Communities around the world are rethinking {k}.",
    ),
    "zh": (
        "{k}影响着我们的生活、工作与交流方式。",
        "最新研究揭示了{k}领域的新机遇。",
        "关于{k}的日常小选择会随时间积累。",
        "专家建议以平衡的方式看待{k}。",
        "本页总结了来自{k}的三点经验。",
        "世界各地的社区正在重新思考{k}。",
    ),
}


def _language_for(index: int, mix: dict[str, float]) -> str:
    """Exact-proportion deterministic assignment: slot i goes to the language whose
    cumulative quota first advances at i."""
    langs = sorted(mix)
    total = sum(mix.values())
    best, best_gap = langs[0], -1.0
    for lang in langs:
        share = mix[lang] / total
        gap = np.floor((index + 1) * share + 1e-9) - np.floor(index * share + 1e-9)
        if gap > best_gap:
            best, best_gap = lang, gap
    return best


# ---------------------------------------------------------------- layout

def _overlap(a: tuple, b: tuple) -> int:
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    ox = max(0, min(ax + aw, bx + bw) - max(ax, bx))
    oy = max(0, min(ay + ah, by + bh) - max(ay, by))
    return ox * oy


def _fits(box: tuple, placed: list[tuple]) -> bool:
    area = box[2] * box[3]
    for other in placed:
        ov = _overlap(box, other)
        if ov > MAX_OVERLAP * min(area, other[2] * other[3]):
            return False
    return True


_ASPECTS = (4 / 3, 3 / 2, 1.0, 16 / 9, 3 / 4)
_IMAGE_WIDTH = {1: (360, 560), 2: (300, 440), 3: (240, 360), 4: (200, 300)}


def _try_layout(rng: np.random.Generator, n_images: int, with_body: bool, shrink: float):
    cw, ch = CANVAS_SIZE
    margin = 32
    th = int(rng.integers(80, 111))
    tw = int(rng.integers(700, cw - 2 * margin + 1))
    tx = margin if rng.random() < 0.5 else (cw - tw) // 2
    ty = int(rng.integers(24, 49))
    boxes = {"Title": (tx, ty, tw, th)}
    top = ty + th + 16
    placed = [boxes["Title"]]
    wanted = []
    if with_body:
        bw = int(rng.integers(420, 601) * shrink)
        bh = int(rng.integers(220, 381) * shrink)
        wanted.append(("Body", bw, bh))
    lo, hi = _IMAGE_WIDTH[n_images]
    for i in range(n_images):
        w = int(rng.integers(lo, hi + 1) * shrink)
        aspect = _ASPECTS[int(rng.integers(len(_ASPECTS)))]
        wanted.append((f"Img{i + 1}", w, max(40, int(w / aspect))))
    for name, w, h in wanted:
        h = min(h, ch - margin - top)
        for _ in range(32):
            x = int(rng.integers(margin, cw - margin - w + 1))
            y = int(rng.integers(top, ch - margin - h + 1))
            if _fits((x, y, w, h), placed):
                boxes[name] = (x, y, w, h)
                placed.append((x, y, w, h))
                break
        else:
            return None
    return boxes


def synth_slide(seed: int, config: SynthConfig, slide_id: str = "slide_0000", language: str | None = None) -> SlideSpec:
    rng = _rng(seed)
    n_images = _choice(rng, list(config.image_count_weights), list(config.image_count_weights.values()))
    with_body = bool(rng.random() < config.body_prob)
    if language is None:
        language = _choice(rng, list(config.language_mix), list(config.language_mix.values()))
    ki = int(rng.integers(len(KEYWORDS)))
    kw = KEYWORDS[ki][0 if language == "en" else 1]
    kw_title = kw.capitalize() if language == "en" else kw
    title = _TITLES[language][int(rng.integers(len(_TITLES[language])))].format(k=kw_title)
    body_lines = rng.choice(len(_BODY[language]), size=2, replace=False)
    body = (" " if language == "en" else "").join(_BODY[language][int(i)].format(k=kw) for i in body_lines)
    if language == "en":
        body = body[0].upper() + body[1:]
    boxes = None
    for attempt in range(MAX_LAYOUT_ATTEMPTS):
        shrink = 1.0 - 0.005 * attempt
        boxes = _try_layout(rng, n_images, with_body, shrink)
        if boxes is not None:
            break
    if boxes is None:
        raise LayoutError(f"no non-overlapping layout for {slide_id} after {MAX_LAYOUT_ATTEMPTS} attempts")
    elements = [Element("Title", "title", *boxes["Title"], content=title)]
    if with_body:
        elements.append(Element("Body", "body", *boxes["Body"], content=body))
    for i in range(n_images):
        kj = int(rng.integers(len(KEYWORDS)))
        ref = f"pool/{KEYWORDS[kj][0]}/{int(rng.integers(IMAGES_PER_KEYWORD)):02d}.jpg"
        elements.append(Element(f"Img{i + 1}", "image", *boxes[f"Img{i + 1}"], content=ref))
    return SlideSpec(slide_id, language, CANVAS_SIZE, tuple(elements))


# ---------------------------------------------------------------- schemes

def _kind(el: Element) -> str:
    return "text" if el.is_text else "image"


_PMF_CACHE: dict[str, dict[int, float]] = {}
_TABLE_CACHE: dict[tuple[str, str, str], dict] = {}


def _step_pmf(config: SynthConfig) -> dict[int, float]:
    key = json.dumps(
        [config.mean_steps, config.step_min, config.step_max, sorted(config.image_count_weights.items()), config.body_prob]
    )
    if key not in _PMF_CACHE:
        _PMF_CACHE[key] = config.step_count_pmf()
    return _PMF_CACHE[key]


def _effect_table(config: SynthConfig, category: str, kind: str) -> dict:
    cell = f"{category}/{kind}"
    key = (cell, json.dumps(config.effect_weights.get(cell, {}), sort_keys=True), category)
    if key not in _TABLE_CACHE:
        _TABLE_CACHE[key] = config.effect_table(category, kind)
    return _TABLE_CACHE[key]


def synth_scheme(seed: int, slide: SlideSpec, config: SynthConfig) -> AnimationPlan:
    rng = _rng(seed)
    els = {el.name: el for el in slide.elements}
    n = len(els)
    pmf = _step_pmf(config)
    counts = [k for k in pmf if k >= n]
    k = _choice(rng, counts, [pmf[c] for c in counts])

    pending = [el.name for el in slide.elements]
    shown: list[str] = []
    hidden: list[str] = []
    durations = list(config.duration_weights)
    delays = list(config.delay_weights)
    repeats = list(config.repeat_weights)
    steps = []

    def pick(names, extra=None):
        weights = [config.kind_weights[_kind(els[m])] * (extra(m) if extra else 1.0) for m in names]
        return _choice(rng, names, weights)

    for pos in range(k):
        left = k - pos
        if pos == 0 and "Title" in pending and rng.random() < config.title_first_prob:
            cat, name = "entrance", "Title"
        elif left == len(pending):
            cat, name = "entrance", pick(pending)
        else:
            cats, cw = [], []
            if pending or hidden:
                cats.append("entrance")
                cw.append(config.category_weights["entrance"])
            if shown:
                # an exit must leave room for pending entrances
                for c in ("emphasis", "exit"):
                    cats.append(c)
                    cw.append(config.category_weights[c])
            cat = _choice(rng, cats, cw)
            if cat == "entrance":
                pool = pending + hidden
                name = pick(pool, lambda m: 1.0 if m in pending else config.reenter_weight)
            else:
                name = pick(shown)
        table = _effect_table(config, cat, _kind(els[name]))
        variants = list(table)
        family, direction = _choice(rng, variants, [table[v] for v in variants])
        duration = float(_choice(rng, durations, list(config.duration_weights.values())))
        delay = float(_choice(rng, delays, list(config.delay_weights.values())))
        repeat = int(_choice(rng, repeats, list(config.repeat_weights.values()))) if cat == "emphasis" else 1
        steps.append(AnimationStep(pos + 1, cat, name, family, direction, duration, delay, repeat))
        if cat == "entrance":
            if name in pending:
                pending.remove(name)
            else:
                hidden.remove(name)
            shown.append(name)
        elif cat == "exit":
            shown.remove(name)
            hidden.append(name)
    return AnimationPlan(slide.slide_id, tuple(steps))


# ---------------------------------------------------------------- external describer

class ServiceDescription(NamedTuple):
    text: str
    fallback: bool
    reason: str | None = None


def _recovered(plan: AnimationPlan, text: str, names) -> bool:
    from .metrics import coda_match

    units = extract_action_units(text, names)
    matched = coda_match(units, plan_units(plan))
    return len(matched) == len(plan.steps)


def describe_via_service(
    plan: AnimationPlan,
    endpoint: str,
    timeout: float = 10.0,
    element_names=None,
) -> ServiceDescription:
    """POST the action list as plain text; accept the reply only if every step is recoverable."""
    template = render_narrative(plan)
    body = format_action_list(plan).encode("utf-8")
    headers = {"Content-Type": "text/plain; charset=utf-8"}
    token = os.environ.get(ENDPOINT_TOKEN_ENV)
    if token:
        headers["Authorization"] = f"Bearer {token}"
    req = urllib.request.Request(endpoint, data=body, headers=headers, method="POST")
    try:
        with urllib.request.urlopen(req, timeout=timeout) as resp:
            text = resp.read().decode("utf-8")
    except (urllib.error.URLError, OSError, ValueError) as exc:
        return ServiceDescription(template, True, f"fallback: {type(exc).__name__}: {exc}")
    if not _recovered(plan, text, element_names):
        return ServiceDescription(template, True, "fallback: incomplete action recovery")
    return ServiceDescription(text.strip(), False, None)


# ---------------------------------------------------------------- datasets

@dataclass
class TripletRecord:
    slide_id: str
    scheme: int
    language: str
    description: str
    plan: str
    frames: list[str] | None
    fps: list[float]
    split: str
    status: str = "complete"
    annotation: str | None = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, d: dict) -> "TripletRecord":
        return cls(**d)


@dataclass
class DatasetManifest:
    dataset_id: str
    seed: int
    config: dict
    records: list[TripletRecord]
    root: Path | None = None
    # run bookkeeping, never serialized
    generated: int = field(default=0, compare=False)
    resumed: int = field(default=0, compare=False)

    @property
    def complete(self) -> list[TripletRecord]:
        return [r for r in self.records if r.status == "complete"]

    def to_dict(self) -> dict:
        return {
            "dataset_id": self.dataset_id,
            "seed": self.seed,
            "config": self.config,
            "records": [r.to_dict() for r in self.records],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, ensure_ascii=False, sort_keys=True) + "\n"

    @classmethod
    def load(cls, path: str | Path) -> "DatasetManifest":
        path = Path(path)
        if path.is_dir():
            path = path / "manifest.json"
        d = json.loads(path.read_text(encoding="utf-8"))
        return cls(
            d["dataset_id"],
            d["seed"],
            d["config"],
            [TripletRecord.from_dict(r) for r in d["records"]],
            root=path.parent,
        )


def split_tag(slide_id: str, scheme: int, every: int = 12) -> str:
    h = hashlib.sha256(f"{slide_id}/{scheme}".encode()).digest()
    return "test" if int.from_bytes(h[:8], "big") % every == 0 else "train"


def slide_id_for(index: int) -> str:
    return f"slide_{index:04d}"


def _config_digest(config: SynthConfig) -> str:
    return hashlib.sha256(json.dumps(config.to_dict(), sort_keys=True).encode()).hexdigest()


def _frames_layout(fps_list) -> list[tuple[float, str]]:
    if len(fps_list) == 1:
        return [(fps_list[0], "")]
    return [(f, f"fps{f:g}") for f in fps_list]


def _build_slide(config: SynthConfig, index: int) -> SlideSpec:
    lang = _language_for(index, config.language_mix)
    return synth_slide(derive_seed(config.seed, 0, index), config, slide_id_for(index), lang)


def build_record(
    root: Path, config: SynthConfig, slide: SlideSpec, slide_index: int, scheme: int, digest: str = ""
) -> TripletRecord:
    rel = Path(slide.slide_id) / f"{scheme:02d}"
    rec_dir = root / rel
    rec_dir.mkdir(parents=True, exist_ok=True)
    plan = synth_scheme(derive_seed(config.seed, 1, slide_index, scheme), slide, config)
    report = validate_plan(plan, slide, strict=True)
    if not report.ok:
        raise PlanValidationError(report)
    (rec_dir / "plan.json").write_text(json.dumps(plan.to_dict(), indent=1) + "\n", encoding="utf-8")
    annotation = None
    description = render_description(plan)
    if config.external_endpoint:
        got = describe_via_service(plan, config.external_endpoint, config.external_timeout, slide.names)
        annotation = got.reason
        description = format_action_list(plan) + "\n\n" + got.text + "\n"
    (rec_dir / "description.txt").write_text(description, encoding="utf-8")
    frames = None
    if config.render:
        opts = RenderOptions(config.placeholder_text, config.placeholder_images, config.asset_root)
        frames = []
        for fps, sub in _frames_layout(list(config.fps)):
            out = rec_dir / sub if sub else rec_dir
            render_video(slide, plan, fps, out, opts)
            frames.append(str((rel / sub / "frames") if sub else (rel / "frames")))
    rec = TripletRecord(
        slide.slide_id,
        scheme,
        slide.language,
        str(rel / "description.txt"),
        str(rel / "plan.json"),
        frames,
        list(config.fps),
        split_tag(slide.slide_id, scheme, config.test_every),
        "complete",
        annotation,
    )
    # commit point for resume
    marker = {"config_digest": digest or _config_digest(config), "record": rec.to_dict()}
    (rec_dir / "record.json").write_text(json.dumps(marker, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8")
    return rec


def _existing_record(root: Path, slide_id: str, scheme: int, digest: str) -> TripletRecord | None:
    marker = root / slide_id / f"{scheme:02d}" / "record.json"
    if not marker.is_file():
        return None
    try:
        data = json.loads(marker.read_text(encoding="utf-8"))
        if data.get("config_digest") != digest:
            return None
        rec = TripletRecord.from_dict(data["record"])
    except (ValueError, TypeError, KeyError):
        return None
    paths = [rec.plan, rec.description] + list(rec.frames or [])
    if not all((root / p).exists() for p in paths):
        return None
    for f in rec.frames or []:
        if not (root / f).parent.joinpath(MANIFEST_NAME).is_file():
            return None
    return rec


def _slide_job(args) -> tuple[list[TripletRecord], int, int]:
    root, config, index, digest, resume = args
    slide = _build_slide(config, index)
    sdir = root / slide.slide_id
    sdir.mkdir(parents=True, exist_ok=True)
    slide_json = json.dumps(slide.to_dict(), indent=1, ensure_ascii=False) + "\n"
    path = sdir / "slide.json"
    if not path.is_file() or path.read_text(encoding="utf-8") != slide_json:
        path.write_text(slide_json, encoding="utf-8")
    records, made, reused = [], 0, 0
    for scheme in range(config.schemes_per_slide):
        rec = _existing_record(root, slide.slide_id, scheme, digest) if resume else None
        if rec is not None:
            reused += 1
        else:
            try:
                rec = build_record(root, config, slide, index, scheme, digest)
                made += 1
            except Exception as exc:  # recorded per record, never fails the build
                log.warning("record %s/%02d failed: %s", slide.slide_id, scheme, exc)
                rel = Path(slide.slide_id) / f"{scheme:02d}"
                rec = TripletRecord(
                    slide.slide_id, scheme, slide.language, str(rel / "description.txt"),
                    str(rel / "plan.json"), None, list(config.fps),
                    split_tag(slide.slide_id, scheme, config.test_every), "incomplete",
                    f"error: {type(exc).__name__}: {exc}",
                )
        records.append(rec)
    return records, made, reused


def synth_dataset(config: SynthConfig, out_root: str | Path, jobs: int = 1, resume: bool = True) -> DatasetManifest:
    """Build a dataset; ``manifest.json`` is written last.

    With ``resume`` set, records whose ``record.json`` carries the same config digest
    and whose files are all present are reused instead of regenerated.
    """
    root = Path(out_root)
    root.mkdir(parents=True, exist_ok=True)
    digest = _config_digest(config)
    tasks = [(root, config, i, digest, resume) for i in range(config.n_slides)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_slide_job, tasks))
    else:
        results = [_slide_job(t) for t in tasks]
    records, made, reused = [], 0, 0
    for recs, m, r in results:
        records.extend(recs)
        made += m
        reused += r
    manifest = DatasetManifest(f"slideanim-{digest[:12]}", config.seed, config.to_dict(), records, root, made, reused)
    (root / "manifest.json").write_text(manifest.to_json(), encoding="utf-8")
    return manifest

"""Domain vocabulary: slide elements, the effect catalog, animation steps and plans."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

CANVAS_SIZE = (1280, 720)

CATEGORIES = ("entrance", "emphasis", "exit")
ELEMENT_KINDS = ("title", "body", "image")
DIRECTIONS = ("left", "right", "top", "bottom")
LANGUAGES = ("en", "zh")

# bounds that synthesized plans must respect
DURATION_RANGE = (0.5, 3.0)
DELAY_RANGE = (0.0, 4.0)
STEP_COUNT_RANGE = (4, 15)


class PlanError(ValueError):
    """Base class for plan-level errors."""


class SlideMismatchError(PlanError):
    """Plan and slide refer to different slide ids."""


class PlanValidationError(PlanError):
    def __init__(self, report: "ValidationReport"):
        self.report = report
        super().__init__("; ".join(v.message for v in report.errors) or "invalid plan")


@dataclass(frozen=True)
class Element:
    name: str
    kind: str
    x: int
    y: int
    w: int
    h: int
    content: str = ""

    @property
    def is_text(self) -> bool:
        return self.kind in ("title", "body")

    @property
    def area(self) -> int:
        return self.w * self.h

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "x": self.x,
            "y": self.y,
            "w": self.w,
            "h": self.h,
            "content": self.content,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Element":
        return cls(
            name=str(d["name"]),
            kind=str(d["kind"]),
            x=int(d["x"]),
            y=int(d["y"]),
            w=int(d["w"]),
            h=int(d["h"]),
            content=str(d.get("content", "")),
        )


@dataclass(frozen=True)
class SlideSpec:
    slide_id: str
    language: str
    canvas: tuple[int, int]
    elements: tuple[Element, ...]

    def __post_init__(self):
        object.__setattr__(self, "canvas", tuple(self.canvas))
        object.__setattr__(self, "elements", tuple(self.elements))
        problems = slide_problems(self)
        if problems:
            raise ValueError(f"invalid slide {self.slide_id!r}: " + "; ".join(problems))

    def element(self, name: str) -> Element:
        for el in self.elements:
            if el.name == name:
                return el
        raise KeyError(name)

    @property
    def names(self) -> list[str]:
        return [el.name for el in self.elements]

    def to_dict(self) -> dict:
        return {
            "slide_id": self.slide_id,
            "language": self.language,
            "canvas": list(self.canvas),
            "elements": [el.to_dict() for el in self.elements],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SlideSpec":
        return cls(
            slide_id=str(d["slide_id"]),
            language=str(d.get("language", "en")),
            canvas=tuple(d.get("canvas", CANVAS_SIZE)),
            elements=tuple(Element.from_dict(e) for e in d["elements"]),
        )


def slide_problems(slide: SlideSpec) -> list[str]:
    problems = []
    cw, ch = slide.canvas
    if slide.language not in LANGUAGES:
        problems.append(f"unknown language {slide.language!r}")
    seen = set()
    for el in slide.elements:
        if el.name in seen:
            problems.append(f"duplicate element name {el.name!r}")
        seen.add(el.name)
        if "'" in el.name or not el.name:
            problems.append(f"element name {el.name!r} must be non-empty and unquoted")
        if el.kind not in ELEMENT_KINDS:
            problems.append(f"element {el.name!r} has unknown kind {el.kind!r}")
        if el.w <= 0 or el.h <= 0:
            problems.append(f"element {el.name!r} has non-positive size")
        if el.x < 0 or el.y < 0 or el.x + el.w > cw or el.y + el.h > ch:
            problems.append(f"element {el.name!r} lies outside the canvas")
    kinds = [el.kind for el in slide.elements]
    if kinds.count("title") != 1:
        problems.append("slide needs exactly one title")
    if kinds.count("body") > 1:
        problems.append("slide has more than one body")
    if not 1 <= kinds.count("image") <= 4:
        problems.append("slide needs between 1 and 4 images")
    return problems


@dataclass(frozen=True)
class EffectKind:
    family: str
    categories: frozenset[str]
    directional: bool = False
    # exit-side family name for entrance/exit pairs whose names differ (FlyFrom -> FlyTo)
    exit_name: str | None = None

    def supports(self, category: str) -> bool:
        return category in self.categories


def _build_catalog() -> tuple[EffectKind, ...]:
    both = frozenset({"entrance", "exit"})
    emph = frozenset({"emphasis"})
    kinds = [
        EffectKind("Fade", both),
        EffectKind("FlyFrom", frozenset({"entrance"}), directional=True, exit_name="FlyTo"),
        EffectKind("FlyTo", frozenset({"exit"}), directional=True),
        EffectKind("Wipe", both, directional=True),
        EffectKind("Box", both),
        EffectKind("Blinds", both),
        EffectKind("Checkerboard", both),
        EffectKind("Circle", both),
        EffectKind("Pinwheel", both),
    ]
    for name in (
        "Spin",
        "Teeter",
        "FlashBulb",
        "GrowShrink",
        "Pulse",
        "Transparency",
        "Darken",
        "Lighten",
        "Blink",
        "Wave",
    ):
        kinds.append(EffectKind(name, emph))
    return tuple(kinds)


_CATALOG: tuple[EffectKind, ...] = _build_catalog()


def effect_catalog() -> list[EffectKind]:
    return list(_CATALOG)


def register_effect(kind: EffectKind) -> None:
    """Add a family to the catalog. Renderer and grammar support must be registered separately."""
    global _CATALOG
    if any(k.family == kind.family for k in _CATALOG):
        raise ValueError(f"effect family {kind.family!r} already registered")
    _CATALOG = _CATALOG + (kind,)


def effect_kind(family: str) -> EffectKind:
    for k in _CATALOG:
        if k.family == family:
            return k
    raise KeyError(f"unknown effect family {family!r}")


def entrance_exit_pairs() -> list[tuple[str, str, str | None]]:
    """(entrance family, exit family, direction) for every registered pair variant."""
    pairs = []
    for k in _CATALOG:
        if "entrance" not in k.categories:
            continue
        exit_family = k.exit_name or k.family
        try:
            ek = effect_kind(exit_family)
        except KeyError:
            continue
        if not ek.supports("exit"):
            continue
        for d in DIRECTIONS if k.directional else (None,):
            pairs.append((k.family, exit_family, d))
    return pairs


def effect_variants(category: str) -> list[tuple[str, str | None]]:
    """All (family, direction) variants usable in a category, catalog order."""
    out = []
    for k in _CATALOG:
        if k.supports(category):
            for d in DIRECTIONS if k.directional else (None,):
                out.append((k.family, d))
    return out


def variant_key(family: str, direction: str | None) -> str:
    """FlyFrom + left -> 'FlyFromLeft'."""
    return family + (direction.capitalize() if direction else "")


def parse_variant_key(key: str) -> tuple[str, str | None]:
    for d in DIRECTIONS:
        suffix = d.capitalize()
        if key.endswith(suffix) and key != suffix:
            family = key[: -len(suffix)]
            try:
                if effect_kind(family).directional:
                    return family, d
            except KeyError:
                pass
    effect_kind(key)
    return key, None


@dataclass(frozen=True)
class AnimationStep:
    index: int
    category: str
    element: str
    effect: str
    direction: str | None = None
    duration_s: float = 1.0
    delay_s: float = 0.0
    repeat: int = 1

    def __post_init__(self):
        if self.direction == "none":
            object.__setattr__(self, "direction", None)

    @property
    def span_s(self) -> float:
        return self.duration_s * self.repeat

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "category": self.category,
            "element": self.element,
            "effect": self.effect,
            "direction": self.direction,
            "duration_s": self.duration_s,
            "delay_s": self.delay_s,
            "repeat": self.repeat,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AnimationStep":
        return cls(
            index=int(d["index"]),
            category=str(d["category"]),
            element=str(d["element"]),
            effect=str(d["effect"]),
            direction=d.get("direction"),
            duration_s=float(d["duration_s"]),
            delay_s=float(d["delay_s"]),
            repeat=int(d["repeat"]),
        )


@dataclass(frozen=True)
class AnimationPlan:
    slide_id: str
    steps: tuple[AnimationStep, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))

    def __len__(self) -> int:
        return len(self.steps)

    def to_dict(self) -> dict:
        return {"slide": self.slide_id, "steps": [s.to_dict() for s in self.steps]}

    @classmethod
    def from_dict(cls, d: dict) -> "AnimationPlan":
        return cls(d["slide"], tuple(AnimationStep.from_dict(s) for s in d["steps"]))


@dataclass(frozen=True)
class Violation:
    kind: str  # structure | unknown-element | effect | direction | range | lifecycle | count
    message: str
    step: int | None = None
    severity: str = "error"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def errors(self) -> list[Violation]:
        return [v for v in self.violations if v.severity == "error"]

    @property
    def warnings(self) -> list[Violation]:
        return [v for v in self.violations if v.severity == "warning"]

    @property
    def ok(self) -> bool:
        return not self.errors

    def __len__(self) -> int:
        return len(self.errors)

    def __iter__(self):
        return iter(self.errors)


def _step_violations(step: AnimationStep, strict: bool) -> Iterable[Violation]:
    i = step.index
    if step.category not in CATEGORIES:
        yield Violation("structure", f"step {i}: unknown category {step.category!r}", i)
        return
    try:
        kind = effect_kind(step.effect)
    except KeyError:
        yield Violation("effect", f"step {i}: unknown effect {step.effect!r}", i)
        return
    if not kind.supports(step.category):
        yield Violation("effect", f"step {i}: {step.effect} cannot be used as {step.category}", i)
    if kind.directional:
        if step.direction not in DIRECTIONS:
            yield Violation("direction", f"step {i}: {step.effect} needs a direction", i)
    elif step.direction is not None:
        yield Violation("direction", f"step {i}: {step.effect} takes no direction", i)
    if not step.duration_s > 0:
        yield Violation("range", f"step {i}: duration must be positive", i)
    if step.delay_s < 0:
        yield Violation("range", f"step {i}: delay must be non-negative", i)
    if step.repeat < 1:
        yield Violation("range", f"step {i}: repeat must be at least 1", i)
    sev = "error" if strict else "warning"
    lo, hi = DURATION_RANGE
    if step.duration_s > 0 and not lo <= step.duration_s <= hi:
        yield Violation("range", f"step {i}: duration {step.duration_s} outside [{lo}, {hi}]", i, sev)
    lo, hi = DELAY_RANGE
    if step.delay_s >= 0 and not lo <= step.delay_s <= hi:
        yield Violation("range", f"step {i}: delay {step.delay_s} outside [{lo}, {hi}]", i, sev)


def lifecycle_violations(steps: Iterable[AnimationStep]) -> list[Violation]:
    """Per element: entrance (emphasis)* (exit)?, repeated."""
    shown: dict[str, bool] = {}
    out = []
    for s in steps:
        visible = shown.get(s.element, False)
        if s.category == "entrance":
            if visible:
                out.append(Violation("lifecycle", f"step {s.index}: {s.element!r} enters while already shown", s.index))
            else:
                shown[s.element] = True
        elif s.category in ("emphasis", "exit"):
            if not visible:
                out.append(Violation("lifecycle", f"step {s.index}: {s.category} on hidden element {s.element!r}", s.index))
            elif s.category == "exit":
                shown[s.element] = False
    return out


def plan_structure_report(plan: AnimationPlan, strict: bool = False) -> ValidationReport:
    """Checks that need no slide: indices, effects, parameters, lifecycle."""
    report = ValidationReport()
    for pos, step in enumerate(plan.steps, start=1):
        if step.index != pos:
            report.violations.append(Violation("structure", f"step at position {pos} has index {step.index}", step.index))
        report.violations.extend(_step_violations(step, strict))
    report.violations.extend(lifecycle_violations(plan.steps))
    lo, hi = STEP_COUNT_RANGE
    if not lo <= len(plan.steps) <= hi:
        sev = "error" if strict else "warning"
        report.violations.append(Violation("count", f"plan has {len(plan.steps)} steps, expected {lo}..{hi}", None, sev))
    return report


def validate_plan(plan: AnimationPlan, slide: SlideSpec, strict: bool = False) -> ValidationReport:
    """Validate a plan against its slide.

    ``strict`` applies the synthesized-plan bounds (duration, delay, step count) as
    errors; otherwise they are reported as warnings so third-party plans still score.
    """
    if plan.slide_id != slide.slide_id:
        raise SlideMismatchError(f"plan is for {plan.slide_id!r}, slide is {slide.slide_id!r}")
    names = set(slide.names)
    report = ValidationReport()
    for step in plan.steps:
        if step.element not in names:
            report.violations.append(Violation("unknown-element", f"step {step.index}: unknown element {step.element!r}", step.index))
    known = AnimationPlan(plan.slide_id, tuple(s for s in plan.steps if s.element in names))
    structure = plan_structure_report(plan, strict)
    # lifecycle only over known elements so an unknown name is reported once
    report.violations.extend(v for v in structure.violations if v.kind != "lifecycle")
    report.violations.extend(lifecycle_violations(known.steps))
    return report


def plan_duration(plan: AnimationPlan) -> float:
    end = 0.0
    for s in plan.steps:
        end = end + s.delay_s + s.span_s
    return end

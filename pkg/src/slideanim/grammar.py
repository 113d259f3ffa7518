"""Controlled text grammar for action lines and narratives, and the action-unit extractor.

Action line (canonical, invertible)::

    1. (Entrance) element 'Title' fades in over 1.5 s, 0 s delay, repeat 1

Narrative sentence (one per step)::

    Then, after a 0.5-second pause, the element 'Img1' spins over 2.0 seconds, 2 times.

Omitted pause means 0 s delay; omitted count means a single play.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .core_model import DIRECTIONS, AnimationPlan, AnimationStep

# (category, family) -> phrases; "{d}" expands per direction. First phrase is canonical.
_PHRASES: dict[tuple[str, str], tuple[str, ...]] = {
    ("entrance", "Fade"): ("fades in", "fades into view"),
    ("entrance", "FlyFrom"): ("flies in from the {d}", "flies into view from the {d}"),
    ("entrance", "Wipe"): ("wipes in from the {d}",),
    ("entrance", "Box"): ("appears through an expanding box", "boxes in"),
    ("entrance", "Blinds"): ("appears through blinds", "opens like blinds"),
    ("entrance", "Checkerboard"): ("appears in a checkerboard pattern",),
    ("entrance", "Circle"): ("appears through an expanding circle", "circles in"),
    ("entrance", "Pinwheel"): ("pinwheels in",),
    ("exit", "Fade"): ("fades out", "fades away"),
    ("exit", "FlyTo"): ("flies out toward the {d}", "flies off toward the {d}"),
    ("exit", "Wipe"): ("wipes out toward the {d}",),
    ("exit", "Box"): ("disappears into a shrinking box", "boxes out"),
    ("exit", "Blinds"): ("disappears through blinds", "closes like blinds"),
    ("exit", "Checkerboard"): ("disappears in a checkerboard pattern",),
    ("exit", "Circle"): ("disappears into a shrinking circle", "circles out"),
    ("exit", "Pinwheel"): ("pinwheels out",),
    ("emphasis", "Spin"): ("spins", "spins around"),
    ("emphasis", "Teeter"): ("teeters", "wobbles"),
    ("emphasis", "FlashBulb"): ("flashes like a bulb", "flashes"),
    ("emphasis", "GrowShrink"): ("grows and shrinks", "grows then shrinks back"),
    ("emphasis", "Pulse"): ("pulses",),
    ("emphasis", "Transparency"): ("turns semi-transparent",),
    ("emphasis", "Darken"): ("darkens",),
    ("emphasis", "Lighten"): ("lightens",),
    ("emphasis", "Blink"): ("blinks",),
    ("emphasis", "Wave"): ("waves",),
}

# generic verbs for partial units from free text
_CATEGORY_VERBS = {
    "entrance": ("appears", "enters", "comes in", "shows up", "flies in", "fades in", "pops in"),
    "exit": ("disappears", "exits", "leaves", "vanishes", "flies out", "fades out"),
    "emphasis": ("is emphasized", "is highlighted", "spins", "pulses", "flashes", "blinks"),
}

_CAT_TAG = {"entrance": "Entrance", "emphasis": "Emphasis", "exit": "Exit"}
_TAG_CAT = {v: k for k, v in _CAT_TAG.items()}


class GrammarError(ValueError):
    def __init__(self, message: str, span: tuple[int, int] | None = None, phrase: str | None = None):
        super().__init__(message)
        self.span = span
        self.phrase = phrase


def _build_phrase_index():
    canonical = {}
    lookup = {}
    for (cat, family), phrases in _PHRASES.items():
        directions = DIRECTIONS if "{d}" in phrases[0] else (None,)
        for d in directions:
            expanded = [p.format(d=d) if d else p for p in phrases]
            canonical[(cat, family, d)] = expanded[0]
            for p in expanded:
                lookup[(cat, p)] = (family, d)
    return canonical, lookup


_CANONICAL, _LOOKUP = _build_phrase_index()
# longest first so "spins around" wins over "spins"
_ALL_PHRASES = sorted({p for (_, p) in _LOOKUP}, key=len, reverse=True)


def effect_phrase(category: str, family: str, direction: str | None) -> str:
    try:
        return _CANONICAL[(category, family, direction)]
    except KeyError:
        raise GrammarError(f"no phrase for {category} {family} {direction}") from None


def phrase_variants(category: str, family: str, direction: str | None) -> list[str]:
    return [p for (cat, p), v in _LOOKUP.items() if cat == category and v == (family, direction)]


def lookup_phrase(category: str, phrase: str) -> tuple[str, str | None]:
    try:
        return _LOOKUP[(category, phrase)]
    except KeyError:
        raise GrammarError(f"unknown effect phrase {phrase!r}", phrase=phrase) from None


def format_seconds(value: float) -> str:
    """'0' for zero, one decimal otherwise; extra decimals (max 3) only if needed."""
    if value == 0:
        return "0"
    for digits in (1, 2, 3):
        s = f"{value:.{digits}f}"
        if float(s) == value:
            return s
    return f"{value:.3f}"


# ---------------------------------------------------------------- action lines

_NUM = r"\d+(?:\.\d{1,3})?"
_LINE_RE = re.compile(
    r"(?P<index>\d+)\. \((?P<cat>Entrance|Emphasis|Exit)\) element '(?P<el>[^']+)' "
    rf"(?P<phrase>.+?) over (?P<dur>{_NUM}) s, (?P<delay>{_NUM}) s delay, repeat (?P<rep>\d+)"
)


def format_action_line(step: AnimationStep) -> str:
    phrase = effect_phrase(step.category, step.effect, step.direction)
    return (
        f"{step.index}. ({_CAT_TAG[step.category]}) element '{step.element}' {phrase} "
        f"over {format_seconds(step.duration_s)} s, {format_seconds(step.delay_s)} s delay, "
        f"repeat {step.repeat}"
    )


def format_action_list(plan: AnimationPlan) -> str:
    return "\n".join(format_action_line(s) for s in plan.steps)


def parse_action_line(text: str) -> AnimationStep:
    stripped = text.strip()
    offset = text.find(stripped) if stripped else 0
    m = _LINE_RE.fullmatch(stripped)
    if m is None:
        raise GrammarError(f"malformed action line: {text!r}", span=(offset, offset + len(stripped)))
    cat = _TAG_CAT[m["cat"]]
    phrase = m["phrase"]
    try:
        family, direction = lookup_phrase(cat, phrase)
    except GrammarError as exc:
        s, e = m.span("phrase")
        exc.span = (offset + s, offset + e)
        raise
    return AnimationStep(
        index=int(m["index"]),
        category=cat,
        element=m["el"],
        effect=family,
        direction=direction,
        duration_s=float(m["dur"]),
        delay_s=float(m["delay"]),
        repeat=int(m["rep"]),
    )


def parse_action_list(text: str, slide_id: str = "") -> AnimationPlan:
    steps = [parse_action_line(line) for line in text.splitlines() if line.strip()]
    return AnimationPlan(slide_id, tuple(steps))


# ---------------------------------------------------------------- narratives

_CONNECTIVES = ("Then", "Next", "Subsequently")


def _connective(pos: int, k: int) -> str:
    if pos == 0:
        return "First"
    if pos == k - 1:
        return "Finally"
    return _CONNECTIVES[(pos - 1) % len(_CONNECTIVES)]


def narrative_sentence(step: AnimationStep, pos: int, k: int) -> str:
    parts = [_connective(pos, k) + ","]
    if step.delay_s:
        parts.append(f"after a {format_seconds(step.delay_s)}-second pause,")
    phrase = effect_phrase(step.category, step.effect, step.direction)
    tail = f"over {format_seconds(step.duration_s)} seconds"
    if step.repeat != 1:
        tail += f", {step.repeat} times"
    parts.append(f"the element '{step.element}' {phrase} {tail}.")
    return " ".join(parts)


def render_narrative(plan: AnimationPlan) -> str:
    k = len(plan.steps)
    return " ".join(narrative_sentence(s, i, k) for i, s in enumerate(plan.steps))


def render_description(plan: AnimationPlan) -> str:
    """description.txt body: action list, blank line, narrative."""
    return format_action_list(plan) + "\n\n" + render_narrative(plan) + "\n"


_NARRATIVE_RE = re.compile(
    r"(?:(?:First|Then|Next|Subsequently|Finally),\s+)?"
    rf"(?:after an? (?P<delay>{_NUM})-second (?:pause|delay),\s+)?"
    r"the element '(?P<el>[^']+)' (?P<phrase>.+?) "
    rf"over (?P<dur>{_NUM}) seconds(?:, (?P<rep>\d+) times)?\.?",
    re.IGNORECASE,
)


# ---------------------------------------------------------------- extraction

@dataclass(frozen=True)
class ActionUnit:
    category: str
    element: str
    effect: str | None = None
    direction: str | None = None
    duration_s: float | None = None
    delay_s: float | None = None
    repeat: int | None = None
    source_span: tuple[int, int] = (0, 0)

    @classmethod
    def from_step(cls, step: AnimationStep, span: tuple[int, int] = (0, 0)) -> "ActionUnit":
        return cls(
            step.category,
            step.element,
            step.effect,
            step.direction,
            step.duration_s,
            step.delay_s,
            step.repeat,
            span,
        )

    @property
    def key(self) -> tuple[str, str]:
        return (self.element, self.category)

    def fields(self) -> tuple:
        """Everything except the source span."""
        return (
            self.category,
            self.element,
            self.effect,
            self.direction,
            self.duration_s,
            self.delay_s,
            self.repeat,
        )


_ELEMENT_WORD_RE = re.compile(r"'(?P<q>[^']+)'|\b(?P<w>title|body|img\s?\d|image\s?\d)\b", re.IGNORECASE)
_SECONDS_RE = re.compile(rf"(?P<v>{_NUM})\s*(?:s|sec|secs|second|seconds)\b", re.IGNORECASE)


def _segments(text: str):
    """Yield (start, end) spans of candidate sentences; action lines stay whole."""
    pos = 0
    for line in text.splitlines(keepends=True):
        body = line.rstrip("\r\n")
        stripped = body.strip()
        if stripped:
            lead = len(body) - len(body.lstrip())
            if _LINE_RE.fullmatch(stripped):
                yield pos + lead, pos + lead + len(stripped)
            else:
                yield from _sentence_spans(body, pos)
        pos += len(line)


def _sentence_spans(body: str, base: int):
    # split on ., !, ? followed by whitespace/end; decimals like "1.5" never split
    start = 0
    n = len(body)
    i = 0
    while i < n:
        ch = body[i]
        if ch in ".!?" and (i + 1 == n or body[i + 1].isspace()):
            yield from _trimmed(body, base, start, i + 1)
            start = i + 1
        i += 1
    if start < n:
        yield from _trimmed(body, base, start, n)


def _trimmed(body: str, base: int, s: int, e: int):
    seg = body[s:e]
    if seg.strip():
        lead = len(seg) - len(seg.lstrip())
        trail = len(seg) - len(seg.rstrip())
        yield base + s + lead, base + e - trail


def _canonical_element(word: str) -> str:
    w = word.lower().replace(" ", "")
    if w == "title":
        return "Title"
    if w == "body":
        return "Body"
    digits = "".join(c for c in w if c.isdigit())
    return f"Img{digits}"


def _parse_narrative(sentence: str):
    m = _NARRATIVE_RE.fullmatch(sentence)
    if m is None:
        return None
    phrase = m["phrase"]
    for cat in ("entrance", "emphasis", "exit"):
        hit = _LOOKUP.get((cat, phrase))
        if hit:
            family, direction = hit
            return AnimationStep(
                index=0,
                category=cat,
                element=m["el"],
                effect=family,
                direction=direction,
                duration_s=float(m["dur"]),
                delay_s=float(m["delay"]) if m["delay"] else 0.0,
                repeat=int(m["rep"]) if m["rep"] else 1,
            )
    return None


def _partial_unit(sentence: str, known: set[str] | None, span):
    em = None
    for m in _ELEMENT_WORD_RE.finditer(sentence):
        name = m["q"] if m["q"] is not None else _canonical_element(m["w"])
        if known is None or name in known:
            em = name
            break
        if m["w"] is not None and known is not None:
            # case-insensitive match against known names
            for k in known:
                if k.lower() == m["w"].lower():
                    em = k
                    break
            if em:
                break
    if em is None:
        return None
    lowered = sentence.lower()
    # a phrase from the bank gives category and effect
    for phrase in _ALL_PHRASES:
        if phrase in lowered:
            for cat in ("entrance", "emphasis", "exit"):
                hit = _LOOKUP.get((cat, phrase))
                if hit:
                    family, direction = hit
                    secs = _SECONDS_RE.search(sentence)
                    return ActionUnit(
                        cat,
                        em,
                        family,
                        direction,
                        float(secs["v"]) if secs else None,
                        None,
                        None,
                        span,
                    )
    for cat, verbs in _CATEGORY_VERBS.items():
        if any(re.search(rf"\b{re.escape(v)}\b", lowered) for v in verbs):
            return ActionUnit(cat, em, source_span=span)
    return None


def extract_action_units(text: str, element_names=None) -> list[ActionUnit]:
    """Decompose free text into ordered action units.

    Canonical action lines and narrative sentences parse fully. Other sentences
    yield a partial unit when they name an element (quoted, or title/body/imageN)
    and contain a known effect phrase or category verb; everything else is skipped.
    """
    known = set(element_names) if element_names is not None else None
    units = []
    for s, e in _segments(text):
        sentence = text[s:e]
        step = None
        if _LINE_RE.fullmatch(sentence):
            try:
                step = parse_action_line(sentence)
            except GrammarError:
                step = None
        if step is None:
            step = _parse_narrative(sentence)
        if step is not None:
            units.append(ActionUnit.from_step(step, (s, e)))
            continue
        unit = _partial_unit(sentence, known, (s, e))
        if unit is not None:
            units.append(unit)
    return units


def plan_units(plan: AnimationPlan) -> list[ActionUnit]:
    return [ActionUnit.from_step(s) for s in plan.steps]


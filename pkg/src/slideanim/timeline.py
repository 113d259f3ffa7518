"""Sequential scheduling of plans and per-element state sampling."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from .core_model import AnimationPlan, AnimationStep, PlanValidationError, SlideSpec, plan_structure_report
from .effects import HIDDEN, REST, ElementState, effect_transform

log = logging.getLogger(__name__)

STANDARD_FPS = (1, 2, 4)
_EPS = 1e-9


@dataclass(frozen=True)
class TimelineEntry:
    step: AnimationStep
    start_s: float
    end_s: float


@dataclass(frozen=True)
class Timeline:
    slide_id: str
    entries: tuple[TimelineEntry, ...]
    total_s: float

    def for_element(self, name: str) -> list[TimelineEntry]:
        return [e for e in self.entries if e.step.element == name]


@dataclass(frozen=True)
class FrameState:
    t: float
    elements: dict[str, ElementState]

    def __getitem__(self, name: str) -> ElementState:
        return self.elements[name]

    def key(self) -> tuple:
        """Hashable identity; equal keys render identical frames."""
        return tuple(sorted(self.elements.items()))


def compile_plan(plan: AnimationPlan) -> Timeline:
    report = plan_structure_report(plan)
    if not report.ok:
        raise PlanValidationError(report)
    entries = []
    end = 0.0
    for step in plan.steps:
        start = end + step.delay_s
        end = start + step.span_s
        entries.append(TimelineEntry(step, start, end))
    return Timeline(plan.slide_id, tuple(entries), end)


# the public name mirrors the operation; compile_plan avoids shadowing the builtin
compile = compile_plan


def _active_state(entry: TimelineEntry, t: float, slide: SlideSpec) -> ElementState:
    step = entry.step
    elapsed = (t - entry.start_s) / step.duration_s
    cycle = math.floor(elapsed)
    p = elapsed - cycle
    # float noise right below a cycle boundary
    if 1 - p < _EPS:
        p = 0.0
    element = slide.element(step.element)
    return effect_transform(step.effect, step.category, step.direction, p, element, slide.canvas)


def element_state(timeline: Timeline, slide: SlideSpec, name: str, t: float) -> ElementState:
    state = HIDDEN
    for entry in timeline.for_element(name):
        if t < entry.start_s:
            break
        if t < entry.end_s:
            return _active_state(entry, t, slide)
        state = HIDDEN if entry.step.category == "exit" else REST
    return state


def sample(timeline: Timeline, slide: SlideSpec, t: float) -> FrameState:
    if t < -_EPS or t > timeline.total_s + _EPS:
        raise ValueError(f"t={t} outside [0, {timeline.total_s}]")
    t = min(max(t, 0.0), timeline.total_s)
    return FrameState(t, {el.name: element_state(timeline, slide, el.name, t) for el in slide.elements})


def frame_count(total_s: float, fps: float) -> int:
    n = total_s * fps
    if abs(n - round(n)) < 1e-9:
        return int(round(n)) + 1
    return math.ceil(n) + 1


def frame_times(timeline: Timeline | float, fps: float) -> list[float]:
    """Grid 0, 1/fps, ... through the first point at or past the end."""
    if fps <= 0:
        raise ValueError("fps must be positive")
    if fps not in STANDARD_FPS:
        log.warning("non-standard frame rate %s (expected one of %s)", fps, STANDARD_FPS)
    total = timeline.total_s if isinstance(timeline, Timeline) else float(timeline)
    return [i / fps for i in range(frame_count(total, fps))]

"""Seeded slide-animation dataset synthesis and animation-description metrics."""

from .core_model import (
    AnimationPlan,
    AnimationStep,
    EffectKind,
    Element,
    SlideSpec,
    ValidationReport,
    effect_catalog,
    plan_duration,
    validate_plan,
)
from .grammar import ActionUnit, extract_action_units, format_action_line, parse_action_line, render_narrative
from .metrics import bleu4, coda_match, coda_score, evaluate_corpus, rouge, spice_lite, tokenize
from .timeline import FrameState, Timeline, compile_plan, frame_times, sample

__version__ = "0.1.0"

__all__ = [
    "AnimationPlan",
    "AnimationStep",
    "EffectKind",
    "Element",
    "SlideSpec",
    "ValidationReport",
    "effect_catalog",
    "plan_duration",
    "validate_plan",
    "ActionUnit",
    "extract_action_units",
    "format_action_line",
    "parse_action_line",
    "render_narrative",
    "bleu4",
    "coda_match",
    "coda_score",
    "evaluate_corpus",
    "rouge",
    "spice_lite",
    "tokenize",
    "FrameState",
    "Timeline",
    "compile_plan",
    "frame_times",
    "sample",
]

"""Per-family visual semantics as a function of progress.

Every transform is linear or a closed-form pulse in progress ``p``; exits replay
the paired entrance backwards (exit at ``p`` == entrance at ``1 - p``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .core_model import CANVAS_SIZE, DIRECTIONS, Element, effect_kind

BLINDS_STRIPES = 6
CHECKER_ROWS = 6
CHECKER_COLS = 8
PINWHEEL_BLADES = 2
# default Wipe direction when a plan omits one
WIPE_DEFAULT = "bottom"

REVEAL_FAMILIES = ("Wipe", "Box", "Blinds", "Checkerboard", "Circle", "Pinwheel")


@dataclass(frozen=True)
class Mask:
    kind: str  # wipe | box | blinds | checkerboard | circle | pinwheel
    progress: float
    direction: str | None = None
    n: int = 0
    rows: int = 0
    cols: int = 0

    def coverage(self, w: int, h: int) -> np.ndarray:
        """Boolean (h, w) array of revealed pixels in element-local coordinates."""
        v, u = np.mgrid[0:h, 0:w]
        return self.reveal(u + 0.5, v + 0.5, w, h)

    def reveal(self, u: np.ndarray, v: np.ndarray, w: float, h: float) -> np.ndarray:
        """Revealed test for local points (u right, v down) inside a w x h box."""
        p = self.progress
        if p <= 0:
            return np.zeros(np.shape(u), dtype=bool)
        if p >= 1:
            return np.ones(np.shape(u), dtype=bool)
        if self.kind == "wipe":
            d = self.direction or WIPE_DEFAULT
            if d == "left":
                return u < p * w
            if d == "right":
                return u > (1 - p) * w
            if d == "top":
                return v < p * h
            return v > (1 - p) * h
        if self.kind == "box":
            return (np.abs(u - w / 2) < p * w / 2) & (np.abs(v - h / 2) < p * h / 2)
        if self.kind == "blinds":
            stripe = h / self.n
            return np.mod(v, stripe) < p * stripe
        if self.kind == "checkerboard":
            tw, th = w / self.cols, h / self.rows
            c = np.clip(np.floor(u / tw), 0, self.cols - 1)
            r = np.clip(np.floor(v / th), 0, self.rows - 1)
            start = (c + np.mod(r, 2) / 2) / self.cols
            # each tile wipes left->right over half a column period once its start time passes
            sweep = 1.0 / (2 * self.cols)
            frac = np.clip((p - start) / sweep, 0.0, 1.0)
            return (u - c * tw) < frac * tw
        if self.kind == "circle":
            ax, ay = p * w / math.sqrt(2), p * h / math.sqrt(2)
            return ((u - w / 2) / ax) ** 2 + ((v - h / 2) / ay) ** 2 < 1.0
        if self.kind == "pinwheel":
            ang = np.degrees(np.arctan2(v - h / 2, u - w / 2)) % 360.0
            blade = 360.0 / self.n
            return np.mod(ang, blade) < blade * p
        raise ValueError(f"unknown mask kind {self.kind!r}")


@dataclass(frozen=True)
class ElementState:
    visible: bool = True
    alpha: float = 1.0
    dx: float = 0.0
    dy: float = 0.0
    scale: float = 1.0
    rotation: float = 0.0
    mask: Mask | None = None
    brightness: float = 1.0

    @property
    def at_rest(self) -> bool:
        return self == REST


REST = ElementState()
HIDDEN = ElementState(visible=False, alpha=0.0)


def _snap(value: float, rest: float) -> float:
    # sin(pi) is 1e-16, not 0
    return rest if abs(value - rest) < 1e-12 else value


def _fly_offset(direction: str, el: Element, canvas: tuple[int, int], away: float) -> tuple[float, float]:
    """Offset at ``away`` in [0, 1]: 0 = rest, 1 = fully off-canvas on ``direction``'s side."""
    cw, ch = canvas
    if direction == "left":
        return -(el.x + el.w) * away, 0.0
    if direction == "right":
        return (cw - el.x) * away, 0.0
    if direction == "top":
        return 0.0, -(el.y + el.h) * away
    if direction == "bottom":
        return 0.0, (ch - el.y) * away
    raise ValueError(f"bad direction {direction!r}")


def _reveal(family: str, direction: str | None, q: float) -> ElementState:
    """Entrance pose at forward progress q."""
    if family == "Fade":
        return replace(REST, alpha=q)
    if q >= 1:
        return REST
    if family == "Wipe":
        return replace(REST, mask=Mask("wipe", q, direction or WIPE_DEFAULT))
    if family == "Box":
        return replace(REST, mask=Mask("box", q))
    if family == "Blinds":
        return replace(REST, mask=Mask("blinds", q, n=BLINDS_STRIPES))
    if family == "Checkerboard":
        return replace(REST, mask=Mask("checkerboard", q, rows=CHECKER_ROWS, cols=CHECKER_COLS))
    if family == "Circle":
        return replace(REST, mask=Mask("circle", q))
    if family == "Pinwheel":
        return replace(REST, mask=Mask("pinwheel", q, n=PINWHEEL_BLADES))
    raise ValueError(f"no reveal semantics for {family!r}")


def _emphasis(family: str, p: float) -> ElementState:
    pulse = math.sin(math.pi * p)
    if family == "Spin":
        return replace(REST, rotation=(360.0 * p) % 360.0)
    if family == "Teeter":
        return replace(REST, rotation=_snap(5.0 * math.sin(4 * math.pi * p), 0.0))
    if family == "FlashBulb":
        return replace(REST, brightness=_snap(1 + 0.75 * pulse, 1.0))
    if family == "GrowShrink":
        return replace(REST, scale=_snap(1 + 0.5 * pulse, 1.0))
    if family == "Pulse":
        return replace(REST, scale=_snap(1 + 0.1 * pulse, 1.0))
    if family == "Transparency":
        return replace(REST, alpha=_snap(1 - 0.5 * pulse, 1.0))
    if family == "Darken":
        return replace(REST, brightness=_snap(1 - 0.4 * pulse, 1.0))
    if family == "Lighten":
        return replace(REST, brightness=_snap(1 + 0.4 * pulse, 1.0))
    if family == "Blink":
        return replace(REST, alpha=0.0 if 0.25 <= p < 0.75 else 1.0)
    if family == "Wave":
        return replace(REST, dy=_snap(-12.0 * math.sin(2 * math.pi * p), 0.0))
    raise ValueError(f"no emphasis semantics for {family!r}")


def effect_transform(
    family: str,
    category: str,
    direction: str | None,
    p: float,
    element: Element | None = None,
    canvas: tuple[int, int] = CANVAS_SIZE,
) -> ElementState:
    """Visual state of an element under one effect at progress ``p`` in [0, 1].

    Fly families need ``element`` (and the canvas size) to know how far off-canvas
    the start/end pose lies.
    """
    kind = effect_kind(family)
    if not kind.supports(category):
        raise ValueError(f"{family} does not support {category}")
    if kind.directional and direction not in DIRECTIONS:
        raise ValueError(f"{family} requires a direction")
    p = min(max(float(p), 0.0), 1.0)
    if category == "emphasis":
        return _emphasis(family, p)
    q = p if category == "entrance" else 1.0 - p
    if family in ("FlyFrom", "FlyTo"):
        if element is None:
            raise ValueError("fly effects need the element geometry")
        dx, dy = _fly_offset(direction, element, canvas, 1.0 - q)
        return replace(REST, dx=dx, dy=dy) if q < 1 else REST
    return _reveal(family, direction, q)

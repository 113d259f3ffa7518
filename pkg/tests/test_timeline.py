from __future__ import annotations

import logging
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from _helpers import make_slide, step
from slideanim.core_model import AnimationPlan, PlanValidationError, effect_catalog, entrance_exit_pairs
from slideanim.effects import HIDDEN, REST, Mask, effect_transform
from slideanim.timeline import compile_plan, element_state, frame_count, frame_times, sample

SLIDE = make_slide()
IMG = SLIDE.element("Img1")
EMPHASIS = [k.family for k in effect_catalog() if k.categories == frozenset({"emphasis"})]


def test_sequential_schedule():
    plan = AnimationPlan(
        "s",
        (
            step(1, "entrance", "Title", "Fade", dur=1.0, delay=0.5),
            step(2, "entrance", "Img1", "Box", dur=2.0),
            step(3, "emphasis", "Img1", "Spin", dur=1.0, delay=1.0, rep=3),
        ),
    )
    tl = compile_plan(plan)
    assert [(e.start_s, e.end_s) for e in tl.entries] == [(0.5, 1.5), (1.5, 3.5), (4.5, 7.5)]
    assert tl.total_s == 7.5
    assert [e.step.index for e in tl.for_element("Img1")] == [2, 3]


def test_compile_rejects_broken_plans():
    with pytest.raises(PlanValidationError):
        compile_plan(AnimationPlan("s", (step(1, "exit", "Title", "Fade"),)))


def test_repeats_are_sawtooth():
    plan = AnimationPlan("s", (step(1, "entrance", "Img1", "Fade"), step(2, "emphasis", "Img1", "Spin", dur=2.0, rep=2)))
    tl = compile_plan(plan)
    assert element_state(tl, SLIDE, "Img1", 1.5).rotation == pytest.approx(90.0)
    assert element_state(tl, SLIDE, "Img1", 3.5).rotation == pytest.approx(90.0)
    assert element_state(tl, SLIDE, "Img1", 3.0).rotation == 0.0  # cycle boundary
    assert element_state(tl, SLIDE, "Img1", 5.0) == REST


def test_lifecycle_states():
    plan = AnimationPlan("s", (step(1, "entrance", "Title", "Fade", delay=1.0), step(2, "exit", "Title", "Fade")))
    tl = compile_plan(plan)
    assert element_state(tl, SLIDE, "Title", 0.5) == HIDDEN
    assert element_state(tl, SLIDE, "Title", 1.25).alpha == 0.25
    assert element_state(tl, SLIDE, "Title", 2.0).alpha == 1.0
    assert element_state(tl, SLIDE, "Title", 3.0) == HIDDEN
    assert element_state(tl, SLIDE, "Img1", 1.0) == HIDDEN  # never animated


def test_sample_bounds():
    tl = compile_plan(AnimationPlan("s", (step(1, "entrance", "Title", "Fade", dur=2.0),)))
    assert sample(tl, SLIDE, 2.0)["Title"] == REST
    assert set(sample(tl, SLIDE, 0.0).elements) == set(SLIDE.names)
    with pytest.raises(ValueError):
        sample(tl, SLIDE, 2.5)
    with pytest.raises(ValueError):
        sample(tl, SLIDE, -0.1)


@pytest.mark.parametrize("total, fps, n", [(4.0, 2, 9), (4.1, 2, 10), (0.0, 4, 1), (3.0, 1, 4), (2.25, 4, 10), (0.3, 1, 2)])
def test_frame_count(total, fps, n):
    assert frame_count(total, fps) == n
    times = frame_times(total, fps)
    assert len(times) == n and times[-1] >= total - 1e-9


def test_nonstandard_fps_warns(caplog):
    with caplog.at_level(logging.WARNING):
        frame_times(1.0, 3)
    assert "non-standard" in caplog.text
    with pytest.raises(ValueError):
        frame_times(1.0, 0)


# ---------------------------------------------------------------- effect semantics


@given(st.floats(0, 1))
def test_fade_and_fly(p):
    assert effect_transform("Fade", "entrance", None, p).alpha == p
    st_ = effect_transform("FlyFrom", "entrance", "left", p, IMG)
    expected = -(IMG.x + IMG.w) * (1 - p)
    assert st_.dx == pytest.approx(expected, abs=1e-9) and st_.dy == 0


def test_fly_start_pose_is_off_canvas():
    for d in ("left", "right", "top", "bottom"):
        s = effect_transform("FlyFrom", "entrance", d, 0.0, IMG)
        x0, y0 = IMG.x + s.dx, IMG.y + s.dy
        assert x0 + IMG.w <= 0 or x0 >= 1280 or y0 + IMG.h <= 0 or y0 >= 720
        assert effect_transform("FlyFrom", "entrance", d, 1.0, IMG) == REST


@given(st.sampled_from(entrance_exit_pairs()), st.floats(0, 1))
def test_exit_is_reversed_entrance(pair, p):
    enter, leave, d = pair
    a = effect_transform(leave, "exit", d, p, IMG)
    b = effect_transform(enter, "entrance", d, 1 - p, IMG)
    assert a == b


@pytest.mark.parametrize("family", EMPHASIS)
def test_emphasis_rests_at_both_ends(family):
    assert effect_transform(family, "emphasis", None, 0.0) == REST
    assert effect_transform(family, "emphasis", None, 1.0) == REST


def test_emphasis_midpoints():
    mid = lambda f: effect_transform(f, "emphasis", None, 0.5)  # noqa: E731
    assert mid("Spin").rotation == 180.0
    assert mid("FlashBulb").brightness == 1.75
    assert mid("GrowShrink").scale == 1.5
    assert mid("Blink").alpha == 0.0
    assert effect_transform("Teeter", "emphasis", None, 0.125).rotation == pytest.approx(5.0)
    assert effect_transform("Wave", "emphasis", None, 0.25).dy == pytest.approx(-12.0)


def test_transform_argument_errors():
    with pytest.raises(ValueError):
        effect_transform("Spin", "entrance", None, 0.5)
    with pytest.raises(ValueError):
        effect_transform("Wipe", "entrance", None, 0.5)
    with pytest.raises(ValueError):
        effect_transform("FlyFrom", "entrance", "left", 0.5)


def test_checkerboard_tile_timing():
    w, h = 160, 120
    tile = lambda m, r, c: m.coverage(w, h)[r * 20 : (r + 1) * 20, c * 20 : (c + 1) * 20]  # noqa: E731
    first = Mask("checkerboard", 1 / 16, rows=6, cols=8)
    assert tile(first, 0, 0).all() and not tile(first, 1, 0).any()
    late = Mask("checkerboard", 0.9375, rows=6, cols=8)
    assert tile(late, 0, 7).all() and not tile(late, 1, 7).any()


def test_circle_and_pinwheel_extent():
    w, h = 200, 100
    assert Mask("circle", 0.999).coverage(w, h).mean() > 0.99
    for p in (0.25, 0.5, 0.75):
        # angular sweep: area share equals p on a square at multiples of 45 degrees
        assert Mask("pinwheel", p, n=2).coverage(h, h).mean() == pytest.approx(p, abs=0.02)
        assert Mask("wipe", p, "left").coverage(w, h).mean() == pytest.approx(p, abs=0.01)
        assert Mask("blinds", p, n=6).coverage(w, h).mean() == pytest.approx(p, abs=0.05)


@given(st.floats(0.01, 0.99))
def test_box_area_is_quadratic(p):
    m = Mask("box", p)
    assert m.coverage(200, 200).mean() == pytest.approx(p * p, abs=0.02)
    assert not math.isnan(float(np.sum(m.coverage(3, 3))))

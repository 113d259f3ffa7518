from __future__ import annotations

import csv
import json

import pytest

from _helpers import make_slide, step
from slideanim.core_model import AnimationPlan
from slideanim.stats import REPORT_FILES, DatasetStats, dataset_stats, emit_reports
from slideanim.synthesizer import DatasetManifest, TripletRecord

PLANS = [
    AnimationPlan(
        "s",
        (
            step(1, "entrance", "Title", "Box"),
            step(2, "entrance", "Img1", "FlyFrom", "left", dur=1.5, delay=0.5),
            step(3, "emphasis", "Img1", "Spin"),
            step(4, "exit", "Img1", "Fade"),
        ),
    ),
    AnimationPlan(
        "s",
        (
            step(1, "entrance", "Title", "Blinds", dur=2.0),
            step(2, "entrance", "Body", "Box"),
            step(3, "entrance", "Img1", "Pinwheel"),
            step(4, "entrance", "Img2", "Pinwheel"),
            step(5, "exit", "Title", "Wipe", "top", delay=1.0),
            step(6, "exit", "Img2", "Checkerboard"),
        ),
    ),
]


def _toy_dataset(root, bad: bool = False) -> DatasetManifest:
    slide = make_slide()
    (root / "s").mkdir(parents=True)
    (root / "s" / "slide.json").write_text(json.dumps(slide.to_dict()))
    records = []
    for i, plan in enumerate(PLANS + ([None] if bad else [])):
        d = root / "s" / f"{i:02d}"
        d.mkdir()
        (d / "plan.json").write_text("{oops" if plan is None else json.dumps(plan.to_dict()))
        records.append(TripletRecord("s", i, "en", f"s/{i:02d}/description.txt", f"s/{i:02d}/plan.json", None, [2], "train"))
    # unsorted on purpose
    manifest = DatasetManifest("toy", 1, {}, records[::-1], root)
    (root / "manifest.json").write_text(manifest.to_json())
    return manifest


def test_toy_counts(tmp_path):
    stats = dataset_stats(_toy_dataset(tmp_path))
    assert (stats.n_schemes, stats.total_instances, stats.mean_steps) == (2, 10, 5.0)
    assert stats.step_counts == {4: 1, 6: 1}
    assert stats.effect_percent("entrance", "text", "Box") == pytest.approx(200 / 3)
    assert stats.effect_percent("entrance", "image", "Pinwheel") == pytest.approx(200 / 3)
    assert stats.family_percent("entrance", "image", "FlyFrom") == pytest.approx(100 / 3)
    assert stats.image_share == 0.6
    assert stats.durations[1.0] == 8 and stats.delays[0.5] == 1


def test_bad_plans_are_excluded(tmp_path):
    _toy_dataset(tmp_path, bad=True)
    stats = dataset_stats(tmp_path / "manifest.json")
    assert stats.excluded == 1 and stats.n_schemes == 2


def test_merge_equals_joint():
    a, b = DatasetStats(), DatasetStats()
    kinds = {"Title": "text", "Body": "text", "Img1": "image", "Img2": "image"}
    a.add_plan(PLANS[0], kinds)
    b.add_plan(PLANS[1], kinds)
    joint = DatasetStats()
    for p in PLANS:
        joint.add_plan(p, kinds)
    assert a.merge(b) == joint


def test_reports(tmp_path):
    stats = dataset_stats(_toy_dataset(tmp_path / "ds"))
    written = emit_reports(stats, tmp_path / "out", svg=True)
    names = {p.name for p in written}
    assert set(REPORT_FILES) <= names and "step_counts.svg" in names
    with open(tmp_path / "out" / "effect_frequencies.csv") as fh:
        rows = list(csv.DictReader(fh))
    box = next(r for r in rows if r["category"] == "entrance" and r["kind"] == "text" and r["effect"] == "Box")
    assert (box["count"], box["percent"]) == ("2", "66.667")
    steps = (tmp_path / "out" / "step_counts.csv").read_text().splitlines()
    assert steps == ["steps,count,percent", "4,1,50.000", "6,1,50.000"]
    summary = (tmp_path / "out" / "summary.txt").read_text()
    assert "mean_steps_per_scheme: 5.0000" in summary and "image_share_percent: 60.00" in summary


def test_reports_are_deterministic(tmp_path):
    stats = dataset_stats(_toy_dataset(tmp_path / "ds"))
    emit_reports(stats, tmp_path / "a")
    emit_reports(dataset_stats(tmp_path / "ds"), tmp_path / "b")
    for name in REPORT_FILES:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_empty_inputs_refused(tmp_path):
    with pytest.raises(ValueError):
        emit_reports(DatasetStats(), tmp_path)
    with pytest.raises(ValueError):
        dataset_stats(DatasetManifest("e", 0, {}, [], tmp_path))

from __future__ import annotations

import hashlib
import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer
from pathlib import Path

import pytest

from _helpers import synth_pairs
from slideanim.config import PAPER_MEAN_STEPS, SynthConfig, load_config, load_preset, resolve_effect_weights
from slideanim.core_model import validate_plan
from slideanim.grammar import render_narrative
from slideanim.synthesizer import (
    DatasetManifest,
    derive_seed,
    describe_via_service,
    split_tag,
    synth_dataset,
    synth_scheme,
    synth_slide,
)

SMOKE = load_preset("smoke")


def _tree_digest(root: Path) -> dict[str, str]:
    return {
        str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


# ---------------------------------------------------------------- seeding and generation


def test_derive_seed():
    assert derive_seed(5, 1, 2) == derive_seed(5, 1, 2)
    seeds = {derive_seed(5, 1, i, j) for i in range(20) for j in range(20)}
    assert len(seeds) == 400
    assert derive_seed(5, 0, 1) != derive_seed(6, 0, 1)
    assert 0 <= derive_seed(1, 2) < 2**64


def test_slide_generation():
    cfg = SynthConfig()
    for i in range(200):
        slide = synth_slide(derive_seed(9, 0, i), cfg, f"slide_{i:04d}", "zh" if i % 2 else "en")
        assert slide == synth_slide(derive_seed(9, 0, i), cfg, f"slide_{i:04d}", "zh" if i % 2 else "en")
        kinds = [el.kind for el in slide.elements]
        assert kinds[0] == "title" and 1 <= kinds.count("image") <= 4
        els = slide.elements
        for a in range(len(els)):
            for b in range(a + 1, len(els)):
                p, q = els[a], els[b]
                ox = max(0, min(p.x + p.w, q.x + q.w) - max(p.x, q.x))
                oy = max(0, min(p.y + p.h, q.y + q.h) - max(p.y, q.y))
                assert ox * oy <= 0.10 * min(p.area, q.area) + 1e-9


def test_schemes_are_valid_and_seeded():
    for slide, plan in synth_pairs(300, seed=21):
        assert validate_plan(plan, slide, strict=True).ok
        assert 4 <= len(plan.steps) <= 15
        # every element is animated at least once
        assert {s.element for s in plan.steps} == set(slide.names)
        for s in plan.steps:
            assert s.repeat == 1 or s.category == "emphasis"
    slide, plan = synth_pairs(1, seed=21)[0]
    assert synth_scheme(derive_seed(21, 1, 0, 0), slide, SynthConfig()) == plan


def test_split_tag_rate():
    tags = [split_tag(f"slide_{i:04d}", j) for i in range(300) for j in range(40)]
    assert tags.count("test") / len(tags) == pytest.approx(1 / 12, abs=0.01)
    assert split_tag("slide_0001", 3) == split_tag("slide_0001", 3)


# ---------------------------------------------------------------- config


def test_step_pmf_is_calibrated():
    cfg = SynthConfig()
    pmf = cfg.step_count_pmf()
    assert set(pmf) == set(range(4, 16)) and sum(pmf.values()) == pytest.approx(1.0)
    n_el = cfg.element_count_pmf()
    mean = 0.0
    for n, pn in n_el.items():
        feas = {k: p for k, p in pmf.items() if k >= n}
        mean += pn * sum(k * p for k, p in feas.items()) / sum(feas.values())
    assert mean == pytest.approx(PAPER_MEAN_STEPS, abs=1e-9)


def test_effect_weights_spread():
    table = resolve_effect_weights("exit", {"Wipe": 22.4, "Fade": 17.1})
    assert sum(table.values()) == pytest.approx(1.0)
    assert table[("Wipe", "left")] == pytest.approx(0.056)
    assert table[("Fade", None)] == pytest.approx(0.171)


def test_config_loading(tmp_path):
    assert load_config(None) == load_preset("paper_default") == SynthConfig()
    assert load_config("smoke").n_slides == 3
    y = tmp_path / "c.yaml"
    y.write_text("preset: smoke\nseed: 99\nfps: [1, 4]\n")
    cfg = load_config(y)
    assert (cfg.seed, cfg.n_slides, cfg.fps) == (99, 3, (1, 4))
    j = tmp_path / "c.json"
    j.write_text(json.dumps({"schemes_per_slide": 5}))
    assert load_config(j).schemes_per_slide == 5
    j.write_text(json.dumps({"bogus": 1}))
    with pytest.raises(ValueError):
        load_config(j)
    with pytest.raises(ValueError):
        SynthConfig(effect_weights={"entrance/text": {"Spin": 10}})
    assert SynthConfig.from_dict(json.loads(json.dumps(SMOKE.to_dict()))) == SMOKE


# ---------------------------------------------------------------- datasets


def test_dataset_is_bit_identical(tmp_path):
    a = synth_dataset(SMOKE, tmp_path / "a")
    synth_dataset(SMOKE, tmp_path / "b")
    assert len(a.complete) == 6
    assert _tree_digest(tmp_path / "a") == _tree_digest(tmp_path / "b")
    rec = a.records[0]
    for rel in (rec.plan, rec.description, rec.frames[0]):
        assert (tmp_path / "a" / rel).exists()
    assert (tmp_path / "a" / rec.slide_id / "slide.json").is_file()
    loaded = DatasetManifest.load(tmp_path / "a" / "manifest.json")
    assert loaded == DatasetManifest.load(tmp_path / "a") and loaded.records == a.records


def test_resume(tmp_path):
    root = tmp_path / "ds"
    first = synth_dataset(SMOKE, root)
    assert (first.generated, first.resumed) == (6, 0)
    again = synth_dataset(SMOKE, root)
    assert (again.generated, again.resumed) == (0, 6)
    assert again.to_json() == first.to_json()
    # a torn record (missing render manifest) is rebuilt
    (root / first.records[2].frames[0]).parent.joinpath("render.manifest").unlink()
    torn = synth_dataset(SMOKE, root)
    assert (torn.generated, torn.resumed) == (1, 5)
    assert synth_dataset(SMOKE, root, resume=False).generated == 6
    # a different config never reuses records
    assert synth_dataset(SMOKE.replace(seed=8), root).generated == 6


def test_multi_fps_layout(tmp_path):
    cfg = SMOKE.replace(n_slides=1, schemes_per_slide=1, fps=(1, 2))
    m = synth_dataset(cfg, tmp_path)
    rec = m.records[0]
    assert rec.frames == [f"{rec.slide_id}/00/fps1/frames", f"{rec.slide_id}/00/fps2/frames"]
    n1 = len(list((tmp_path / rec.frames[0]).iterdir()))
    n2 = len(list((tmp_path / rec.frames[1]).iterdir()))
    assert n2 in (2 * n1 - 1, 2 * n1)


def test_plan_only_and_parallel(tmp_path):
    cfg = SMOKE.replace(render=False, n_slides=4)
    serial = synth_dataset(cfg, tmp_path / "s", jobs=1)
    parallel = synth_dataset(cfg, tmp_path / "p", jobs=2)
    assert serial.to_json() == parallel.to_json()
    assert all(r.frames is None for r in serial.records)
    assert _tree_digest(tmp_path / "s") == _tree_digest(tmp_path / "p")


# ---------------------------------------------------------------- external describer


class _Stub(BaseHTTPRequestHandler):
    mode = "echo"
    seen: list = []

    def do_POST(self):  # noqa: N802
        body = self.rfile.read(int(self.headers["Content-Length"])).decode()
        type(self).seen.append((self.headers.get("Authorization"), body))
        reply = type(self).reply
        if type(self).mode == "drop":
            reply = reply.rsplit(". ", 1)[0] + "."
        data = reply.encode()
        self.send_response(200)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


@pytest.fixture
def stub_server():
    server = HTTPServer(("127.0.0.1", 0), _Stub)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield server
    server.shutdown()


def test_service_accepts_complete_reply(stub_server, monkeypatch):
    slide, plan = synth_pairs(1, seed=5)[0]
    _Stub.reply, _Stub.mode, _Stub.seen = "A rewrite. " + render_narrative(plan), "echo", []
    monkeypatch.setenv("SLIDEANIM_ENDPOINT_TOKEN", "t0k")
    got = describe_via_service(plan, f"http://127.0.0.1:{stub_server.server_port}/", 5, slide.names)
    assert not got.fallback and got.text.endswith(render_narrative(plan))
    auth, body = _Stub.seen[0]
    assert auth == "Bearer t0k" and body.startswith("1. (")


def test_service_incomplete_reply_falls_back(stub_server):
    slide, plan = synth_pairs(1, seed=5)[0]
    _Stub.reply, _Stub.mode = render_narrative(plan), "drop"
    got = describe_via_service(plan, f"http://127.0.0.1:{stub_server.server_port}/", 5, slide.names)
    assert got.fallback and got.text == render_narrative(plan)
    assert "incomplete" in got.reason


def test_service_unreachable_falls_back():
    slide, plan = synth_pairs(1, seed=5)[0]
    got = describe_via_service(plan, "http://127.0.0.1:9/", 1, slide.names)
    assert got.fallback and got.text == render_narrative(plan)


def test_dataset_records_service_fallback(tmp_path):
    cfg = SMOKE.replace(n_slides=1, schemes_per_slide=1, render=False, external_endpoint="http://127.0.0.1:9/", external_timeout=0.5)
    rec = synth_dataset(cfg, tmp_path).records[0]
    assert rec.status == "complete" and rec.annotation.startswith("fallback")

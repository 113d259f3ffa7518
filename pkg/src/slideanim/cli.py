"""Command-line entry point: ``slideanim {synth,render,describe,eval,stats,validate}``.

Precedence for synthesis settings: preset defaults < ``--config`` file < command-line flags.
Exit status: 0 success, 1 validation failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

from .config import PRESETS, SynthConfig, load_config
from .core_model import AnimationPlan, PlanError, SlideSpec, validate_plan
from .grammar import render_description
from .metrics import evaluate_corpus
from .renderer import RenderOptions, render_video
from .stats import dataset_stats, emit_reports, summary_text
from .synthesizer import synth_dataset

log = logging.getLogger("slideanim")

EXIT_OK, EXIT_INVALID, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    """Bad arguments or unreadable input; maps to exit status 2."""


def default_jobs() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:  # not on every platform
        return os.cpu_count() or 1


def _banner(command: str, settings: dict) -> None:
    # enough to rerun the command exactly
    print(f"# slideanim {command}", file=sys.stderr)
    print("# effective config: " + json.dumps(settings, sort_keys=True, ensure_ascii=False), file=sys.stderr)


def _read_json(path: str | Path) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except ValueError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc


def _load_plan(path: str | Path) -> AnimationPlan:
    try:
        return AnimationPlan.from_dict(_read_json(path))
    except (PlanError, KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"{path}: malformed plan: {exc}") from exc


def _load_slide(path: str | Path) -> SlideSpec:
    try:
        return SlideSpec.from_dict(_read_json(path))
    except (PlanError, KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"{path}: malformed slide: {exc}") from exc


def _slide_for(plan_path: str, slide_arg: str | None) -> SlideSpec:
    if slide_arg:
        return _load_slide(slide_arg)
    # dataset layout: <slide_id>/slide.json next to <slide_id>/<scheme>/plan.json
    guess = Path(plan_path).resolve().parent.parent / "slide.json"
    if not guess.is_file():
        raise UsageError("no --slide given and no slide.json found next to the plan's directory")
    return _load_slide(guess)


def _read_lines(path: str) -> list[str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    return text.splitlines()


# ------------------------------------------------------------------ commands


def synth_config_from_args(args: argparse.Namespace) -> SynthConfig:
    try:
        cfg = load_config(args.config)
    except (OSError, ValueError, TypeError) as exc:
        raise UsageError(f"config {args.config!r}: {exc}") from exc
    overrides = {
        "seed": args.seed,
        "n_slides": args.n_slides,
        "schemes_per_slide": args.schemes,
        "fps": tuple(args.fps) if args.fps else None,
        "placeholder_text": args.placeholder_text,
        "placeholder_images": args.placeholder_images,
        "asset_root": args.asset_root,
        "external_endpoint": args.external_endpoint,
    }
    if args.plan_only:
        overrides["render"] = False
    overrides = {k: v for k, v in overrides.items() if v is not None}
    try:
        return cfg.replace(**overrides)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc


def cmd_synth(args: argparse.Namespace) -> int:
    cfg = synth_config_from_args(args)
    _banner("synth", {"out": str(args.out), "jobs": args.jobs, "resume": args.resume, **cfg.to_dict()})
    t0 = time.perf_counter()
    manifest = synth_dataset(cfg, args.out, jobs=args.jobs, resume=args.resume)
    n_bad = len(manifest.records) - len(manifest.complete)
    print(
        f"{len(manifest.complete)} triplets in {args.out} "
        f"({manifest.generated} generated, {manifest.resumed} reused, {n_bad} incomplete) "
        f"in {time.perf_counter() - t0:.1f}s"
    )
    return EXIT_OK if n_bad == 0 else EXIT_INVALID


def cmd_render(args: argparse.Namespace) -> int:
    plan = _load_plan(args.plan)
    slide = _slide_for(args.plan, args.slide)
    opts = RenderOptions(args.placeholder_text, args.placeholder_images, args.asset_root)
    _banner("render", {"plan": args.plan, "slide": slide.slide_id, "fps": args.fps, "out": str(args.out),
                       "placeholder_text": opts.placeholder_text, "placeholder_images": opts.placeholder_images})
    report = validate_plan(plan, slide)
    if not report.ok:
        _print_report(report)
        return EXIT_INVALID
    manifest = render_video(slide, plan, args.fps, args.out, opts)
    print(f"{manifest.n_frames} frames ({manifest.total_s:g}s at {args.fps:g} fps) in {args.out}")
    return EXIT_OK


def cmd_describe(args: argparse.Namespace) -> int:
    plan = _load_plan(args.plan)
    _banner("describe", {"plan": args.plan})
    sys.stdout.write(render_description(plan))
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    preds, refs = _read_lines(args.pred), _read_lines(args.ref)
    if len(preds) != len(refs):
        raise UsageError(f"{args.pred} has {len(preds)} lines but {args.ref} has {len(refs)}")
    if not preds:
        raise UsageError("no descriptions to score")
    _banner("eval", {"pred": args.pred, "ref": args.ref, "out": str(args.out)})
    report = evaluate_corpus(list(zip(preds, refs)))
    report.write(args.out)
    sys.stdout.write(report.summary())
    return EXIT_OK


def cmd_stats(args: argparse.Namespace) -> int:
    _banner("stats", {"manifest": args.manifest, "out": str(args.out), "svg": args.svg})
    try:
        stats = dataset_stats(args.manifest)
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"{args.manifest}: {exc}") from exc
    emit_reports(stats, args.out, svg=args.svg)
    sys.stdout.write(summary_text(stats))
    return EXIT_OK


def _print_report(report) -> None:
    for v in report.violations:
        print(f"{v.severity}: [{v.kind}] {v.message}")


def cmd_validate(args: argparse.Namespace) -> int:
    plan = _load_plan(args.plan)
    slide = _slide_for(args.plan, args.slide)
    _banner("validate", {"plan": args.plan, "slide": slide.slide_id, "strict": args.strict})
    try:
        report = validate_plan(plan, slide, strict=args.strict)
    except PlanError as exc:
        print(f"error: {exc}")
        return EXIT_INVALID
    _print_report(report)
    print(f"{'ok' if report.ok else 'invalid'}: {len(report.errors)} errors, {len(report.warnings)} warnings")
    return EXIT_OK if report.ok else EXIT_INVALID


# ------------------------------------------------------------------ parser


def _render_flags(p: argparse.ArgumentParser, default: bool | None) -> None:
    p.add_argument("--placeholder-text", action=argparse.BooleanOptionalAction, default=default,
                   help="draw text as hatched blocks instead of glyphs")
    p.add_argument("--placeholder-images", action=argparse.BooleanOptionalAction, default=default,
                   help="draw images as seeded patterns instead of loading assets")
    p.add_argument("--asset-root", default=None, help="directory holding image-pool assets")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slideanim", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("synth", help="build a text/plan/frames dataset")
    p.add_argument("--config", default="paper_default", help=f"preset ({', '.join(PRESETS)}) or JSON/YAML file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--n-slides", type=int, default=None)
    p.add_argument("--schemes", type=int, default=None, help="schemes per slide")
    p.add_argument("--fps", type=float, nargs="+", default=None, help="one or more frame rates")
    p.add_argument("--out", type=Path, default=Path("dataset"))
    p.add_argument("--plan-only", action="store_true", help="skip rendering")
    p.add_argument("--resume", action="store_true", help="reuse records already on disk for this config")
    p.add_argument("--external-endpoint", default=None,
                   help="text-generation service URL (token from SLIDEANIM_ENDPOINT_TOKEN)")
    p.add_argument("--jobs", type=int, default=default_jobs())
    _render_flags(p, None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("render", help="render one plan to frames")
    p.add_argument("plan")
    p.add_argument("--slide", default=None, help="slide.json (default: ../slide.json from the plan)")
    p.add_argument("--fps", type=float, default=2.0)
    p.add_argument("--out", type=Path, default=Path("render_out"))
    _render_flags(p, True)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("describe", help="print the action list and narrative of a plan")
    p.add_argument("plan")
    p.set_defaults(func=cmd_describe)

    p = sub.add_parser("eval", help="score line-aligned prediction and reference files")
    p.add_argument("--pred", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--out", type=Path, default=Path("eval_out"))
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("stats", help="dataset statistics reports")
    p.add_argument("manifest")
    p.add_argument("--out", type=Path, default=Path("stats_out"))
    p.add_argument("--svg", action="store_true", help="also write bar charts")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("validate", help="check a plan against its slide")
    p.add_argument("plan")
    p.add_argument("--slide", default=None)
    p.add_argument("--strict", action="store_true", help="treat synthesis bounds as errors")
    p.set_defaults(func=cmd_validate)
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with 2 on unknown flags
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if getattr(args, "jobs", 1) < 1:
        parser.error("--jobs must be at least 1")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"slideanim {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv: list[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()

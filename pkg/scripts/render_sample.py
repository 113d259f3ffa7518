#!/usr/bin/env python3
"""Render a small dataset and report throughput; optionally mux each record to MP4."""

from __future__ import annotations

import argparse
import time
from pathlib import Path

from slideanim.config import load_config
from slideanim.renderer import mux_frames
from slideanim.synthesizer import synth_dataset


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default="smoke")
    ap.add_argument("--n-slides", type=int, default=25)
    ap.add_argument("--schemes", type=int, default=4)
    ap.add_argument("--fps", type=float, nargs="+", default=[2])
    ap.add_argument("--out", default="runs/render_sample")
    ap.add_argument("--glyphs", action="store_true", help="draw real text instead of placeholder blocks")
    ap.add_argument("--mp4", action="store_true", help="mux frames with ffmpeg")
    args = ap.parse_args()

    cfg = load_config(args.config).replace(
        n_slides=args.n_slides, schemes_per_slide=args.schemes, fps=tuple(args.fps), placeholder_text=not args.glyphs
    )
    t0 = time.perf_counter()
    manifest = synth_dataset(cfg, args.out, resume=False)
    dt = time.perf_counter() - t0
    n = len(manifest.complete)
    print(f"{n} triplets in {dt:.1f}s ({dt / max(n, 1):.2f}s per triplet)")
    if args.mp4:
        for rec in manifest.complete:
            for frames, fps in zip(rec.frames, rec.fps):
                out = Path(args.out) / Path(frames).parent / "video.mp4"
                mux_frames(Path(args.out) / frames, fps, out)
        print("muxed videos written next to each frames/ directory")


if __name__ == "__main__":
    main()

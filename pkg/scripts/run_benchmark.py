#!/usr/bin/env python3
"""Per-sample feature-extraction cost (CC) across all nine facial areas and
both division factors, printed as a table and written to JSON.

Without --manifest a synthetic dataset is generated first, so the benchmark is
runnable out of the box. Timings are single-threaded wall clock.
"""

import argparse
import json
import tempfile
from pathlib import Path

from fmer.evaluation import bench_cc
from fmer.landmarks import AREA_ALIASES
from fmer.testkit import make_face_dataset


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--manifest", type=Path, help="dataset manifest (default: synthetic)")
    parser.add_argument("--landmarks-dir", type=Path, dest="landmarks_dir")
    parser.add_argument("--clips", type=int, default=20, help="synthetic clip count")
    parser.add_argument("--height", type=int, default=120)
    parser.add_argument("--width", type=int, default=100)
    parser.add_argument("--frames", type=int, default=6)
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=17)
    parser.add_argument("--out", type=Path, default=Path("cc_benchmark.json"))
    args = parser.parse_args()

    if args.manifest is None:
        root = Path(tempfile.mkdtemp(prefix="fmer-bench-"))
        print(f"generating synthetic dataset under {root}")
        manifest, landmarks_dir = make_face_dataset(
            root,
            num_clips=args.clips,
            height=args.height,
            width=args.width,
            frames_per_clip=args.frames,
            seed=args.seed,
        )
    else:
        if args.landmarks_dir is None:
            parser.error("--landmarks-dir is required with --manifest")
        manifest, landmarks_dir = args.manifest, args.landmarks_dir

    results = {}
    print(f"{'area':>16}  {'CC d=5':>10}  {'CC d=10':>10}")
    for area in AREA_ALIASES:
        row = {}
        for d in (5, 10):
            record = bench_cc(manifest, landmarks_dir, area, d, repeats=args.repeats)
            row[str(d)] = record.mean_seconds_per_sample
        results[area] = row
        print(f"{area:>16}  {row['5'] * 1e3:>8.2f}ms  {row['10'] * 1e3:>8.2f}ms")

    args.out.write_text(
        json.dumps(
            {"repeats": args.repeats, "manifest": str(manifest), "cc_seconds": results},
            indent=2,
            sort_keys=True,
        )
        + "\n",
        encoding="utf-8",
    )
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

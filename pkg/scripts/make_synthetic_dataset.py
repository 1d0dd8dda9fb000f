#!/usr/bin/env python3
"""Generate a synthetic on-disk dataset (manifest + PGM frames + landmark
sidecars) for exercising the CLI without any licensed data."""

import argparse
from pathlib import Path

from fmer.testkit import make_face_dataset


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("synthetic_dataset"))
    parser.add_argument("--clips", type=int, default=16)
    parser.add_argument("--height", type=int, default=96)
    parser.add_argument("--width", type=int, default=80)
    parser.add_argument("--frames", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    manifest, landmarks_dir = make_face_dataset(
        args.out,
        num_clips=args.clips,
        height=args.height,
        width=args.width,
        frames_per_clip=args.frames,
        seed=args.seed,
    )
    print(f"manifest:      {manifest}")
    print(f"landmarks dir: {landmarks_dir}")
    print(
        "next: fmer pipeline "
        f"--manifest {manifest} --landmarks-dir {landmarks_dir} "
        "--area eyebrow+lip --division 5 --model rf --seed 42 --out out"
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

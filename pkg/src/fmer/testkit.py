"""Synthetic data generation and the brute-force feature oracle.

The oracle re-derives LBP-TOP with plain per-voxel loops and its own local
copies of the bit-order and block-edge conventions; it deliberately imports
nothing from fmer.features so the two routes stay independent. It is slow by
design and exists to pin the engine down bit-exactly.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import TooSmall, ValidationError
from .ingest import CLASS_ORDER, CoarseLabel, FrameSequence, MANIFEST_HEADER, RawEmotion, write_pgm

# Local convention copies (see module docstring): clockwise from top-left,
# bit i weighs 2**i; a neighbor counts when strictly greater than the center.
_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1))
_NUM_BINS = 256
_NUM_PLANES = 3


class SynthPattern(enum.Enum):
    CONSTANT = "constant"
    NOISE = "noise"
    MOVING_EDGE = "moving_edge"
    SEPARABLE = "separable"


@dataclass(frozen=True)
class SynthSpec:
    height: int
    width: int
    num_frames: int
    seed: int
    pattern: SynthPattern
    num_per_class: int = 30
    shift_magnitude: int = 1

    def __post_init__(self):
        if min(self.height, self.width, self.num_frames) < 3:
            raise ValidationError("synthetic volumes need height, width and frame count >= 3")


def gen_volume(spec: SynthSpec) -> FrameSequence:
    """One deterministic synthetic sequence for the single-volume patterns."""
    rng = np.random.default_rng(spec.seed)
    shape = (spec.num_frames, spec.height, spec.width)
    if spec.pattern is SynthPattern.CONSTANT:
        value = int(rng.integers(0, 256))
        frames = np.full(shape, value, dtype=np.uint8)
    elif spec.pattern is SynthPattern.NOISE:
        frames = rng.integers(0, 256, size=shape, dtype=np.uint8)
    elif spec.pattern is SynthPattern.MOVING_EDGE:
        # step edge translating right by 1 px per frame: frames t and t+1
        # differ in exactly one column
        start = spec.width // 4
        if start + spec.num_frames >= spec.width:
            raise ValidationError("moving edge needs width > width//4 + num_frames")
        frames = np.empty(shape, dtype=np.uint8)
        columns = np.arange(spec.width)
        for t in range(spec.num_frames):
            frames[t] = np.where(columns >= start + t, 200, 30)[None, :]
    else:
        raise ValidationError("use gen_separable_dataset for the separable pattern")
    return FrameSequence(
        frames=frames,
        label=CoarseLabel.OTHERS,
        clip_id=f"synth-{spec.pattern.value}-{spec.seed}",
        subject_id="synth",
    )


# One spatial stripe period per class; the stripes drift over time so the
# temporal planes carry class information too.
_CLASS_PERIODS = (3, 4, 6, 9)


def gen_separable_dataset(spec: SynthSpec) -> list[FrameSequence]:
    """Labeled sequences whose block histograms separate linearly by class.

    Each class renders a drifting square-wave grating with its own period, so
    edge-code densities differ by class in every block and plane. Samples vary
    by seeded phase plus a few salt pixels; dense noise is avoided because the
    strict-comparison codes of flat regions would drown the class signal.
    """
    if spec.pattern is not SynthPattern.SEPARABLE:
        raise ValidationError("gen_separable_dataset requires the separable pattern")
    sequences = []
    for class_idx, label in enumerate(CLASS_ORDER):
        period = _CLASS_PERIODS[class_idx]
        for sample_idx in range(spec.num_per_class):
            seed = np.random.SeedSequence([spec.seed, class_idx, sample_idx])
            rng = np.random.default_rng(seed)
            phase = int(rng.integers(0, period))
            x = np.arange(spec.width)
            frames = np.empty((spec.num_frames, spec.height, spec.width), dtype=np.uint8)
            for t in range(spec.num_frames):
                stripe = ((x + phase + t * spec.shift_magnitude) % period) < (period + 1) // 2
                frames[t] = np.where(stripe, 210, 40)[None, :]
            num_salt = max(1, spec.height * spec.width // 100)
            for t in range(spec.num_frames):
                ys = rng.integers(0, spec.height, size=num_salt)
                xs = rng.integers(0, spec.width, size=num_salt)
                frames[t, ys, xs] = rng.integers(0, 256, size=num_salt)
            sequences.append(
                FrameSequence(
                    frames=frames,
                    label=label,
                    clip_id=f"sep-{label.value.lower()}-{sample_idx}",
                    subject_id=f"class-{class_idx}",
                )
            )
    return sequences


def _patch_code(volume, t: int, y: int, x: int, plane: int) -> int:
    center = volume[t, y, x]
    code = 0
    for i, (dr, dc) in enumerate(_OFFSETS):
        if plane == 0:  # XY: rows y, cols x
            neighbor = volume[t, y + dr, x + dc]
        elif plane == 1:  # XT: rows t, cols x
            neighbor = volume[t + dr, y, x + dc]
        else:  # YT: rows t, cols y
            neighbor = volume[t + dr, y + dc, x]
        if neighbor > center:
            code += 1 << i
    return code


def _block_of(value: int, edges: list[int]) -> int:
    for b in range(len(edges) - 1):
        if edges[b] <= value < edges[b + 1]:
            return b
    raise AssertionError(f"{value} not covered by edges {edges}")


def oracle_lbp_top(seq_or_volume, d: int) -> np.ndarray:
    """Naive per-voxel LBP-TOP raw histograms, shape (d, d, 3, 256) int64."""
    volume = seq_or_volume.frames if isinstance(seq_or_volume, FrameSequence) else np.asarray(seq_or_volume)
    num_t, height, width = volume.shape
    if num_t < 3 or height < 3 or width < 3:
        raise TooSmall(f"volume {volume.shape} too small for 3x3x3 interiors")
    row_edges = [(i * height) // d for i in range(d + 1)]
    col_edges = [(i * width) // d for i in range(d + 1)]
    hist = np.zeros((d, d, _NUM_PLANES, _NUM_BINS), dtype=np.int64)
    for t in range(1, num_t - 1):
        for y in range(1, height - 1):
            block_row = _block_of(y, row_edges)
            for x in range(1, width - 1):
                block_col = _block_of(x, col_edges)
                for plane in range(_NUM_PLANES):
                    hist[block_row, block_col, plane, _patch_code(volume, t, y, x, plane)] += 1
    return hist


def synthetic_face_landmarks(height: int, width: int) -> np.ndarray:
    """68 plausible face points scaled to the frame, standard index layout."""
    points = np.zeros((68, 2), dtype=np.int64)
    for i in range(17):  # jaw: U-shape, chin at index 8
        s = i / 16.0
        points[i] = (0.08 * width + 0.84 * width * s, 0.35 * height + 0.57 * height * np.sin(np.pi * s))
    for i in range(5):  # right/left eyebrows with a slight arc
        s = i / 4.0
        arc = 0.02 * height * np.sin(np.pi * s)
        points[17 + i] = (0.18 * width + 0.24 * width * s, 0.30 * height - arc)
        points[22 + i] = (0.58 * width + 0.24 * width * s, 0.30 * height - arc)
    for i in range(4):  # nose bridge
        points[27 + i] = (0.50 * width, (0.36 + 0.05 * i) * height)
    for i in range(5):  # nostril line
        points[31 + i] = ((0.42 + 0.04 * i) * width, 0.56 * height)
    for c, base in ((0.30, 36), (0.70, 42)):  # eye hexagons
        for i in range(6):
            angle = 2 * np.pi * i / 6
            points[base + i] = (
                c * width + 0.06 * width * np.cos(angle),
                0.38 * height + 0.03 * height * np.sin(angle),
            )
    for i in range(12):  # outer mouth
        angle = 2 * np.pi * i / 12
        points[48 + i] = (
            0.50 * width + 0.15 * width * np.cos(angle),
            0.72 * height + 0.06 * height * np.sin(angle),
        )
    for i in range(8):  # inner mouth
        angle = 2 * np.pi * i / 8
        points[60 + i] = (
            0.50 * width + 0.08 * width * np.cos(angle),
            0.72 * height + 0.03 * height * np.sin(angle),
        )
    points[:, 0] = np.clip(points[:, 0], 0, width - 1)
    points[:, 1] = np.clip(points[:, 1], 0, height - 1)
    return points


# Cycle covering all four coarse classes (happiness->Positive,
# surprise->Surprise, disgust->Negative, others->Others).
_LABEL_CYCLE = (RawEmotion.HAPPINESS, RawEmotion.SURPRISE, RawEmotion.DISGUST, RawEmotion.OTHERS)


def make_face_dataset(
    root: str | Path,
    num_clips: int = 16,
    height: int = 96,
    width: int = 80,
    frames_per_clip: int = 5,
    seed: int = 0,
) -> tuple[Path, Path]:
    """Write a complete on-disk dataset: manifest, PGM frames, landmark sidecars.

    Returns (manifest_path, landmarks_dir). Labels cycle over four raw
    emotions so every coarse class appears num_clips//4 times.
    """
    root = Path(root)
    frames_root = root / "frames"
    landmarks_dir = root / "landmarks"
    frames_root.mkdir(parents=True, exist_ok=True)
    landmarks_dir.mkdir(parents=True, exist_ok=True)
    landmark_points = synthetic_face_landmarks(height, width)
    rows = []
    for clip_idx in range(num_clips):
        clip_id = f"clip{clip_idx:03d}"
        raw_label = _LABEL_CYCLE[clip_idx % len(_LABEL_CYCLE)]
        clip_dir = frames_root / clip_id
        clip_dir.mkdir(exist_ok=True)
        rng = np.random.default_rng(np.random.SeedSequence([seed, clip_idx]))
        noise = rng.integers(0, 256, size=(frames_per_clip, height, width), dtype=np.uint8)
        edge_start = int(rng.integers(width // 4, width // 2))
        for t in range(frames_per_clip):
            frame = noise[t].copy()
            # a drifting bright band gives every clip temporal structure
            band = (edge_start + t) % (width - 4)
            frame[:, band : band + 4] = 255
            write_pgm(clip_dir / f"img{t:03d}.pgm", frame)
        with open(landmarks_dir / f"{clip_id}.landmarks.txt", "w", encoding="utf-8") as fh:
            for x, y in landmark_points:
                fh.write(f"{x} {y}\n")
        rows.append(
            [
                clip_id,
                f"sub{clip_idx % 4:02d}",
                str(clip_dir),
                "0",
                str(frames_per_clip // 2),
                str(frames_per_clip - 1),
                raw_label.value,
            ]
        )
    manifest_path = root / "manifest.csv"
    with open(manifest_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(MANIFEST_HEADER) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")
    return manifest_path, landmarks_dir

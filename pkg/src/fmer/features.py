"""LBP and LBP-TOP block-histogram features.

Conventions fixed here (and mirrored by the independent test oracle):

* Neighborhood is the rectangular 3x3 patch (radius 1, 8 neighbors, no
  interpolation). Bit i is 1 iff the i-th neighbor is strictly greater than
  the center; neighbors are ordered clockwise from the top-left of the patch
  and bit i has weight 2**i.
* Plane slices of a (T, H, W) volume: XY at fixed t (rows y, cols x),
  XT at fixed y (rows t, cols x), YT at fixed x (rows t, cols y).
* Only interior voxels contribute: 1 <= t <= T-2, 1 <= y <= H-2, 1 <= x <= W-2.
  Each voxel's three plane codes accumulate into the histograms of its spatial
  block, superimposed across all t.
* Block edges are floor(i * dim / d), so a d x d grid tiles the image exactly
  with blocks differing by at most 1 px; a block too thin to contain interior
  pixels yields an empty histogram, which normalizes to all zeros.
* Normalization is L1 per (block, plane) histogram.

Feature layout is C-order over (ROI, block row, block col, plane XY/XT/YT,
bin 0..255): d*d*3*256 values per ROI, i.e. 19200 at d=5 and 76800 at d=10.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TooSmall, ValidationError
from .ingest import FrameSequence
from .landmarks import LandmarkSet, RoiGeometry, DEFAULT_GEOMETRY, RoiKind, crop_sequence, parse_area, roi_box

NUM_BINS = 256
PLANES = ("XY", "XT", "YT")
DIVISION_FACTORS = (5, 10)

# Clockwise from top-left, as (row, col) offsets within a 3x3 patch; bit i
# has weight 2**i.
NEIGHBOR_OFFSETS: tuple[tuple[int, int], ...] = (
    (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1),
)


def features_per_roi(d: int) -> int:
    return d * d * len(PLANES) * NUM_BINS


def validate_division(d: int) -> int:
    if d not in DIVISION_FACTORS:
        raise ValidationError(f"division factor must be one of {DIVISION_FACTORS}, got {d}")
    return d


@dataclass(frozen=True)
class BlockGrid:
    """d x d spatial tiling with edges floor(i * dim / d)."""

    d: int
    row_edges: np.ndarray
    col_edges: np.ndarray

    @classmethod
    def for_dims(cls, d: int, height: int, width: int) -> "BlockGrid":
        validate_division(d)
        idx = np.arange(d + 1, dtype=np.int64)
        return cls(d, (idx * height) // d, (idx * width) // d)

    def block_of_rows(self, rows: np.ndarray) -> np.ndarray:
        """Block row index for each pixel row (the unique block whose half-open
        range contains it; zero-height blocks contain nothing)."""
        return np.searchsorted(self.row_edges, rows, side="right") - 1

    def block_of_cols(self, cols: np.ndarray) -> np.ndarray:
        return np.searchsorted(self.col_edges, cols, side="right") - 1


@dataclass(frozen=True)
class Histogram256:
    """256-bin code histogram for one plane; raw counts or L1-normalized ratios."""

    bins: np.ndarray
    plane: str

    def __post_init__(self):
        if self.bins.shape != (NUM_BINS,):
            raise ValidationError(f"histogram must have {NUM_BINS} bins, got {self.bins.shape}")
        if self.plane not in PLANES:
            raise ValidationError(f"plane must be one of {PLANES}")


@dataclass(frozen=True)
class FeatureVector:
    """Flat normalized feature vector plus the layout that produced it."""

    values: np.ndarray
    division: int
    rois: tuple[RoiKind, ...] = ()

    def __len__(self) -> int:
        return self.values.shape[0]


def lbp_code(patch: np.ndarray) -> int:
    """8-bit code of a single 3x3 patch under the fixed neighbor order."""
    patch = np.asarray(patch)
    if patch.shape != (3, 3):
        raise ValidationError(f"patch must be 3x3, got {patch.shape}")
    center = patch[1, 1]
    code = 0
    for i, (dr, dc) in enumerate(NEIGHBOR_OFFSETS):
        if patch[1 + dr, 1 + dc] > center:
            code |= 1 << i
    return code


def _codes_2d(image: np.ndarray) -> np.ndarray:
    """Vectorized LBP codes for all interior pixels of a 2-D array."""
    height, width = image.shape
    center = image[1 : height - 1, 1 : width - 1]
    codes = np.zeros(center.shape, dtype=np.uint8)
    for i, (dr, dc) in enumerate(NEIGHBOR_OFFSETS):
        neighbor = image[1 + dr : height - 1 + dr, 1 + dc : width - 1 + dc]
        codes |= (neighbor > center).astype(np.uint8) << np.uint8(i)
    return codes


def lbp_histogram(frame: np.ndarray) -> Histogram256:
    """Raw 256-bin histogram of basic LBP codes over one frame's interior.

    Counts sum to (H-2) * (W-2).
    """
    frame = np.asarray(frame)
    if frame.ndim != 2:
        raise ValidationError(f"expected a 2-D frame, got shape {frame.shape}")
    if frame.shape[0] < 3 or frame.shape[1] < 3:
        raise TooSmall(f"frame {frame.shape} too small for 3x3 neighborhoods")
    counts = np.bincount(_codes_2d(frame).ravel(), minlength=NUM_BINS)
    return Histogram256(bins=counts.astype(np.int64), plane="XY")


def plane_codes(volume: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """XY, XT and YT codes for every interior voxel of a (T, H, W) volume.

    Comparisons run in the array's own dtype, so callers may pass widened
    integer volumes; each returned array has shape (T-2, H-2, W-2).
    """
    num_t, height, width = volume.shape
    center = volume[1 : num_t - 1, 1 : height - 1, 1 : width - 1]
    xy = np.zeros(center.shape, dtype=np.uint8)
    xt = np.zeros(center.shape, dtype=np.uint8)
    yt = np.zeros(center.shape, dtype=np.uint8)
    for i, (dr, dc) in enumerate(NEIGHBOR_OFFSETS):
        bit = np.uint8(i)
        # XY: rows are y, cols are x, t fixed
        neighbor = volume[1 : num_t - 1, 1 + dr : height - 1 + dr, 1 + dc : width - 1 + dc]
        xy |= (neighbor > center).astype(np.uint8) << bit
        # XT: rows are t, cols are x, y fixed
        neighbor = volume[1 + dr : num_t - 1 + dr, 1 : height - 1, 1 + dc : width - 1 + dc]
        xt |= (neighbor > center).astype(np.uint8) << bit
        # YT: rows are t, cols are y, x fixed
        neighbor = volume[1 + dr : num_t - 1 + dr, 1 + dc : height - 1 + dc, 1 : width - 1]
        yt |= (neighbor > center).astype(np.uint8) << bit
    return xy, xt, yt


def lbp_top_raw(volume: np.ndarray, d: int) -> np.ndarray:
    """Raw per-block per-plane histograms, shape (d, d, 3, 256) int64.

    Block membership is decided by each voxel's own (y, x); neighbors may
    cross block boundaries. Accumulation superimposes all interior t.
    """
    volume = np.asarray(volume)
    if volume.ndim != 3:
        raise ValidationError(f"expected a (T, H, W) volume, got shape {volume.shape}")
    num_t, height, width = volume.shape
    if num_t < 3 or height < 3 or width < 3:
        raise TooSmall(f"volume {volume.shape} too small for 3x3x3 interiors")
    validate_division(d)

    grid = BlockGrid.for_dims(d, height, width)
    block_row = grid.block_of_rows(np.arange(1, height - 1))
    block_col = grid.block_of_cols(np.arange(1, width - 1))
    # flat block id per interior (y, x), broadcast over t by bincount below
    block_2d = block_row[:, None] * d + block_col[None, :]

    counts = np.zeros((d * d, len(PLANES), NUM_BINS), dtype=np.int64)
    for plane_idx, codes in enumerate(plane_codes(volume)):
        flat = (block_2d[None, :, :] * NUM_BINS + codes).ravel()
        per_bin = np.bincount(flat, minlength=d * d * NUM_BINS)
        counts[:, plane_idx, :] += per_bin.reshape(d * d, NUM_BINS)
    return counts.reshape(d, d, len(PLANES), NUM_BINS)


def normalize(raw: np.ndarray, division: int | None = None, rois: tuple[RoiKind, ...] = ()) -> FeatureVector:
    """L1-normalize each (block, plane) histogram and flatten.

    Empty histograms (blocks with no interior pixels) map to all zeros.
    """
    raw = np.asarray(raw, dtype=np.float64)
    if raw.shape[-1] != NUM_BINS:
        raise ValidationError(f"last axis must be {NUM_BINS} bins, got {raw.shape}")
    if np.any(raw < 0):
        raise ValidationError("raw histogram counts must be non-negative")
    totals = raw.sum(axis=-1, keepdims=True)
    ratios = np.divide(raw, totals, out=np.zeros_like(raw), where=totals > 0)
    if division is None:
        division = int(round((raw.size / (len(PLANES) * NUM_BINS)) ** 0.5))
    return FeatureVector(values=ratios.ravel(), division=division, rois=rois)


def lbp_top(seq: FrameSequence, d: int) -> FeatureVector:
    """Normalized LBP-TOP block-histogram features of one sequence.

    Length is d*d*3*256 (19200 at d=5, 76800 at d=10).
    """
    return normalize(lbp_top_raw(seq.frames, d), division=d)


def extract_area(
    seq: FrameSequence,
    lm: LandmarkSet,
    area: tuple[RoiKind, ...] | str,
    d: int,
    margin_frac: float = DEFAULT_GEOMETRY.margin_frac,
    geometry: RoiGeometry = DEFAULT_GEOMETRY,
) -> FeatureVector:
    """Crop each ROI of the area, run LBP-TOP on each crop, concatenate in order.

    Each ROI is normalized independently before concatenation, so differently
    sized ROIs contribute comparably. Length is len(area) * d*d*3*256.
    """
    area = parse_area(area)
    validate_division(d)
    parts = []
    for kind in area:
        box = roi_box(kind, lm, seq.frame_dims, margin_frac=margin_frac, geometry=geometry)
        parts.append(lbp_top(crop_sequence(seq, box), d).values)
    return FeatureVector(values=np.concatenate(parts), division=d, rois=area)


def zscore_fit(feature_matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Dataset-level z-score parameters (mean, std); constant columns get std 1."""
    matrix = np.asarray(feature_matrix, dtype=np.float64)
    mean = matrix.mean(axis=0)
    std = matrix.std(axis=0)
    std[std == 0] = 1.0
    return mean, std


def zscore_apply(feature_matrix: np.ndarray, mean: np.ndarray, std: np.ndarray) -> np.ndarray:
    return (np.asarray(feature_matrix, dtype=np.float64) - mean) / std

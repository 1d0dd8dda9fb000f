"""68-point landmark parsing and ROI crop geometry.

Landmarks are read from one sidecar file per clip (``<clip_id>.landmarks.txt``,
68 lines of ``x y`` integers) describing the onset frame, which acts as the
registration image: the boxes derived from it crop every frame of the sequence.

ROI index sets over the standard 68-point layout (jaw 0-16, eyebrows 17-26,
nose 27-35, eyes 36-47, mouth 48-67):

* eyebrow: 17-26
* eye: 36-47
* middle (nose + cheeks): 27-35 plus jaw side points 1 and 15 to widen the box
  over the cheeks
* lip: 48-67
* bottom (jaw + chin): 3-13, with its top edge clamped to the bottom edge of
  the lip box so the two do not overlap

Each box is the axis-aligned bounding box of its index set, padded on every
edge by ``margin_frac`` of the face bounding-box side, then clamped to the
frame. The sets and margin are overridable through RoiGeometry.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import DegenerateRoi, OutOfBounds, ParseError, ValidationError
from .ingest import FrameSequence

NUM_LANDMARKS = 68


class RoiKind(enum.Enum):
    WHOLE_FACE = "whole"
    EYEBROW = "eyebrow"
    EYE = "eye"
    MIDDLE = "middle"
    LIP = "lip"
    BOTTOM = "bottom"


# The nine facial areas selectable end to end (single ROIs plus the combined
# upper/lower areas). Keys double as the CLI --area vocabulary.
AREA_ALIASES: dict[str, tuple[RoiKind, ...]] = {
    "whole": (RoiKind.WHOLE_FACE,),
    "eyebrow": (RoiKind.EYEBROW,),
    "eye": (RoiKind.EYE,),
    "middle": (RoiKind.MIDDLE,),
    "lip": (RoiKind.LIP,),
    "bottom": (RoiKind.BOTTOM,),
    "eyebrow+eye": (RoiKind.EYEBROW, RoiKind.EYE),
    "eyebrow+lip": (RoiKind.EYEBROW, RoiKind.LIP),
    "eyebrow+eye+lip": (RoiKind.EYEBROW, RoiKind.EYE, RoiKind.LIP),
}


@dataclass(frozen=True)
class LandmarkSet:
    """68 ordered (x, y) pixel coordinates, origin top-left."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.int64)
        if pts.shape != (NUM_LANDMARKS, 2):
            raise ValidationError(f"expected {NUM_LANDMARKS} (x, y) points, got shape {pts.shape}")
        object.__setattr__(self, "points", pts)


@dataclass(frozen=True)
class RoiBox:
    """Half-open pixel rectangle [x0, x1) x [y0, y1)."""

    x0: int
    y0: int
    x1: int
    y1: int

    @property
    def width(self) -> int:
        return self.x1 - self.x0

    @property
    def height(self) -> int:
        return self.y1 - self.y0


@dataclass(frozen=True)
class RoiGeometry:
    """Landmark index sets and padding used to derive ROI boxes."""

    eyebrow: tuple[int, ...] = tuple(range(17, 27))
    eye: tuple[int, ...] = tuple(range(36, 48))
    middle: tuple[int, ...] = tuple(range(27, 36)) + (1, 15)
    lip: tuple[int, ...] = tuple(range(48, 68))
    bottom: tuple[int, ...] = tuple(range(3, 14))
    margin_frac: float = 0.05

    def indices(self, kind: RoiKind) -> tuple[int, ...]:
        return {
            RoiKind.EYEBROW: self.eyebrow,
            RoiKind.EYE: self.eye,
            RoiKind.MIDDLE: self.middle,
            RoiKind.LIP: self.lip,
            RoiKind.BOTTOM: self.bottom,
        }[kind]

    @classmethod
    def from_json(cls, path: str | Path) -> "RoiGeometry":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ParseError(f"{path}: unknown geometry keys {sorted(unknown)}")
        kwargs = {k: tuple(v) if isinstance(v, list) else v for k, v in raw.items()}
        return cls(**kwargs)


DEFAULT_GEOMETRY = RoiGeometry()


def parse_landmarks(path: str | Path, frame_dims: tuple[int, int]) -> LandmarkSet:
    """Read a 68-line ``x y`` sidecar file and validate against frame bounds."""
    path = Path(path)
    if not path.is_file():
        raise ParseError(f"landmark file not found: {path}")
    height, width = frame_dims
    lines = [ln for ln in path.read_text(encoding="utf-8").splitlines() if ln.strip()]
    if len(lines) != NUM_LANDMARKS:
        raise ParseError(f"{path}: expected {NUM_LANDMARKS} landmark lines, got {len(lines)}")
    points = np.empty((NUM_LANDMARKS, 2), dtype=np.int64)
    for i, line in enumerate(lines):
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"{path}: line {i + 1} is not 'x y'")
        try:
            x, y = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"{path}: line {i + 1} has non-integer coordinates") from None
        if not (0 <= x < width and 0 <= y < height):
            raise OutOfBounds(i, x, y, width, height)
        points[i] = (x, y)
    return LandmarkSet(points)


def _margin_pixels(points: np.ndarray, margin_frac: float) -> int:
    """Padding in pixels: margin_frac of the larger face bounding-box side."""
    span_x = int(points[:, 0].max() - points[:, 0].min())
    span_y = int(points[:, 1].max() - points[:, 1].min())
    return int(np.floor(margin_frac * max(span_x, span_y) + 0.5))


def roi_box(
    kind: RoiKind,
    lm: LandmarkSet,
    frame_dims: tuple[int, int],
    margin_frac: float = DEFAULT_GEOMETRY.margin_frac,
    geometry: RoiGeometry = DEFAULT_GEOMETRY,
) -> RoiBox:
    """Derive the crop box for one ROI kind from onset-frame landmarks.

    Pixel content never enters: the box is a pure function of the geometry.
    Raises DegenerateRoi when the clamped box is thinner than 3 px.
    """
    height, width = frame_dims
    if kind is RoiKind.WHOLE_FACE:
        return RoiBox(0, 0, width, height)

    margin = _margin_pixels(lm.points, margin_frac)
    pts = lm.points[list(geometry.indices(kind))]
    x0 = int(pts[:, 0].min()) - margin
    x1 = int(pts[:, 0].max()) + margin
    y0 = int(pts[:, 1].min()) - margin
    y1 = int(pts[:, 1].max()) + margin

    if kind is RoiKind.BOTTOM:
        # keep the jaw/chin box below the mouth
        lip = roi_box(RoiKind.LIP, lm, frame_dims, margin_frac, geometry)
        y0 = max(y0, lip.y1)

    x0, y0 = max(x0, 0), max(y0, 0)
    x1, y1 = min(x1, width), min(y1, height)
    if x1 - x0 < 3 or y1 - y0 < 3:
        raise DegenerateRoi(
            f"{kind.value} box [{x0},{x1})x[{y0},{y1}) is thinner than 3 px after clamping"
        )
    return RoiBox(x0, y0, x1, y1)


def crop_sequence(seq: FrameSequence, box: RoiBox) -> FrameSequence:
    """Apply one box to every frame; T is unchanged, pixels are copied bit-exactly."""
    height, width = seq.frame_dims
    if not (0 <= box.x0 < box.x1 <= width and 0 <= box.y0 < box.y1 <= height):
        raise ValidationError(
            f"box [{box.x0},{box.x1})x[{box.y0},{box.y1}) outside {width}x{height} frame"
        )
    return replace(seq, frames=seq.frames[:, box.y0 : box.y1, box.x0 : box.x1].copy())


def parse_area(spec: str | tuple[RoiKind, ...] | list[RoiKind]) -> tuple[RoiKind, ...]:
    """Normalize an area argument ('eyebrow+lip' or RoiKind list) and validate it."""
    if isinstance(spec, str):
        kinds = []
        for part in spec.split("+"):
            try:
                kinds.append(RoiKind(part.strip().lower()))
            except ValueError:
                raise ValidationError(f"unknown ROI name {part!r}") from None
        area = tuple(kinds)
    else:
        area = tuple(spec)
    if not area:
        raise ValidationError("area must name at least one ROI")
    if len(set(area)) != len(area):
        raise ValidationError(f"area has duplicate ROIs: {[k.value for k in area]}")
    if RoiKind.WHOLE_FACE in area and len(area) > 1:
        raise ValidationError("whole-face cannot be combined with other ROIs")
    return area


def area_name(area: tuple[RoiKind, ...]) -> str:
    return "+".join(kind.value for kind in area)

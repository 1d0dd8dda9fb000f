"""Dataset ingestion: manifests, frame sequences, grayscale conversion, relabeling.

A dataset is a UTF-8 CSV manifest (header
``clip_id,subject_id,frames_dir,onset,apex,offset,label``) plus one directory of
frame images per clip. Frames are binary PGM (P5, maxval 255) as the canonical
format; PNG is accepted and converted on load. Raw emotion labels are collapsed
into the four coarse classes used everywhere downstream.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, MissingFrame, ParseError, ValidationError


class RawEmotion(enum.Enum):
    HAPPINESS = "happiness"
    SURPRISE = "surprise"
    DISGUST = "disgust"
    SADNESS = "sadness"
    FEAR = "fear"
    REPRESSION = "repression"
    OTHERS = "others"


class CoarseLabel(enum.Enum):
    NEGATIVE = "Negative"
    POSITIVE = "Positive"
    SURPRISE = "Surprise"
    OTHERS = "Others"


# Fixed class order for score vectors, confusion rows and tie-breaking.
CLASS_ORDER: tuple[CoarseLabel, ...] = (
    CoarseLabel.NEGATIVE,
    CoarseLabel.POSITIVE,
    CoarseLabel.SURPRISE,
    CoarseLabel.OTHERS,
)

MANIFEST_HEADER = ["clip_id", "subject_id", "frames_dir", "onset", "apex", "offset", "label"]

# BT.601 luminance weights; rounding is half-up.
_LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


@dataclass(frozen=True)
class ClipManifestEntry:
    clip_id: str
    subject_id: str
    frames_dir: Path
    onset_idx: int
    apex_idx: int
    offset_idx: int
    raw_label: RawEmotion

    @property
    def num_frames(self) -> int:
        return self.offset_idx - self.onset_idx + 1

    def validate(self) -> None:
        if self.onset_idx < 0:
            raise ValidationError(f"clip {self.clip_id}: onset index {self.onset_idx} < 0")
        if not (self.onset_idx <= self.apex_idx <= self.offset_idx):
            raise ValidationError(
                f"clip {self.clip_id}: indices must satisfy onset <= apex <= offset, "
                f"got {self.onset_idx}/{self.apex_idx}/{self.offset_idx}"
            )
        if self.num_frames < 3:
            raise ValidationError(
                f"clip {self.clip_id}: sequence of {self.num_frames} frames is too short "
                "(need >= 3 for temporal interiors)"
            )


@dataclass
class FrameSequence:
    """Ordered grayscale frame stack, shape (T, H, W) uint8, onset first."""

    frames: np.ndarray
    label: CoarseLabel
    clip_id: str = ""
    subject_id: str = ""

    def __post_init__(self):
        self.frames = np.asarray(self.frames)
        if self.frames.ndim != 3:
            raise ValidationError(f"frames must be (T, H, W), got shape {self.frames.shape}")

    @property
    def num_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def frame_dims(self) -> tuple[int, int]:
        """(H, W) of every frame."""
        return self.frames.shape[1], self.frames.shape[2]


def relabel(raw: RawEmotion, repression_as: CoarseLabel = CoarseLabel.OTHERS) -> CoarseLabel:
    """Collapse the seven raw emotions into the four coarse classes.

    Disgust, sadness and fear fold into Negative; happiness becomes Positive;
    surprise and others keep their names. Repression is unassigned by the
    four-way grouping, so its target is a parameter; the default (Others) makes
    the four classes partition the whole dataset.
    """
    if raw in (RawEmotion.DISGUST, RawEmotion.SADNESS, RawEmotion.FEAR):
        return CoarseLabel.NEGATIVE
    if raw is RawEmotion.HAPPINESS:
        return CoarseLabel.POSITIVE
    if raw is RawEmotion.SURPRISE:
        return CoarseLabel.SURPRISE
    if raw is RawEmotion.REPRESSION:
        return repression_as
    return CoarseLabel.OTHERS


def to_grayscale(rgb_frame: np.ndarray) -> np.ndarray:
    """BT.601 luminance of an 8-bit RGB frame, rounded half-up, clamped to [0, 255]."""
    rgb = np.asarray(rgb_frame)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValidationError(f"expected (H, W, 3) RGB input, got shape {rgb.shape}")
    luma = rgb.astype(np.float64) @ _LUMA_WEIGHTS
    return np.clip(np.floor(luma + 0.5), 0, 255).astype(np.uint8)


def load_manifest(path: str | Path) -> list[ClipManifestEntry]:
    """Parse and validate a manifest CSV.

    Relative ``frames_dir`` values are resolved against the manifest's directory.
    Raises ParseError with the 1-based row number on malformed rows and
    ValidationError when index ordering or extent invariants fail.
    """
    path = Path(path)
    if not path.is_file():
        raise ParseError(f"manifest not found: {path}")
    entries = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty manifest") from None
        if [h.strip() for h in header] != MANIFEST_HEADER:
            raise ParseError(f"{path}: bad header {header!r}, expected {MANIFEST_HEADER}")
        for row_num, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(MANIFEST_HEADER):
                raise ParseError(f"{path}:{row_num}: expected {len(MANIFEST_HEADER)} fields, got {len(row)}")
            clip_id, subject_id, frames_dir, onset, apex, offset, label = (cell.strip() for cell in row)
            try:
                onset_i, apex_i, offset_i = int(onset), int(apex), int(offset)
            except ValueError:
                raise ParseError(f"{path}:{row_num}: non-integer frame index") from None
            try:
                raw = RawEmotion(label)
            except ValueError:
                raise ParseError(f"{path}:{row_num}: unknown label {label!r}") from None
            frames_path = Path(frames_dir)
            if not frames_path.is_absolute():
                frames_path = path.parent / frames_path
            entry = ClipManifestEntry(
                clip_id=clip_id,
                subject_id=subject_id,
                frames_dir=frames_path,
                onset_idx=onset_i,
                apex_idx=apex_i,
                offset_idx=offset_i,
                raw_label=raw,
            )
            entry.validate()
            entries.append(entry)
    return entries


def read_pgm(path: str | Path) -> np.ndarray:
    """Read a binary PGM (P5, maxval 255) into a (H, W) uint8 array."""
    data = Path(path).read_bytes()
    if not data.startswith(b"P5"):
        raise ParseError(f"{path}: not a binary PGM (missing P5 magic)")
    # Header tokens (width, height, maxval) may be separated by whitespace and
    # '#' comments; pixel data starts after the single whitespace byte that
    # follows maxval.
    pos = 2
    fields = []
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ParseError(f"{path}: truncated PGM header")
        fields.append(data[start:pos])
    pos += 1  # single whitespace after maxval
    try:
        width, height, maxval = (int(f) for f in fields)
    except ValueError:
        raise ParseError(f"{path}: non-numeric PGM header field") from None
    if maxval != 255:
        raise ParseError(f"{path}: PGM maxval {maxval} unsupported (need 255)")
    pixels = np.frombuffer(data, dtype=np.uint8, offset=pos)
    if pixels.size < width * height:
        raise ParseError(f"{path}: PGM pixel data truncated")
    return pixels[: width * height].reshape(height, width).copy()


def write_pgm(path: str | Path, frame: np.ndarray) -> None:
    frame = np.ascontiguousarray(frame, dtype=np.uint8)
    if frame.ndim != 2:
        raise ValidationError(f"PGM frames are 2-D, got shape {frame.shape}")
    height, width = frame.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        fh.write(frame.tobytes())


def read_frame(path: Path) -> np.ndarray:
    """Load one frame as grayscale uint8, converting RGB via to_grayscale."""
    suffix = path.suffix.lower()
    if suffix == ".pgm":
        return read_pgm(path)
    if suffix == ".png":
        from PIL import Image

        with Image.open(path) as img:
            if img.mode == "L":
                return np.asarray(img, dtype=np.uint8)
            if img.mode in ("RGB", "RGBA", "P"):
                return to_grayscale(np.asarray(img.convert("RGB"), dtype=np.uint8))
            raise ParseError(f"{path}: unsupported PNG mode {img.mode}")
    raise ParseError(f"{path}: unsupported frame format")


def frame_path(frames_dir: Path, index: int, pad_width: int = 3) -> Path:
    """Resolve ``img<index>.pgm`` (canonical) or ``.png`` inside frames_dir."""
    stem = f"img{index:0{pad_width}d}"
    for suffix in (".pgm", ".png"):
        candidate = frames_dir / (stem + suffix)
        if candidate.is_file():
            return candidate
    return frames_dir / (stem + ".pgm")


def load_sequence(
    entry: ClipManifestEntry,
    pad_width: int = 3,
    repression_as: CoarseLabel = CoarseLabel.OTHERS,
) -> FrameSequence:
    """Load the onset..offset frames of one clip, in index order.

    Raises MissingFrame when a file for an index is absent and
    DimensionMismatch when frame sizes differ within the clip.
    """
    frames = []
    dims = None
    for index in range(entry.onset_idx, entry.offset_idx + 1):
        path = frame_path(entry.frames_dir, index, pad_width=pad_width)
        if not path.is_file():
            raise MissingFrame(index, str(path))
        frame = read_frame(path)
        if dims is None:
            dims = frame.shape
        elif frame.shape != dims:
            raise DimensionMismatch(
                f"clip {entry.clip_id}: frame {index} has shape {frame.shape}, expected {dims}"
            )
        frames.append(frame)
    return FrameSequence(
        frames=np.stack(frames),
        label=relabel(entry.raw_label, repression_as=repression_as),
        clip_id=entry.clip_id,
        subject_id=entry.subject_id,
    )

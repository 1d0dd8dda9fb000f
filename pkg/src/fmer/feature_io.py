"""Feature dumps: CSV for inspection, FMEF binary for large runs.

CSV: header ``clip_id,label,f0,...,f{N-1}``, one row per clip, floats written
with full round-trip precision.

FMEF: magic ``FMEF``, version u16 little-endian, u32 little-endian length of a
UTF-8 JSON layout descriptor (clip ids, labels, area, division, feature
length), then row-major float32 values.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import IoError, ParseError, ValidationError
from .ingest import CoarseLabel
from .landmarks import RoiKind, area_name

FMEF_MAGIC = b"FMEF"
FMEF_VERSION = 1


def write_features_csv(
    path: str | Path,
    clip_ids: list[str],
    labels: list[CoarseLabel],
    matrix: np.ndarray,
) -> None:
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or len(clip_ids) != matrix.shape[0] or len(labels) != matrix.shape[0]:
        raise ValidationError("clip_ids, labels and feature rows must align")
    num_features = matrix.shape[1]
    header = "clip_id,label," + ",".join(f"f{i}" for i in range(num_features))
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(header + "\n")
            for clip_id, label, row in zip(clip_ids, labels, matrix):
                fh.write(f"{clip_id},{label.value}," + ",".join(repr(v) for v in row.tolist()) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def read_features_csv(path: str | Path) -> tuple[list[str], list[CoarseLabel], np.ndarray]:
    path = Path(path)
    clip_ids: list[str] = []
    labels: list[CoarseLabel] = []
    rows: list[np.ndarray] = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split(",")
        if header[:2] != ["clip_id", "label"]:
            raise ParseError(f"{path}: bad feature CSV header")
        num_features = len(header) - 2
        for line_num, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != num_features + 2:
                raise ParseError(f"{path}:{line_num}: expected {num_features + 2} fields")
            clip_ids.append(parts[0])
            try:
                labels.append(CoarseLabel(parts[1]))
            except ValueError:
                raise ParseError(f"{path}:{line_num}: unknown label {parts[1]!r}") from None
            rows.append(np.array(parts[2:], dtype=np.float64))
    if not rows:
        raise ParseError(f"{path}: no feature rows")
    return clip_ids, labels, np.stack(rows)


def write_features_fmef(
    path: str | Path,
    clip_ids: list[str],
    labels: list[CoarseLabel],
    matrix: np.ndarray,
    area: tuple[RoiKind, ...],
    division: int,
) -> None:
    matrix = np.ascontiguousarray(matrix, dtype=np.float32)
    if matrix.ndim != 2 or len(clip_ids) != matrix.shape[0] or len(labels) != matrix.shape[0]:
        raise ValidationError("clip_ids, labels and feature rows must align")
    descriptor = {
        "clip_ids": list(clip_ids),
        "labels": [label.value for label in labels],
        "area": area_name(area),
        "division": division,
        "feature_length": matrix.shape[1],
        "count": matrix.shape[0],
    }
    blob = json.dumps(descriptor, sort_keys=True, separators=(",", ":")).encode("utf-8")
    try:
        with open(path, "wb") as fh:
            fh.write(FMEF_MAGIC)
            fh.write(struct.pack("<H", FMEF_VERSION))
            fh.write(struct.pack("<I", len(blob)))
            fh.write(blob)
            fh.write(matrix.astype("<f4").tobytes())
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def read_features_fmef(path: str | Path) -> tuple[list[str], list[CoarseLabel], np.ndarray, dict]:
    data = Path(path).read_bytes()
    if data[:4] != FMEF_MAGIC:
        raise ParseError(f"{path}: bad magic, not an FMEF file")
    (version,) = struct.unpack_from("<H", data, 4)
    if version != FMEF_VERSION:
        raise ParseError(f"{path}: unsupported FMEF version {version}")
    (desc_len,) = struct.unpack_from("<I", data, 6)
    desc_end = 10 + desc_len
    try:
        descriptor = json.loads(data[10:desc_end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: bad FMEF descriptor: {exc}") from exc
    count = descriptor["count"]
    feature_length = descriptor["feature_length"]
    payload = len(data) - desc_end
    if payload != 4 * count * feature_length:
        raise ParseError(
            f"{path}: expected {4 * count * feature_length} payload bytes, got {payload}"
        )
    values = np.frombuffer(data, dtype="<f4", offset=desc_end)
    matrix = values.reshape(count, feature_length).astype(np.float64)
    labels = [CoarseLabel(v) for v in descriptor["labels"]]
    return list(descriptor["clip_ids"]), labels, matrix, descriptor

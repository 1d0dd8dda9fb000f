"""Facial micro-expression recognition pipeline.

Landmark-driven ROI cropping, LBP-TOP block-histogram features over the three
orthogonal planes of a frame sequence, four classical classifiers with grid
search and stratified splitting, and full evaluation/benchmark reporting.
"""

from .errors import FmerError
from .ingest import CLASS_ORDER, CoarseLabel, FrameSequence, RawEmotion, load_manifest, load_sequence, relabel, to_grayscale
from .landmarks import LandmarkSet, RoiBox, RoiKind, crop_sequence, parse_area, parse_landmarks, roi_box
from .features import FeatureVector, extract_area, lbp_code, lbp_histogram, lbp_top, lbp_top_raw, normalize

__version__ = "0.1.0"

__all__ = [
    "CLASS_ORDER",
    "CoarseLabel",
    "FeatureVector",
    "FmerError",
    "FrameSequence",
    "LandmarkSet",
    "RawEmotion",
    "RoiBox",
    "RoiKind",
    "__version__",
    "crop_sequence",
    "extract_area",
    "lbp_code",
    "lbp_histogram",
    "lbp_top",
    "lbp_top_raw",
    "load_manifest",
    "load_sequence",
    "normalize",
    "parse_area",
    "parse_landmarks",
    "relabel",
    "roi_box",
    "to_grayscale",
]

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fmer.errors import DimensionMismatch, MissingFrame, ParseError, ValidationError
from fmer.ingest import (
    CLASS_ORDER,
    ClipManifestEntry,
    CoarseLabel,
    RawEmotion,
    load_manifest,
    load_sequence,
    read_pgm,
    relabel,
    to_grayscale,
    write_pgm,
)

HEADER = "clip_id,subject_id,frames_dir,onset,apex,offset,label\n"

# per-label clip counts of the source corpus
CORPUS_COUNTS = {
    "happiness": 32,
    "surprise": 28,
    "disgust": 63,
    "sadness": 4,
    "fear": 2,
    "repression": 27,
    "others": 99,
}


def write_manifest(path, rows):
    path.write_text(HEADER + "".join(rows), encoding="utf-8")
    return path


class TestManifest:
    def test_single_row_extent(self, tmp_path):
        path = write_manifest(tmp_path / "m.csv", ["c1,s1,frames/c1,46,59,86,happiness\n"])
        entries = load_manifest(path)
        assert len(entries) == 1
        assert entries[0].num_frames == 41
        assert entries[0].raw_label is RawEmotion.HAPPINESS
        # relative frames_dir resolves against the manifest directory
        assert entries[0].frames_dir == tmp_path / "frames/c1"

    def test_offset_before_onset_rejected(self, tmp_path):
        path = write_manifest(tmp_path / "m.csv", ["c1,s1,f,10,10,9,others\n"])
        with pytest.raises(ValidationError):
            load_manifest(path)

    def test_too_short_extent_rejected(self, tmp_path):
        path = write_manifest(tmp_path / "m.csv", ["c1,s1,f,5,5,6,others\n"])
        with pytest.raises(ValidationError):
            load_manifest(path)

    def test_corpus_label_tally(self, tmp_path):
        rows = []
        n = 0
        for label, count in CORPUS_COUNTS.items():
            for _ in range(count):
                rows.append(f"c{n},s{n % 26},f{n},0,5,10,{label}\n")
                n += 1
        path = write_manifest(tmp_path / "m.csv", rows)
        entries = load_manifest(path)
        assert len(entries) == 255
        tally = {}
        for e in entries:
            tally[e.raw_label.value] = tally.get(e.raw_label.value, 0) + 1
        assert tally == CORPUS_COUNTS
        coarse = {}
        for e in entries:
            label = relabel(e.raw_label)
            coarse[label] = coarse.get(label, 0) + 1
        assert coarse == {
            CoarseLabel.NEGATIVE: 69,
            CoarseLabel.POSITIVE: 32,
            CoarseLabel.SURPRISE: 28,
            CoarseLabel.OTHERS: 126,
        }
        assert sum(coarse.values()) == 255

    @pytest.mark.parametrize(
        "row",
        [
            "c1,s1,f,x,5,10,others\n",  # non-integer index
            "c1,s1,f,0,5,10,boredom\n",  # unknown label
            "c1,s1,f,0,5\n",  # wrong field count
        ],
    )
    def test_malformed_rows(self, tmp_path, row):
        path = write_manifest(tmp_path / "m.csv", [row])
        with pytest.raises(ParseError) as excinfo:
            load_manifest(path)
        assert ":2:" in str(excinfo.value)  # row number reported

    def test_bad_header(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("clip,subject\nc1,s1\n", encoding="utf-8")
        with pytest.raises(ParseError):
            load_manifest(path)


class TestGrayscale:
    def test_white_black_endpoints(self):
        frame = np.array([[[255, 255, 255], [0, 0, 0]]], dtype=np.uint8)
        assert to_grayscale(frame).tolist() == [[255, 0]]

    def test_pure_red(self):
        frame = np.array([[[255, 0, 0]]], dtype=np.uint8)
        assert to_grayscale(frame)[0, 0] == 76  # round(0.299 * 255)

    def test_rejects_single_channel(self):
        with pytest.raises(ValidationError):
            to_grayscale(np.zeros((4, 4), dtype=np.uint8))

    @given(
        r=st.integers(0, 255), g=st.integers(0, 255), b=st.integers(0, 255)
    )
    def test_matches_half_up_rounding_oracle(self, r, g, b):
        expected = int(np.floor(0.299 * r + 0.587 * g + 0.114 * b + 0.5))
        frame = np.array([[[r, g, b]]], dtype=np.uint8)
        assert to_grayscale(frame)[0, 0] == min(expected, 255)


class TestRelabel:
    @pytest.mark.parametrize(
        "raw,expected",
        [
            (RawEmotion.DISGUST, CoarseLabel.NEGATIVE),
            (RawEmotion.SADNESS, CoarseLabel.NEGATIVE),
            (RawEmotion.FEAR, CoarseLabel.NEGATIVE),
            (RawEmotion.HAPPINESS, CoarseLabel.POSITIVE),
            (RawEmotion.SURPRISE, CoarseLabel.SURPRISE),
            (RawEmotion.OTHERS, CoarseLabel.OTHERS),
            (RawEmotion.REPRESSION, CoarseLabel.OTHERS),
        ],
    )
    def test_mapping(self, raw, expected):
        assert relabel(raw) is expected

    def test_repression_target_switchable(self):
        assert relabel(RawEmotion.REPRESSION, repression_as=CoarseLabel.NEGATIVE) is CoarseLabel.NEGATIVE

    def test_total_and_surjective(self):
        images = {relabel(raw) for raw in RawEmotion}
        assert images == set(CLASS_ORDER)


def make_clip(tmp_path, frames, onset=0, pad_width=3, suffix="pgm"):
    clip_dir = tmp_path / "clip"
    clip_dir.mkdir(parents=True, exist_ok=True)
    for i, frame in enumerate(frames):
        path = clip_dir / f"img{onset + i:0{pad_width}d}.{suffix}"
        if suffix == "pgm":
            write_pgm(path, frame)
        else:
            from PIL import Image

            Image.fromarray(frame).save(path)
    return ClipManifestEntry(
        clip_id="clip",
        subject_id="s",
        frames_dir=clip_dir,
        onset_idx=onset,
        apex_idx=onset + len(frames) // 2,
        offset_idx=onset + len(frames) - 1,
        raw_label=RawEmotion.DISGUST,
    )


class TestLoadSequence:
    def test_shapes_and_label(self, tmp_path, rng):
        frames = rng.integers(0, 256, size=(5, 28, 34), dtype=np.uint8)
        entry = make_clip(tmp_path, frames, onset=46)
        seq = load_sequence(entry)
        assert seq.num_frames == 5
        assert seq.frame_dims == (28, 34)
        assert seq.label is CoarseLabel.NEGATIVE
        assert np.array_equal(seq.frames, frames)

    def test_missing_frame(self, tmp_path, rng):
        frames = rng.integers(0, 256, size=(5, 10, 10), dtype=np.uint8)
        entry = make_clip(tmp_path, frames, onset=57)
        (entry.frames_dir / "img059.pgm").unlink()
        with pytest.raises(MissingFrame) as excinfo:
            load_sequence(entry)
        assert excinfo.value.index == 59

    def test_dimension_mismatch(self, tmp_path, rng):
        frames = [rng.integers(0, 256, size=(10, 10), dtype=np.uint8) for _ in range(3)]
        entry = make_clip(tmp_path, frames)
        write_pgm(entry.frames_dir / "img001.pgm", np.zeros((11, 10), dtype=np.uint8))
        with pytest.raises(DimensionMismatch):
            load_sequence(entry)

    def test_deterministic(self, tmp_path, rng):
        frames = rng.integers(0, 256, size=(4, 12, 12), dtype=np.uint8)
        entry = make_clip(tmp_path, frames)
        first = load_sequence(entry)
        second = load_sequence(entry)
        assert first.frames.tobytes() == second.frames.tobytes()

    def test_png_frames_match_pgm(self, tmp_path, rng):
        frames = rng.integers(0, 256, size=(3, 9, 9), dtype=np.uint8)
        pgm_entry = make_clip(tmp_path / "a", frames)
        png_entry = make_clip(tmp_path / "b", frames, suffix="png")
        assert np.array_equal(load_sequence(pgm_entry).frames, load_sequence(png_entry).frames)

    def test_rgb_png_converted(self, tmp_path):
        from PIL import Image

        clip_dir = tmp_path / "clip"
        clip_dir.mkdir()
        rgb = np.zeros((4, 4, 3), dtype=np.uint8)
        rgb[..., 0] = 255  # pure red -> luminance 76
        for i in range(3):
            Image.fromarray(rgb, mode="RGB").save(clip_dir / f"img{i:03d}.png")
        entry = ClipManifestEntry("c", "s", clip_dir, 0, 1, 2, RawEmotion.OTHERS)
        seq = load_sequence(entry)
        assert np.all(seq.frames == 76)


class TestPgm:
    def test_round_trip(self, tmp_path, rng):
        frame = rng.integers(0, 256, size=(7, 11), dtype=np.uint8)
        path = tmp_path / "f.pgm"
        write_pgm(path, frame)
        assert np.array_equal(read_pgm(path), frame)

    def test_header_comments_accepted(self, tmp_path):
        path = tmp_path / "f.pgm"
        path.write_bytes(b"P5\n# comment\n2 2\n255\n" + bytes([1, 2, 3, 4]))
        assert read_pgm(path).tolist() == [[1, 2], [3, 4]]

    def test_wrong_maxval_rejected(self, tmp_path):
        path = tmp_path / "f.pgm"
        path.write_bytes(b"P5\n2 2\n65535\n" + bytes(8))
        with pytest.raises(ParseError):
            read_pgm(path)

    def test_truncated_rejected(self, tmp_path):
        path = tmp_path / "f.pgm"
        path.write_bytes(b"P5\n4 4\n255\n" + bytes(3))
        with pytest.raises(ParseError):
            read_pgm(path)

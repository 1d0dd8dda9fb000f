import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fmer.testkit import make_face_dataset

settings.register_profile(
    "suite",
    max_examples=25,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session")
def face_dataset(tmp_path_factory):
    """Small on-disk dataset: 16 clips, 4 per coarse class, PGM frames + landmarks."""
    root = tmp_path_factory.mktemp("faces")
    manifest, landmarks_dir = make_face_dataset(
        root, num_clips=16, height=96, width=80, frames_per_clip=5, seed=3
    )
    return manifest, landmarks_dir


@pytest.fixture()
def rng():
    return np.random.default_rng(0)

"""Shared fixtures: a small synthesized dataset reused across test modules."""

import pytest

from milvad.config import HyperParams
from milvad.data import SynthSpec, load_dataset, synthesize_dataset

DESK = HyperParams.desk_scale()


@pytest.fixture(scope="session")
def tiny_scene_data(tmp_path_factory):
    """Small scene-anomaly dataset: (train Dataset, test Dataset, out dir)."""
    out = tmp_path_factory.mktemp("tiny_scene")
    spec = SynthSpec(
        train_normal=6, train_anomaly=6, test_normal=5, test_anomaly=5,
        segments=8, frames_per_segment=10, channels=16, tracklets=4,
        kind="scene", magnitude=2.0, noise=0.5, seed=3,
    )
    manifests = synthesize_dataset(spec, out)
    return load_dataset(manifests["train"]), load_dataset(manifests["test"]), out

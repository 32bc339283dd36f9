"""Feature container, manifests, segment arithmetic and synthetic data."""

from .container import read_feature, write_feature
from .manifest import (
    Dataset,
    VideoFeatures,
    load_dataset,
    merge_datasets,
    read_annotations,
    write_annotations,
    write_manifest,
)
from .segments import GRANULARITIES, segment_boundaries
from .synthetic import SynthSpec, synthesize_dataset

__all__ = [
    "Dataset",
    "GRANULARITIES",
    "SynthSpec",
    "VideoFeatures",
    "load_dataset",
    "merge_datasets",
    "read_annotations",
    "read_feature",
    "segment_boundaries",
    "synthesize_dataset",
    "write_annotations",
    "write_feature",
    "write_manifest",
]

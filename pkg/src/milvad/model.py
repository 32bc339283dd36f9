"""Full two-stream anomaly scorer: parameters, forward paths, checkpoints."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .config import HyperParams
from .coupler import CouplerParams, fuse, segment_level_selection, video_level_selection
from .data.container import read_feature, write_feature
from .data.manifest import VideoFeatures
from .errors import InputError
from .human import HumanStreamParams, human_forward
from .scene import SceneStreamParams, scene_forward
from .tensor import Tensor

CHECKPOINT_VERSION = 1
PARAM_GROUPS = ("scene", "human", "coupler")


@dataclass
class ScoreBundle:
    """All score heads for one video, as (T,) float arrays."""

    scene: np.ndarray           # scene-stream detection scores, in [0,1]
    tracklet: np.ndarray        # human-stream detection scores, in [0,1]
    scene_factor: np.ndarray    # coupler selection factor for the scene stream
    human_factor: np.ndarray    # coupler selection factor for the human stream
    fused: np.ndarray           # coupled final score, in [0,2]

    def head(self, name: str) -> np.ndarray:
        if name == "fused":
            return self.fused
        if name == "scene":
            return self.scene
        if name == "tracklet":
            return self.tracklet
        raise InputError(f"unknown score head {name!r}")


class AnomalyScorer:
    """Scene stream + human stream + soft-selection coupler."""

    def __init__(self, hyper: HyperParams, seed: int = 0):
        hyper.validate()
        self.hyper = hyper
        rng = np.random.default_rng(seed)
        self.scene = SceneStreamParams.create(rng, hyper)
        self.human = HumanStreamParams.create(rng, hyper)
        self.coupler = CouplerParams.create(rng, hyper)

    # -- parameters -----------------------------------------------------

    def named_parameters(self, group: str | None = None) -> dict[str, Tensor]:
        if group is None:
            out = self.scene.tensors()
            out.update(self.human.tensors())
            out.update(self.coupler.tensors())
            return out
        if group == "scene":
            return self.scene.tensors()
        if group == "human":
            return self.human.tensors()
        if group == "coupler":
            return self.coupler.tensors()
        raise InputError(f"unknown parameter group {group!r}; expected one of {PARAM_GROUPS}")

    def set_trainable(self, groups) -> None:
        """Flag exactly the given groups' tensors as requiring gradients."""
        for group in PARAM_GROUPS:
            flag = group in groups
            for t in self.named_parameters(group).values():
                t.requires_grad = flag
                t.grad = None

    # -- forward paths ----------------------------------------------------

    def _check_video(self, video: VideoFeatures) -> None:
        hp = self.hyper
        if video.segments != hp.segments:
            raise InputError(
                f"video {video.video_id}: {video.segments} segments, model expects {hp.segments}"
            )
        if video.channels != hp.channels:
            raise InputError(
                f"video {video.video_id}: {video.channels} channels, model expects {hp.channels}"
            )

    def scene_scores_t(self, video: VideoFeatures) -> Tensor:
        self._check_video(video)
        scores, _ = scene_forward(self.scene, video.scene)
        return scores

    def tracklet_scores_t(self, video: VideoFeatures) -> Tensor:
        self._check_video(video)
        scores, _ = human_forward(self.human, video.tracklets, self.hyper.selected_tracklets)
        return scores

    def forward(self, video: VideoFeatures, use_video_selection: bool = True) -> dict[str, Tensor]:
        """All heads for one video as graph tensors (keys mirror ScoreBundle)."""
        self._check_video(video)
        scene_scores, scene_map = scene_forward(self.scene, video.scene)
        tracklet_scores, human_map = human_forward(
            self.human, video.tracklets, self.hyper.selected_tracklets
        )
        seg_h, seg_s, pooled = segment_level_selection(human_map, scene_map, self.coupler)
        video_attn = (
            video_level_selection(pooled, scene_map, self.coupler)
            if use_video_selection
            else None
        )
        factor_h, factor_s, fused = fuse((seg_h, seg_s), video_attn, tracklet_scores, scene_scores)
        return {
            "scene": scene_scores,
            "tracklet": tracklet_scores,
            "human_factor": factor_h,
            "scene_factor": factor_s,
            "fused": fused,
        }

    def head_scores_t(self, video: VideoFeatures, head: str,
                      use_video_selection: bool = True) -> Tensor:
        """The (T,) score tensor for one head, building only what it needs."""
        if head == "scene":
            return self.scene_scores_t(video)
        if head == "tracklet":
            return self.tracklet_scores_t(video)
        if head == "fused":
            return self.forward(video, use_video_selection)["fused"]
        raise InputError(f"unknown score head {head!r}")

    def score_video(self, video: VideoFeatures, use_video_selection: bool = True) -> ScoreBundle:
        out = self.forward(video, use_video_selection)
        return ScoreBundle(
            scene=out["scene"].data.copy(),
            tracklet=out["tracklet"].data.copy(),
            scene_factor=np.broadcast_to(out["scene_factor"].data, out["scene"].shape).copy(),
            human_factor=np.broadcast_to(out["human_factor"].data, out["scene"].shape).copy(),
            fused=out["fused"].data.copy(),
        )

    # -- checkpoints -----------------------------------------------------

    def save(self, index_path, extra: dict | None = None) -> Path:
        """Write a checkpoint: JSON index plus one container file per tensor."""
        index_path = Path(index_path)
        payload_dir = index_path.with_suffix(".tensors")
        payload_dir.mkdir(parents=True, exist_ok=True)
        tensors = {}
        for name, tensor in sorted(self.named_parameters().items()):
            rel = f"{payload_dir.name}/{name.replace('.', '_')}.hsnf"
            write_feature(index_path.parent / rel, tensor.data)
            tensors[name] = rel
        doc = {
            "format_version": CHECKPOINT_VERSION,
            "hyper": asdict(self.hyper),
            "tensors": tensors,
        }
        if extra:
            doc.update(extra)
        index_path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        return index_path

    @classmethod
    def load(cls, index_path) -> tuple["AnomalyScorer", dict]:
        """Rebuild a model from a checkpoint; returns (model, index document)."""
        index_path = Path(index_path)
        doc = json.loads(index_path.read_text())
        if doc.get("format_version") != CHECKPOINT_VERSION:
            raise InputError(
                f"{index_path}: unsupported checkpoint version {doc.get('format_version')}"
            )
        model = cls(HyperParams(**doc["hyper"]))
        params = model.named_parameters()
        if set(params) != set(doc["tensors"]):
            missing = sorted(set(params) ^ set(doc["tensors"]))
            raise InputError(f"{index_path}: tensor set mismatch near {missing[:3]}")
        for name, rel in doc["tensors"].items():
            data = read_feature(index_path.parent / rel)
            if data.shape != params[name].shape:
                raise InputError(
                    f"{index_path}: tensor {name} has shape {data.shape}, expected {params[name].shape}"
                )
            params[name].data = data
        return model, doc

"""Glyph-to-sequence pipeline shared by training, evaluation and the CLI."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import features, imageproc
from .errors import EmptyImage, EmptySkeleton
from .hmm import TrainConfig, Topology


@dataclass(frozen=True)
class PipelineConfig:
    side: int = 64
    threshold: imageproc.ThresholdMode = "otsu"
    prune_length: int = 0
    collapse: bool = False
    # "dark": ink darker than paper; "light": ink brighter (MNIST);
    # "auto": decide from the mean border intensity
    ink: str = "auto"
    train: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        if self.side < 16:
            raise ValueError("side must be >= 16")
        if self.ink not in ("dark", "light", "auto"):
            raise ValueError(f"ink must be dark, light or auto, not {self.ink!r}")
        if self.prune_length < 0:
            raise ValueError("prune_length must be >= 0")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["train"]["topology"] = str(self.train.topology)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        d = dict(d)
        train = dict(d.pop("train", {}))
        if "topology" in train:
            train["topology"] = Topology.parse(train["topology"])
        return cls(train=TrainConfig(**train), **d)


def dark_ink(gray: np.ndarray, ink: str = "auto") -> np.ndarray:
    """Return the image with ink darker than the paper."""
    gray = np.asarray(gray, dtype=np.uint8)
    if ink == "auto":
        border = np.concatenate([gray[0], gray[-1], gray[:, 0], gray[:, -1]])
        ink = "light" if border.mean() < 128 else "dark"
    return 255 - gray if ink == "light" else gray


@dataclass
class GlyphStages:
    binary: np.ndarray
    skeleton: Optional[np.ndarray] = None
    points: Optional[features.CharacteristicPoints] = None
    summary: Optional[features.FeatureSummary] = None
    sequence: Optional[list[int]] = None


def stages(gray: np.ndarray, cfg: PipelineConfig) -> GlyphStages:
    """Run every stage, stopping early (fields left ``None``) on blank input."""
    img = dark_ink(gray, cfg.ink)
    binary = imageproc.fill_holes(imageproc.remove_isolated_pixels(imageproc.binarize(img, cfg.threshold)))
    out = GlyphStages(binary=binary)
    try:
        normalized = imageproc.normalize_size(binary, cfg.side)
    except EmptyImage:
        return out
    skel = imageproc.thin(normalized)
    if cfg.prune_length:
        skel = imageproc.prune_spurs(skel, cfg.prune_length)
    out.skeleton = skel
    out.points = features.characteristic_points(skel)
    out.summary = features.summarize(skel, out.points)
    try:
        out.sequence = features.observation_sequence(skel, collapse=cfg.collapse)
    except EmptySkeleton:
        pass
    return out


def glyph_sequence(gray: np.ndarray, cfg: PipelineConfig) -> list[int]:
    """Observation sequence of one glyph; empty when the glyph must be rejected."""
    img = dark_ink(gray, cfg.ink)
    try:
        skel = imageproc.preprocess(img, cfg.threshold, cfg.side, cfg.prune_length)
        return features.observation_sequence(skel, collapse=cfg.collapse)
    except (EmptyImage, EmptySkeleton):
        return []


def sequences(images: Sequence[np.ndarray], cfg: PipelineConfig, workers: int = 1) -> list[list[int]]:
    if workers > 1 and len(images) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(glyph_sequence, images, [cfg] * len(images), chunksize=32))
    return [glyph_sequence(img, cfg) for img in images]

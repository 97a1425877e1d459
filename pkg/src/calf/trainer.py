"""A minimal differentiable per-pixel segmenter and its training loop.

The model is deliberately tiny: a logistic regression over four
per-pixel features (normalized intensity, 3x3 local mean, 3x3 local
standard deviation, and a bias), enough to learn intensity-threshold
segmentation on separable data while keeping every gradient checkable
by finite differences. Training is plain mini-batch SGD; when the loss
is set to ``auto`` the corpus' area moments pick the transform before
the first step, and both the choice and the moments are recorded in
the history.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.ndimage import uniform_filter

from . import data as data_mod
from .errors import DataError
from .losses import LossConfig, LossKind, loss_forward, loss_gradient, parse_kind
from .metrics import MetricReport, aggregate_reports, binarize, confusion, report
from .moments import compute_moments, corpus_areas, MomentSummary
from .selector import select_loss

__all__ = [
    "TinySegmenter",
    "TrainConfig",
    "TrainHistory",
    "AUTO",
    "features",
    "forward",
    "calf_train",
    "evaluate",
    "save_model",
    "load_model",
]

AUTO = "auto"
FEATURE_VERSION = 1
N_FEATURES = 4


@dataclass
class TinySegmenter:
    """Per-pixel logistic model p = sigmoid(w . phi(x))."""

    weights: np.ndarray = field(default_factory=lambda: np.zeros(N_FEATURES))

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.shape != (N_FEATURES,):
            raise ValueError(f"weights must have shape ({N_FEATURES},)")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 20
    learning_rate: float = 10.0
    batch_size: int = 1
    loss: LossKind | str = AUTO
    seed: int = 42
    loss_config: LossConfig = field(default_factory=LossConfig)
    threshold: float = 0.5
    include_empty: bool = False

    def validate(self) -> "TrainConfig":
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        if self.learning_rate <= 0.0:
            raise ValueError("learning_rate must be positive")
        self.loss_config.validate()
        return self


@dataclass(frozen=True)
class TrainHistory:
    epoch_losses: tuple[float, ...]
    selected_loss: LossKind
    moments_at_selection: MomentSummary | None


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def features(image: np.ndarray) -> np.ndarray:
    """Per-pixel feature stack of shape (h, w, 4).

    Channels: intensity/255, 3x3 local mean of that, 3x3 local standard
    deviation on the same scale, constant 1. Borders use edge-replicated
    windows.
    """
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2 or img.shape[0] < 3 or img.shape[1] < 3:
        raise DataError("image must be 2-D and at least 3x3")
    x = img / 255.0
    local_mean = uniform_filter(x, size=3, mode="nearest")
    local_sq = uniform_filter(x * x, size=3, mode="nearest")
    local_std = np.sqrt(np.maximum(local_sq - local_mean * local_mean, 0.0))
    ones = np.ones_like(x)
    return np.stack([x, local_mean, local_std, ones], axis=-1)


def forward(model: TinySegmenter, image: np.ndarray) -> np.ndarray:
    """Predicted foreground probability map for an image."""
    return _sigmoid(features(image) @ model.weights)


def _resolve_loss(corpus, cfg: TrainConfig) -> tuple[LossKind, MomentSummary | None]:
    if isinstance(cfg.loss, str) and cfg.loss.strip().lower() == AUTO:
        summary = compute_moments(corpus_areas(corpus.samples, include_empty=cfg.include_empty))
        return select_loss(summary.skewness, summary.kurtosis_excess), summary
    return parse_kind(cfg.loss), None


def calf_train(corpus, cfg: TrainConfig) -> tuple[TinySegmenter, TrainHistory]:
    """Mini-batch SGD on the selected (or requested) loss.

    Deterministic for a fixed (corpus, cfg): the epoch order shuffle,
    batching, and reductions are all seeded or ordered.
    """
    cfg = cfg.validate()
    if len(corpus) == 0:
        raise DataError("cannot train on an empty corpus")
    kind, summary = _resolve_loss(corpus, cfg)

    feats = []
    masks = []
    for s in corpus.samples:
        feats.append(features(data_mod.load_image(s)).reshape(-1, N_FEATURES))
        masks.append(data_mod.load_mask(s).reshape(-1).astype(np.float64))

    model = TinySegmenter()
    rng = np.random.default_rng(cfg.seed)
    n = len(corpus)
    epoch_losses = []
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        batch_losses = []
        for start in range(0, n, cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            phi = np.concatenate([feats[i] for i in batch], axis=0)
            y = np.concatenate([masks[i] for i in batch], axis=0)
            p = _sigmoid(phi @ model.weights)
            res = loss_gradient(kind, p, y, cfg.loss_config)
            batch_losses.append(res.value)
            dz = res.gradient * p * (1.0 - p)
            model.weights = model.weights - cfg.learning_rate * (phi.T @ dz)
        epoch_losses.append(float(np.mean(batch_losses)))

    history = TrainHistory(
        epoch_losses=tuple(epoch_losses),
        selected_loss=kind,
        moments_at_selection=summary,
    )
    return model, history


def evaluate(model: TinySegmenter, corpus, threshold: float = 0.5):
    """Macro-averaged metric report plus the per-sample reports."""
    if len(corpus) == 0:
        raise DataError("cannot evaluate on an empty corpus")
    per_image: list[tuple[str, MetricReport]] = []
    for s in corpus.samples:
        p = forward(model, data_mod.load_image(s))
        truth = data_mod.load_mask(s)
        pred = binarize(p, threshold)
        per_image.append((s.id, report(confusion(pred, truth), p, truth)))
    aggregate = aggregate_reports([r for _, r in per_image], mode="macro")
    return aggregate, per_image


def save_model(model: TinySegmenter, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {"weights": [float(w) for w in model.weights], "feature_version": FEATURE_VERSION}
    path.write_text(json.dumps(payload) + "\n")
    return path


def load_model(source) -> TinySegmenter:
    """Build a model from a payload dict or a JSON file path."""
    if isinstance(source, (str, Path)):
        path = Path(source)
        if not path.exists():
            raise DataError(f"model file not found: {path}")
        payload = json.loads(path.read_text())
    else:
        payload = source
    try:
        version = payload["feature_version"]
        weights = payload["weights"]
    except (KeyError, TypeError):
        raise DataError("model payload needs weights and feature_version") from None
    if version != FEATURE_VERSION:
        raise DataError(f"unsupported feature_version: {version}")
    if len(weights) != N_FEATURES:
        raise DataError(f"model must have {N_FEATURES} weights")
    return TinySegmenter(weights=np.asarray(weights, dtype=np.float64))

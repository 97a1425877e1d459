"""Adaptive segmentation loss toolkit.

Measures the statistical imbalance of a binary-segmentation corpus
(skewness/kurtosis of foreground areas), selects a matching loss
transformation, and provides forward/gradient evaluation, baseline
losses, corpus tooling, a tiny trainable segmenter, and evaluation
metrics behind an HTTP service and CLI.
"""

from .data import Corpus, RatioSpec, SampleRecord, apply_ratio, ingest, split
from .errors import CalfError, DataError, NumericError
from .losses import (
    CALF_KINDS,
    LossConfig,
    LossKind,
    LossResult,
    clamp_probs,
    dice_coefficient,
    loss_forward,
    loss_gradient,
)
from .metrics import ConfusionCounts, MetricReport, binarize, confusion, report
from .moments import MomentSummary, compute_moments, foreground_area
from .selector import select_loss
from .synth import SynthSpec, generate
from .trainer import TinySegmenter, TrainConfig, TrainHistory, calf_train, evaluate, forward

__version__ = "0.1.0"

__all__ = [
    "CALF_KINDS",
    "CalfError",
    "ConfusionCounts",
    "Corpus",
    "DataError",
    "LossConfig",
    "LossKind",
    "LossResult",
    "MetricReport",
    "MomentSummary",
    "NumericError",
    "RatioSpec",
    "SampleRecord",
    "SynthSpec",
    "TinySegmenter",
    "TrainConfig",
    "TrainHistory",
    "apply_ratio",
    "binarize",
    "calf_train",
    "clamp_probs",
    "compute_moments",
    "confusion",
    "dice_coefficient",
    "evaluate",
    "foreground_area",
    "forward",
    "generate",
    "ingest",
    "loss_forward",
    "loss_gradient",
    "report",
    "select_loss",
    "split",
]

"""Forward values and analytic gradients for the adaptive loss family.

Six moment-selected transforms (fisher, logit, arcsine, log10,
natural_log, bce_dice) plus four benchmark baselines (dice, tversky,
iou, focal; bce is the natural_log formula under its conventional
name). All losses consume a probability map ``p`` in [0, 1] and a
binary mask ``y``, reduce by the arithmetic mean over every pixel
passed in (a batch is just a bigger map), and are evaluated on a
clamped copy of ``p`` so the logarithmic and inverse-hyperbolic terms
stay finite.

Gradients are taken with respect to the clamped probabilities; callers
that train through a sigmoid compose with dp/dz = p(1-p) themselves.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError

__all__ = [
    "LossKind",
    "CALF_KINDS",
    "BASELINE_KINDS",
    "LossConfig",
    "LossResult",
    "clamp_probs",
    "dice_coefficient",
    "loss_forward",
    "loss_gradient",
    "parse_kind",
]

_LN10 = math.log(10.0)


class LossKind(str, enum.Enum):
    """The selectable transforms and the benchmark baselines."""

    FISHER = "fisher"
    LOGIT = "logit"
    ARCSINE = "arcsine"
    LOG10 = "log10"
    NATURAL_LOG = "natural_log"
    BCE_DICE = "bce_dice"
    BCE = "bce"
    DICE = "dice"
    TVERSKY = "tversky"
    IOU = "iou"
    FOCAL = "focal"

    def __str__(self) -> str:  # keeps CLI/JSON output plain
        return self.value


CALF_KINDS = frozenset(
    {
        LossKind.FISHER,
        LossKind.LOGIT,
        LossKind.ARCSINE,
        LossKind.LOG10,
        LossKind.NATURAL_LOG,
        LossKind.BCE_DICE,
    }
)
BASELINE_KINDS = frozenset(
    {LossKind.BCE, LossKind.DICE, LossKind.TVERSKY, LossKind.IOU, LossKind.FOCAL}
)


def parse_kind(name) -> LossKind:
    """Resolve a loss kind from its string name."""
    if isinstance(name, LossKind):
        return name
    try:
        return LossKind(str(name).strip().lower())
    except ValueError:
        raise ValueError(f"unknown loss kind: {name!r}") from None


@dataclass(frozen=True)
class LossConfig:
    """Numerical knobs shared by the loss family.

    ``clamp_eps`` bounds probabilities away from {0, 1}; ``dice_eps``
    is the overlap regularizer of the dice-style ratios. The focal and
    tversky parameters carry the conventional literature defaults.
    """

    clamp_eps: float = 1e-7
    dice_eps: float = 1e-6
    focal_gamma: float = 2.0
    focal_alpha: float = 0.25
    tversky_alpha: float = 0.3
    tversky_beta: float = 0.7

    def validate(self) -> "LossConfig":
        if not (0.0 < self.clamp_eps < 0.5):
            raise ValueError("clamp_eps must lie in (0, 0.5)")
        if not self.dice_eps > 0.0:
            raise ValueError("dice_eps must be positive")
        if self.focal_gamma < 0.0:
            raise ValueError("focal_gamma must be non-negative")
        if not (0.0 < self.focal_alpha < 1.0):
            raise ValueError("focal_alpha must lie in (0, 1)")
        return self


@dataclass(frozen=True)
class LossResult:
    """Scalar loss plus the per-pixel gradient d(loss)/dp."""

    value: float
    gradient: np.ndarray


def clamp_probs(p: np.ndarray, eps: float) -> np.ndarray:
    """Clip probabilities into [eps, 1-eps]; interior values pass through."""
    if not (0.0 < eps < 0.5):
        raise ValueError("eps must lie in (0, 0.5)")
    return np.clip(np.asarray(p, dtype=np.float64), eps, 1.0 - eps)


def _checked_pair(p, y) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(p, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if p.shape != y.shape:
        raise DataError(f"shape mismatch: prediction {p.shape} vs mask {y.shape}")
    if p.size == 0:
        raise DataError("empty prediction map")
    if p.min() < 0.0 or p.max() > 1.0:
        raise DataError("prediction values must lie in [0, 1]")
    if not ((y == 0.0) | (y == 1.0)).all():
        raise DataError("mask values must be 0 or 1")
    return p, y


def dice_coefficient(p: np.ndarray, y: np.ndarray, eps: float) -> float:
    """Soft overlap ratio (2*sum(y*p) + eps) / (sum(y) + sum(p) + eps)."""
    if eps < 0.0:
        raise ValueError("eps must be non-negative")
    p, y = _checked_pair(p, y)
    num = 2.0 * float(np.sum(y * p)) + eps
    den = float(np.sum(y)) + float(np.sum(p)) + eps
    if den == 0.0:
        # both maps empty and eps == 0: perfect (vacuous) overlap
        return 1.0
    return num / den


# The five transforms of the form -E[y*g(p) + (1-y)*g(1-p)], as
# (g, g') pairs; bce shares the natural_log row bit-for-bit.
def _g_fisher(t):
    return np.arctanh(t)


def _dg_fisher(t):
    return 1.0 / (1.0 - t * t)


def _g_logit(t):
    return np.log(t) - np.log1p(-t)


def _dg_logit(t):
    return 1.0 / (t * (1.0 - t))


def _g_arcsine(t):
    return np.arcsin(np.sqrt(t))


def _dg_arcsine(t):
    return 1.0 / (2.0 * np.sqrt(t * (1.0 - t)))


def _g_log10(t):
    return np.log10(t)


def _dg_log10(t):
    return 1.0 / (t * _LN10)


def _g_ln(t):
    return np.log(t)


def _dg_ln(t):
    return 1.0 / t


_TRANSFORMS = {
    LossKind.FISHER: (_g_fisher, _dg_fisher),
    LossKind.LOGIT: (_g_logit, _dg_logit),
    LossKind.ARCSINE: (_g_arcsine, _dg_arcsine),
    LossKind.LOG10: (_g_log10, _dg_log10),
    LossKind.NATURAL_LOG: (_g_ln, _dg_ln),
    LossKind.BCE: (_g_ln, _dg_ln),
}


def _transform_value(kind, pc, y):
    g, _ = _TRANSFORMS[kind]
    return -float(np.mean(y * g(pc) + (1.0 - y) * g(1.0 - pc)))


def _transform_grad(kind, pc, y):
    _, dg = _TRANSFORMS[kind]
    return -(y * dg(pc) - (1.0 - y) * dg(1.0 - pc)) / pc.size


def _dice_terms(pc, y, eps):
    num = 2.0 * float(np.sum(y * pc)) + eps
    den = float(np.sum(y)) + float(np.sum(pc)) + eps
    return num, den


def _bce_dice_value(pc, y, cfg):
    num, den = _dice_terms(pc, y, cfg.dice_eps)
    return _transform_value(LossKind.BCE, pc, y) + (1.0 - num / den)


def _bce_dice_grad(pc, y, cfg):
    num, den = _dice_terms(pc, y, cfg.dice_eps)
    ddc = (2.0 * y * den - num) / (den * den)
    return _transform_grad(LossKind.BCE, pc, y) - ddc


def _dice_value(pc, y, cfg):
    num, den = _dice_terms(pc, y, cfg.dice_eps)
    return 1.0 - num / den


def _dice_grad(pc, y, cfg):
    num, den = _dice_terms(pc, y, cfg.dice_eps)
    return -(2.0 * y * den - num) / (den * den)


def _iou_value(pc, y, cfg):
    inter = float(np.sum(y * pc))
    num = inter + cfg.dice_eps
    den = float(np.sum(y)) + float(np.sum(pc)) - inter + cfg.dice_eps
    return 1.0 - num / den


def _iou_grad(pc, y, cfg):
    inter = float(np.sum(y * pc))
    num = inter + cfg.dice_eps
    den = float(np.sum(y)) + float(np.sum(pc)) - inter + cfg.dice_eps
    return -(y * den - num * (1.0 - y)) / (den * den)


def _tversky_terms(pc, y, cfg):
    inter = float(np.sum(y * pc))
    num = inter + cfg.dice_eps
    den = (
        inter
        + cfg.tversky_alpha * float(np.sum(y * (1.0 - pc)))
        + cfg.tversky_beta * float(np.sum((1.0 - y) * pc))
        + cfg.dice_eps
    )
    return num, den


def _tversky_value(pc, y, cfg):
    num, den = _tversky_terms(pc, y, cfg)
    return 1.0 - num / den


def _tversky_grad(pc, y, cfg):
    num, den = _tversky_terms(pc, y, cfg)
    dden = y - cfg.tversky_alpha * y + cfg.tversky_beta * (1.0 - y)
    return -(y * den - num * dden) / (den * den)


def _focal_value(pc, y, cfg):
    a, g = cfg.focal_alpha, cfg.focal_gamma
    term = a * y * (1.0 - pc) ** g * np.log(pc) + (1.0 - a) * (1.0 - y) * pc**g * np.log1p(-pc)
    return -float(np.mean(term))


def _focal_grad(pc, y, cfg):
    a, g = cfg.focal_alpha, cfg.focal_gamma
    pos = a * y * ((1.0 - pc) ** g / pc - g * (1.0 - pc) ** (g - 1.0) * np.log(pc))
    neg = (1.0 - a) * (1.0 - y) * (g * pc ** (g - 1.0) * np.log1p(-pc) - pc**g / (1.0 - pc))
    return -(pos + neg) / pc.size


def loss_forward(kind, p, y, cfg: LossConfig | None = None) -> float:
    """Scalar loss of ``kind`` for prediction ``p`` against mask ``y``."""
    kind = parse_kind(kind)
    cfg = (cfg or LossConfig()).validate()
    p, y = _checked_pair(p, y)
    pc = clamp_probs(p, cfg.clamp_eps)
    if kind in _TRANSFORMS:
        return _transform_value(kind, pc, y)
    if kind is LossKind.BCE_DICE:
        return _bce_dice_value(pc, y, cfg)
    if kind is LossKind.DICE:
        return _dice_value(pc, y, cfg)
    if kind is LossKind.IOU:
        return _iou_value(pc, y, cfg)
    if kind is LossKind.TVERSKY:
        return _tversky_value(pc, y, cfg)
    if kind is LossKind.FOCAL:
        return _focal_value(pc, y, cfg)
    raise ValueError(f"unknown loss kind: {kind!r}")


def loss_gradient(kind, p, y, cfg: LossConfig | None = None) -> LossResult:
    """Loss value plus d(loss)/dp at the clamped probabilities.

    Pixels sitting at the clamp boundary receive the analytic gradient
    evaluated at the clamped value rather than zero, so optimizers keep
    a consistent descent direction there.
    """
    kind = parse_kind(kind)
    cfg = (cfg or LossConfig()).validate()
    p, y = _checked_pair(p, y)
    pc = clamp_probs(p, cfg.clamp_eps)
    if kind in _TRANSFORMS:
        value = _transform_value(kind, pc, y)
        grad = _transform_grad(kind, pc, y)
    elif kind is LossKind.BCE_DICE:
        value = _bce_dice_value(pc, y, cfg)
        grad = _bce_dice_grad(pc, y, cfg)
    elif kind is LossKind.DICE:
        value = _dice_value(pc, y, cfg)
        grad = _dice_grad(pc, y, cfg)
    elif kind is LossKind.IOU:
        value = _iou_value(pc, y, cfg)
        grad = _iou_grad(pc, y, cfg)
    elif kind is LossKind.TVERSKY:
        value = _tversky_value(pc, y, cfg)
        grad = _tversky_grad(pc, y, cfg)
    elif kind is LossKind.FOCAL:
        value = _focal_value(pc, y, cfg)
        grad = _focal_grad(pc, y, cfg)
    else:
        raise ValueError(f"unknown loss kind: {kind!r}")
    return LossResult(value=value, gradient=grad)

"""Moment-driven choice of loss transformation.

The rules map (skewness S, excess kurtosis K) of the foreground-area
distribution to one of the six adaptive transforms. Rows are evaluated
in a fixed order with first-match-wins, which resolves the boundary
overlap at S = 0.5 in favor of natural_log. S = 0 is folded into the
mild-positive-skew band, so a perfectly symmetric (or degenerate)
corpus selects log10 when K < 0 and bce_dice otherwise.
"""

from __future__ import annotations

import math

from .errors import NumericError
from .losses import CALF_KINDS, LossKind

__all__ = ["select_loss", "CALF_KINDS"]


def select_loss(skewness: float, kurtosis_excess: float) -> LossKind:
    """Pick the loss transformation for the given area moments."""
    s = float(skewness)
    k = float(kurtosis_excess)
    if not (math.isfinite(s) and math.isfinite(k)):
        raise NumericError("non-finite moment")
    if s <= -1.0:
        return LossKind.FISHER
    if s <= -0.5:
        return LossKind.LOGIT
    if s < 0.0:
        return LossKind.ARCSINE
    if s >= 1.0:
        return LossKind.LOG10
    if s >= 0.5:
        return LossKind.NATURAL_LOG
    if k < 0.0:
        return LossKind.LOG10
    return LossKind.BCE_DICE

"""Synthetic segmentation corpora with controllable area statistics.

Each ROI-present image carries one axis-aligned elliptical bright
region on a Gaussian-noise background; the mask is the exact ellipse
raster. Foreground areas are drawn from a per-regime sampler whose
stratified inverse-CDF draws concentrate the realized skewness and
kurtosis near the regime's target band. The contract is the post-hoc
check, not the sampler: after rasterization the realized areas must
select the requested transform, otherwise generation retries with the
next seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import stats

from .data import Corpus, ingest, write_corpus
from .errors import NumericError
from .losses import CALF_KINDS, LossKind, parse_kind
from .moments import compute_moments
from .selector import select_loss

__all__ = ["SynthSpec", "generate", "MIN_REGIME_COUNT"]

MIN_REGIME_COUNT = 20
MAX_ATTEMPTS = 20

_AREA_LO, _AREA_HI = 30.0, 1000.0
_BACKGROUND_MEAN = 0.3 * 255.0

# Regime samplers over [0, 1], mapped affinely onto the area range.
# Beta shapes put the population skewness near the center of each
# band; the heavy-tailed asymmetric Laplace covers the positive-excess-
# kurtosis branch.
_REGIME_DISTS = {
    LossKind.FISHER: stats.beta(12.0, 1.05),
    LossKind.LOGIT: stats.beta(6.0, 1.75),
    LossKind.ARCSINE: stats.beta(6.0, 3.8),
    LossKind.LOG10: stats.beta(1.05, 12.0),
    LossKind.NATURAL_LOG: stats.beta(1.75, 6.0),
    LossKind.BCE_DICE: stats.laplace_asymmetric(0.93, loc=0.45, scale=0.06),
}


@dataclass(frozen=True)
class SynthSpec:
    count: int
    width: int = 64
    height: int = 64
    roi_fraction: float = 0.7
    regime: LossKind | None = None
    noise_sigma: float = 8.0
    contrast: float = 60.0
    seed: int = 0

    def validate(self) -> "SynthSpec":
        if self.count < 1:
            raise ValueError("count must be positive")
        if self.width < 8 or self.height < 8:
            raise ValueError("images must be at least 8x8")
        if not (0.0 <= self.roi_fraction <= 1.0):
            raise ValueError("roi_fraction must lie in [0, 1]")
        if self.noise_sigma < 0.0:
            raise ValueError("noise_sigma must be non-negative")
        if self.contrast <= 0.0:
            raise ValueError("contrast must be positive")
        if self.regime is not None:
            regime = parse_kind(self.regime)
            if regime not in CALF_KINDS:
                raise ValueError(f"regime must be one of the adaptive kinds, got {regime}")
            if self.count < MIN_REGIME_COUNT:
                raise ValueError(
                    f"count must be >= {MIN_REGIME_COUNT} when a regime is requested"
                )
            return replace(self, regime=regime)
        return self


def _target_areas(regime: LossKind | None, n: int, rng: np.random.Generator, cap: float) -> np.ndarray:
    hi = min(_AREA_HI, cap)
    if regime is None:
        x = rng.beta(2.0, 2.0, n)
    else:
        # stratified inverse-CDF draws: one jittered quantile per image
        u = (np.arange(n) + rng.uniform(0.2, 0.8, n)) / max(n, 1)
        x = _REGIME_DISTS[regime].ppf(u)
        x = np.clip(x, 0.0, 1.0)
        rng.shuffle(x)
    return _AREA_LO + (hi - _AREA_LO) * x


def _ellipse_mask(width, height, area, rng) -> np.ndarray:
    aspect = rng.uniform(0.65, 1.55)
    a = math.sqrt(area * aspect / math.pi)
    b = math.sqrt(area / (aspect * math.pi))
    # keep the ellipse fully inside the frame with a 1px margin
    a = min(a, width / 2.0 - 1.5)
    b = min(b, height / 2.0 - 1.5)
    cx = rng.uniform(a + 1.0, width - a - 1.0)
    cy = rng.uniform(b + 1.0, height - b - 1.0)
    xs = np.arange(width, dtype=np.float64) + 0.5
    ys = np.arange(height, dtype=np.float64) + 0.5
    dx = (xs[None, :] - cx) / a
    dy = (ys[:, None] - cy) / b
    return (dx * dx + dy * dy <= 1.0).astype(np.uint8)


def _render(spec: SynthSpec, seed: int):
    rng = np.random.default_rng(seed)
    n_present = round(spec.count * spec.roi_fraction)
    present_idx = set(rng.permutation(spec.count)[:n_present].tolist())
    cap = 0.25 * spec.width * spec.height  # ellipse must fit comfortably
    targets = _target_areas(spec.regime, spec.count, rng, cap)

    items = []
    present_areas = []
    for i in range(spec.count):
        noise = rng.normal(_BACKGROUND_MEAN, spec.noise_sigma, (spec.height, spec.width))
        if i in present_idx:
            mask = _ellipse_mask(spec.width, spec.height, targets[i], rng)
            present_areas.append(int(mask.sum()))
        else:
            mask = np.zeros((spec.height, spec.width), dtype=np.uint8)
        image = np.clip(np.rint(noise + spec.contrast * mask), 0, 255).astype(np.uint8)
        items.append((f"s{i:04d}", image, mask))
    return items, present_areas


def generate(spec: SynthSpec, out_dir) -> Corpus:
    """Write a synthetic corpus to ``out_dir`` and return it ingested.

    With a regime set, regeneration retries (seed+1, up to 20 attempts)
    until the realized present-sample areas select the requested
    transform; failure raises with the last achieved (S, K).
    """
    spec = spec.validate()
    last = None
    attempts = 1 if spec.regime is None else MAX_ATTEMPTS
    for attempt in range(attempts):
        items, present_areas = _render(spec, spec.seed + attempt)
        if spec.regime is None:
            break
        summary = compute_moments(present_areas) if present_areas else None
        if summary is not None and select_loss(summary.skewness, summary.kurtosis_excess) == spec.regime:
            break
        last = summary
    else:
        achieved = (
            f"S={last.skewness:.4f}, K={last.kurtosis_excess:.4f}"
            if last is not None
            else "no ROI-present samples"
        )
        raise NumericError(
            f"could not realize regime {spec.regime} after {MAX_ATTEMPTS} attempts ({achieved})"
        )
    manifest = write_corpus(out_dir, items)
    return ingest(manifest)

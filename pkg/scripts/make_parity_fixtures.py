#!/usr/bin/env python3
"""Regenerate the client parity fixtures from the core implementation.

Writes frontend/fixtures/parity.json: 50 seed-fixed cases per exported
client function with the core's exact IEEE-754 results. The client test
suite replays the inputs through the HTTP service and requires
agreement within 1e-12 (JSON round-trips doubles losslessly, so the
expected deviation is zero).
"""

import json
from pathlib import Path

import numpy as np

from calf.losses import LossConfig, LossKind, loss_gradient
from calf.moments import compute_moments

OUT = Path(__file__).resolve().parent.parent / "frontend" / "fixtures" / "parity.json"


def moments_cases(rng, n_cases=50):
    cases = []
    for i in range(n_cases):
        n = int(rng.integers(3, 80))
        areas = rng.integers(0, 100_000, n).astype(float)
        if i == 0:
            areas = np.array([1.0, 2.0, 3.0])
        elif i == 1:
            areas = np.array([5.0, 5.0, 5.0])  # degenerate: zero variance
        m = compute_moments(areas)
        cases.append(
            {
                "areas": areas.tolist(),
                "expected": {
                    "mean": m.mean,
                    "std": m.std,
                    "skewness": m.skewness,
                    "kurtosis_excess": m.kurtosis_excess,
                },
            }
        )
    return cases


def loss_cases(rng, n_cases=50):
    kinds = [k.value for k in LossKind]
    cases = []
    for i in range(n_cases):
        kind = kinds[i % len(kinds)]
        w = int(rng.integers(3, 12))
        h = int(rng.integers(3, 12))
        p = rng.uniform(0.02, 0.98, (h, w))
        y = (rng.random((h, w)) < 0.4).astype(float)
        eps = 1e-7 if i % 3 else 1e-6
        res = loss_gradient(kind, p, y, LossConfig(clamp_eps=eps))
        cases.append(
            {
                "kind": kind,
                "width": w,
                "height": h,
                "eps": eps,
                "p": p.reshape(-1).tolist(),
                "y": y.reshape(-1).tolist(),
                "expected": {
                    "value": res.value,
                    "gradient": res.gradient.reshape(-1).tolist(),
                },
            }
        )
    return cases


def main():
    rng = np.random.default_rng(771177)
    payload = {
        "abi_version": 1,
        "moments": moments_cases(rng),
        "loss": loss_cases(rng),
    }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(payload) + "\n")
    print(f"wrote {OUT} ({OUT.stat().st_size} bytes)")


if __name__ == "__main__":
    main()

import math

import numpy as np
import pytest

from calf.errors import NumericError
from calf.losses import CALF_KINDS, LossKind
from calf.selector import select_loss

# one interior point per rule row
ROW_FIXTURES = [
    (-2.0, 0.0, LossKind.FISHER),
    (-0.75, 0.0, LossKind.LOGIT),
    (-0.25, 0.0, LossKind.ARCSINE),
    (1.5, 0.0, LossKind.LOG10),
    (0.75, 0.0, LossKind.NATURAL_LOG),
    (0.25, -1.0, LossKind.LOG10),
    (0.25, 1.0, LossKind.BCE_DICE),
]


@pytest.mark.parametrize("s,k,expected", ROW_FIXTURES)
def test_row_fixtures(s, k, expected):
    assert select_loss(s, k) == expected


@pytest.mark.parametrize(
    "s,k,expected",
    [
        (-1.2, 0.0, LossKind.FISHER),
        (2.0, 5.0, LossKind.LOG10),
        (0.3, -0.5, LossKind.LOG10),
        (0.3, 0.2, LossKind.BCE_DICE),
        (0.0, 1.0, LossKind.BCE_DICE),  # symmetric corpus, heavy tails
        (0.5, 0.0, LossKind.NATURAL_LOG),  # boundary overlap: first match wins
    ],
)
def test_documented_examples(s, k, expected):
    assert select_loss(s, k) == expected


def test_boundary_cases():
    assert select_loss(-1.0, 0.0) == LossKind.FISHER
    assert select_loss(-0.5, 0.0) == LossKind.LOGIT
    assert select_loss(0.0, -0.1) == LossKind.LOG10
    assert select_loss(0.0, 0.0) == LossKind.BCE_DICE
    assert select_loss(0.5, -3.0) == LossKind.NATURAL_LOG
    assert select_loss(1.0, 0.0) == LossKind.LOG10


def test_totality_on_grid():
    ks = (-1.5, -0.1, 0.0, 0.1, 3.0)
    count = 0
    for i in range(601):
        s = -3.0 + 0.01 * i
        for k in ks:
            kind = select_loss(s, k)
            assert kind in CALF_KINDS
            count += 1
    assert count == 601 * 5


def test_determinism(rng):
    for _ in range(100):
        s = float(rng.uniform(-3, 3))
        k = float(rng.uniform(-2, 5))
        assert select_loss(s, k) == select_loss(s, k)


def test_kurtosis_only_matters_in_band():
    ks = np.linspace(-5, 5, 41)
    for s in (-2.5, -1.0, -0.75, -0.25, 0.5, 0.75, 1.2, 3.0):
        outs = {select_loss(s, float(k)) for k in ks}
        assert len(outs) == 1, f"K changed output at S={s}"
    for s in (0.0, 0.25, 0.49):
        assert select_loss(s, -1.0) != select_loss(s, 1.0)


def test_non_finite_raises():
    for s, k in [(math.nan, 0.0), (0.0, math.nan), (math.inf, 0.0), (0.0, -math.inf)]:
        with pytest.raises(NumericError, match="non-finite moment"):
            select_loss(s, k)

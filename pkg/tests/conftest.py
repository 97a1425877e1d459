import numpy as np
import pytest

from calf.data import Corpus, SampleRecord, ingest, write_corpus
from calf.losses import loss_forward


def make_png_corpus(tmp_path, items):
    """Write (id, image, mask) triples and ingest them back."""
    manifest = write_corpus(tmp_path, items)
    return ingest(manifest), manifest


def fake_corpus(n_present, n_absent, width=16, height=16):
    """In-memory corpus for filter/split tests; no files behind it."""
    samples = []
    for i in range(n_present):
        samples.append(
            SampleRecord(
                id=f"p{i:04d}",
                image_path=f"/nowhere/p{i}.png",
                mask_path=f"/nowhere/pm{i}.png",
                roi_present=True,
                foreground_area=10 + i,
            )
        )
    for i in range(n_absent):
        samples.append(
            SampleRecord(
                id=f"a{i:04d}",
                image_path=f"/nowhere/a{i}.png",
                mask_path=f"/nowhere/am{i}.png",
                roi_present=False,
                foreground_area=0,
            )
        )
    return Corpus(samples=tuple(samples), width=width, height=height)


def random_pair(rng, shape=(16, 16), p_lo=0.05, p_hi=0.95, fg=0.4):
    p = rng.uniform(p_lo, p_hi, shape)
    y = (rng.random(shape) < fg).astype(np.float64)
    return p, y


def fd_gradient(kind, p, y, cfg, h=1e-6):
    """Central finite differences of the scalar loss, pixel by pixel."""
    base = np.array(p, dtype=np.float64)
    grad = np.zeros_like(base)
    for idx in np.ndindex(base.shape):
        orig = base[idx]
        base[idx] = orig + h
        fp = loss_forward(kind, base, y, cfg)
        base[idx] = orig - h
        fm = loss_forward(kind, base, y, cfg)
        base[idx] = orig
        grad[idx] = (fp - fm) / (2.0 * h)
    return grad


def assert_gradients_close(analytic, fd, rel_tol=1e-4, abs_tol=1e-6):
    analytic = np.asarray(analytic)
    fd = np.asarray(fd)
    scale = np.maximum(np.abs(analytic), np.abs(fd))
    big = scale > abs_tol
    assert np.all(np.abs(analytic - fd)[big] <= rel_tol * scale[big]), (
        f"relative gradient error above {rel_tol}"
    )
    assert np.all(np.abs(analytic - fd)[~big] <= abs_tol), (
        f"absolute gradient error above {abs_tol}"
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)

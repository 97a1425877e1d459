import numpy as np
import pytest

from calf.data import RatioSpec, apply_ratio, split
from calf.errors import DataError
from calf.losses import LossConfig, LossKind, loss_forward
from calf.metrics import confusion, report
from calf.moments import compute_corpus_moments
from calf.selector import select_loss
from calf.synth import SynthSpec, generate
from calf.trainer import (
    AUTO,
    TinySegmenter,
    TrainConfig,
    calf_train,
    evaluate,
    features,
    forward,
    load_model,
    save_model,
)

from .conftest import make_png_corpus


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


@pytest.fixture(scope="module")
def small_corpus(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    return generate(
        SynthSpec(count=24, width=32, height=32, roi_fraction=0.75, noise_sigma=6.0,
                  contrast=80.0, seed=31),
        out,
    )


def test_forward_zero_weights_gives_half(rng):
    img = rng.integers(0, 256, (8, 8)).astype(np.uint8)
    p = forward(TinySegmenter(), img)
    assert np.all(p == 0.5)


def test_forward_bias_only(rng):
    img = rng.integers(0, 256, (8, 8)).astype(np.uint8)
    p = forward(TinySegmenter(weights=np.array([0.0, 0.0, 0.0, 10.0])), img)
    assert p == pytest.approx(_sigmoid(10.0) * np.ones((8, 8)), abs=1e-12)
    assert p[0, 0] == pytest.approx(0.999955, abs=1e-6)


def test_forward_constant_on_uniform_image(rng):
    img = np.full((9, 7), 113, dtype=np.uint8)
    w = rng.normal(size=4)
    p = forward(TinySegmenter(weights=w), img)
    assert np.allclose(p, p[0, 0], atol=0)


def test_forward_rejects_tiny_images():
    with pytest.raises(DataError):
        forward(TinySegmenter(), np.zeros((2, 5), dtype=np.uint8))


def test_features_shape_and_bias(rng):
    img = rng.integers(0, 256, (6, 5)).astype(np.uint8)
    phi = features(img)
    assert phi.shape == (6, 5, 4)
    assert np.all(phi[..., 3] == 1.0)
    assert np.all((phi[..., 0] >= 0) & (phi[..., 0] <= 1))
    # interior local mean matches a hand computation
    win = img[0:3, 0:3].astype(float) / 255.0
    assert phi[1, 1, 1] == pytest.approx(win.mean(), abs=1e-12)
    assert phi[1, 1, 2] == pytest.approx(win.std(), abs=1e-12)


def test_zero_epochs_returns_initial_weights(small_corpus):
    model, history = calf_train(small_corpus, TrainConfig(epochs=0, loss=LossKind.BCE))
    assert np.array_equal(model.weights, np.zeros(4))
    assert history.epoch_losses == ()
    assert history.selected_loss == LossKind.BCE
    assert history.moments_at_selection is None


def test_empty_corpus_raises(small_corpus):
    empty = small_corpus.subset([])
    with pytest.raises(DataError):
        calf_train(empty, TrainConfig())
    with pytest.raises(DataError):
        evaluate(TinySegmenter(), empty)


@pytest.mark.parametrize("kind", list(LossKind))
def test_weight_gradient_matches_finite_differences(kind, small_corpus, rng):
    cfg = LossConfig()
    batch = small_corpus.samples[:2]
    from calf.data import load_image, load_mask
    from calf.losses import loss_gradient

    phi = np.concatenate([features(load_image(s)).reshape(-1, 4) for s in batch])
    y = np.concatenate([load_mask(s).reshape(-1).astype(float) for s in batch])
    w = rng.normal(scale=0.5, size=4)

    p = _sigmoid(phi @ w)
    res = loss_gradient(kind, p, y, cfg)
    analytic = phi.T @ (res.gradient * p * (1.0 - p))

    h = 1e-5
    fd = np.zeros(4)
    for k in range(4):
        wp = w.copy()
        wp[k] += h
        fp = loss_forward(kind, _sigmoid(phi @ wp), y, cfg)
        wp[k] -= 2 * h
        fm = loss_forward(kind, _sigmoid(phi @ wp), y, cfg)
        fd[k] = (fp - fm) / (2 * h)
    scale = np.maximum(np.abs(fd), 1e-8)
    assert np.all(np.abs(analytic - fd) / scale <= 1e-3), f"{kind}: {analytic} vs {fd}"


def test_single_batch_descent_is_monotone(small_corpus):
    cfg = TrainConfig(epochs=10, learning_rate=1e-4, batch_size=len(small_corpus),
                      loss=LossKind.BCE, seed=1)
    _, history = calf_train(small_corpus, cfg)
    losses = np.array(history.epoch_losses)
    assert len(losses) == 10
    assert np.all(np.diff(losses) <= 1e-12)


def test_auto_selection_on_regime_corpus(tmp_path):
    corpus = generate(
        SynthSpec(count=60, width=48, height=48, roi_fraction=0.9, regime="fisher", seed=5),
        tmp_path,
    )
    _, history = calf_train(corpus, TrainConfig(epochs=1, loss=AUTO, seed=0))
    assert history.selected_loss == LossKind.FISHER
    m = history.moments_at_selection
    assert m is not None
    assert select_loss(m.skewness, m.kurtosis_excess) == history.selected_loss
    expected = compute_corpus_moments(corpus)
    assert m.skewness == expected.skewness


def test_training_is_deterministic(small_corpus):
    cfg = TrainConfig(epochs=3, loss=AUTO, seed=123)
    m1, h1 = calf_train(small_corpus, cfg)
    m2, h2 = calf_train(small_corpus, cfg)
    assert np.array_equal(m1.weights, m2.weights)
    assert h1.epoch_losses == h2.epoch_losses


def test_vanishing_learning_rate_keeps_weights(small_corpus):
    cfg = TrainConfig(epochs=2, learning_rate=1e-12, loss=LossKind.BCE, seed=0)
    model, _ = calf_train(small_corpus, cfg)
    assert np.linalg.norm(model.weights) <= 1e-6


def test_trained_segmenter_beats_dsc_bar(small_corpus):
    train, test = split(small_corpus, 0.25, seed=9)
    model, _ = calf_train(train, TrainConfig(epochs=30, learning_rate=10.0,
                                             batch_size=1, loss=LossKind.BCE, seed=9))
    aggregate, per_image = evaluate(model, test, 0.5)
    assert aggregate.dsc >= 0.8
    assert len(per_image) == len(test)


def test_evaluate_matches_manual_confusion(small_corpus):
    model = TinySegmenter()  # p == 0.5 everywhere -> all-ones prediction at t=0.5
    from calf.data import load_mask

    aggregate, per_image = evaluate(model, small_corpus, 0.5)
    for (sid, rep), sample in zip(per_image, small_corpus.samples):
        truth = load_mask(sample)
        ones = np.ones_like(truth)
        c = confusion(ones, truth)
        assert rep.counts == c
        ref = report(c, np.full(truth.shape, 0.5), truth)
        assert rep == ref
    again, _ = evaluate(model, small_corpus, 0.5)
    assert again == aggregate


def test_model_round_trip(tmp_path, small_corpus):
    model, _ = calf_train(small_corpus, TrainConfig(epochs=2, loss=LossKind.BCE))
    path = save_model(model, tmp_path / "model.json")
    again = load_model(path)
    assert np.array_equal(model.weights, again.weights)
    with pytest.raises(DataError):
        load_model({"weights": [0, 0], "feature_version": 1})
    with pytest.raises(DataError):
        load_model({"weights": [0, 0, 0, 0], "feature_version": 2})


def test_ratio_then_train_pipeline(tmp_path):
    corpus = generate(
        SynthSpec(count=80, width=32, height=32, roi_fraction=0.6, regime="arcsine", seed=21),
        tmp_path,
    )
    filtered = apply_ratio(corpus, RatioSpec(0.25, seed=4))
    frac = len(filtered.present) / len(filtered)
    assert abs(frac - 0.25) <= 1.0 / len(filtered)
    model, history = calf_train(filtered, TrainConfig(epochs=5, loss=AUTO, seed=4))
    assert history.selected_loss in LossKind
    assert np.isfinite(model.weights).all()

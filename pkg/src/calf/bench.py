"""Loss-by-ratio benchmark sweep over a corpus.

Each (ratio, loss) cell runs an isolated pipeline: stratified held-out
split, ratio filter on the training side, training, and evaluation on
the untouched test side. Cell seeds are derived by hashing
(seed, ratio, loss) with SHA-256 so cells are independent yet fully
reproducible. Metric ordering between losses is reported, never
asserted.
"""

from __future__ import annotations

import hashlib

from .data import Corpus, RatioSpec, apply_ratio, split
from .errors import CalfError
from .losses import LossConfig, LossKind, parse_kind
from .trainer import AUTO, TrainConfig, calf_train, evaluate

__all__ = ["BENCH_LOSSES", "display_name", "derive_seed", "run_bench"]

# Table schema order for reports: the adaptive family is listed last.
BENCH_LOSSES = ["bce", "dice", "tversky", "iou", "focal", "bce_dice", "calf"]

_DISPLAY = {
    "bce": "BCE",
    "dice": "Dice",
    "tversky": "Tversky",
    "iou": "IoU",
    "focal": "Focal",
    "bce_dice": "BCE-Dice",
    "calf": "CALF",
    "fisher": "CALF/Fisher",
    "logit": "CALF/Logit",
    "arcsine": "CALF/Arcsine",
    "log10": "CALF/Log10",
    "natural_log": "CALF/NaturalLog",
}


def display_name(loss: str) -> str:
    return _DISPLAY.get(loss, loss)


def derive_seed(seed: int, ratio: float, loss: str) -> int:
    """Stable 63-bit cell seed from the sweep seed and cell coordinates."""
    digest = hashlib.sha256(f"{seed}:{ratio!r}:{loss}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def _resolve(loss: str) -> LossKind | str:
    name = str(loss).strip().lower()
    if name in (AUTO, "calf"):
        return AUTO
    return parse_kind(name)


def run_bench(
    corpus: Corpus,
    ratios,
    losses,
    *,
    seed: int = 42,
    epochs: int = 20,
    learning_rate: float = 10.0,
    batch_size: int = 1,
    test_fraction: float = 0.2,
    threshold: float = 0.5,
    loss_config: LossConfig | None = None,
    include_empty: bool = False,
) -> list[dict]:
    """Run the sweep and return one result row per (ratio, loss) cell."""
    loss_config = loss_config or LossConfig()
    rows = []
    for ratio in ratios:
        for loss in losses:
            loss_name = str(loss).strip().lower()
            cell_seed = derive_seed(seed, float(ratio), loss_name)
            row = {"loss": loss_name, "display": display_name(loss_name), "ratio": float(ratio)}
            try:
                kind = _resolve(loss_name)
                train_part, test_part = split(corpus, test_fraction, cell_seed)
                train_part = apply_ratio(train_part, RatioSpec(ratio=float(ratio), seed=cell_seed))
                cfg = TrainConfig(
                    epochs=epochs,
                    learning_rate=learning_rate,
                    batch_size=batch_size,
                    loss=kind,
                    seed=cell_seed,
                    loss_config=loss_config,
                    threshold=threshold,
                    include_empty=include_empty,
                )
                model, history = calf_train(train_part, cfg)
                aggregate, _ = evaluate(model, test_part, threshold)
            except CalfError as exc:
                row["skipped"] = str(exc)
                rows.append(row)
                continue
            row.update(
                {
                    "selected_loss": history.selected_loss.value,
                    "n_train": len(train_part),
                    "n_test": len(test_part),
                    "accuracy": aggregate.accuracy,
                    "dsc": aggregate.dsc,
                    "specificity": aggregate.specificity,
                    "sensitivity": aggregate.sensitivity,
                    "precision": aggregate.precision,
                    "mae": aggregate.mae,
                }
            )
            rows.append(row)
    return rows

"""Corpus ingestion, ratio-controlled filtering, and splitting.

A corpus is a JSONL manifest of image/mask PNG pairs. Manifest records
look like ``{"id": "...", "image": "images/x.png", "mask": "masks/x.png"}``
with paths relative to the manifest's directory. Images are 8-bit
grayscale; masks are binarized on read (any nonzero pixel counts as
foreground).

The ratio filter reshapes a corpus so a target fraction ``r`` of its
samples are ROI-present, by seed-deterministic subsampling of whichever
class is in surplus. Sampling uses numpy's PCG64 generator (seeded from
the RatioSpec) over candidates pre-sorted by id, so membership is
reproducible across platforms and runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image

from .errors import DataError

__all__ = [
    "SampleRecord",
    "Corpus",
    "RatioSpec",
    "ingest",
    "load_image",
    "load_mask",
    "apply_ratio",
    "split",
    "write_corpus",
    "write_manifest",
]


@dataclass(frozen=True)
class SampleRecord:
    id: str
    image_path: Path
    mask_path: Path
    roi_present: bool
    foreground_area: int


@dataclass(frozen=True)
class Corpus:
    samples: tuple[SampleRecord, ...]
    width: int
    height: int

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def present(self) -> tuple[SampleRecord, ...]:
        return tuple(s for s in self.samples if s.roi_present)

    @property
    def absent(self) -> tuple[SampleRecord, ...]:
        return tuple(s for s in self.samples if not s.roi_present)

    def subset(self, ids) -> "Corpus":
        keep = set(ids)
        return replace(self, samples=tuple(s for s in self.samples if s.id in keep))


@dataclass(frozen=True)
class RatioSpec:
    """Target fraction of ROI-present samples plus the sampling seed."""

    ratio: float
    seed: int

    def validate(self) -> "RatioSpec":
        if not (0.0 <= self.ratio <= 1.0):
            raise ValueError("ratio must lie in [0, 1]")
        return self


def _read_grayscale(path: Path, sample_id: str, role: str) -> np.ndarray:
    if not path.exists():
        raise DataError(f"sample {sample_id!r}: missing {role} file {path}")
    with Image.open(path) as img:
        if img.mode != "L":
            raise DataError(
                f"sample {sample_id!r}: {role} {path.name} is not 8-bit grayscale (mode {img.mode})"
            )
        return np.asarray(img, dtype=np.uint8)


def ingest(manifest_path: str | Path) -> Corpus:
    """Read a manifest and build a corpus with per-sample foreground areas."""
    manifest_path = Path(manifest_path)
    if not manifest_path.exists():
        raise DataError(f"manifest not found: {manifest_path}")
    base = manifest_path.parent

    samples: list[SampleRecord] = []
    seen: set[str] = set()
    width = height = 0
    with manifest_path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"manifest line {lineno}: invalid JSON ({exc})") from None
            try:
                sample_id = str(rec["id"])
                image_rel, mask_rel = rec["image"], rec["mask"]
            except (KeyError, TypeError):
                raise DataError(f"manifest line {lineno}: need id/image/mask fields") from None
            if sample_id in seen:
                raise DataError(f"duplicate sample id {sample_id!r}")
            seen.add(sample_id)

            image_path = (base / image_rel).resolve()
            mask_path = (base / mask_rel).resolve()
            image = _read_grayscale(image_path, sample_id, "image")
            mask = _read_grayscale(mask_path, sample_id, "mask")
            if image.shape != mask.shape:
                raise DataError(
                    f"sample {sample_id!r}: image {image.shape} and mask {mask.shape} differ"
                )
            h, w = image.shape
            if not samples:
                width, height = w, h
            elif (w, h) != (width, height):
                raise DataError(
                    f"sample {sample_id!r}: size {w}x{h} differs from corpus {width}x{height}"
                )
            area = int(np.count_nonzero(mask))
            samples.append(
                SampleRecord(
                    id=sample_id,
                    image_path=image_path,
                    mask_path=mask_path,
                    roi_present=area > 0,
                    foreground_area=area,
                )
            )
    return Corpus(samples=tuple(samples), width=width, height=height)


def load_image(sample: SampleRecord) -> np.ndarray:
    """8-bit grayscale image pixels of a sample."""
    return _read_grayscale(sample.image_path, sample.id, "image")


def load_mask(sample: SampleRecord) -> np.ndarray:
    """Binary {0,1} mask of a sample (nonzero pixels are foreground)."""
    raw = _read_grayscale(sample.mask_path, sample.id, "mask")
    return (raw != 0).astype(np.uint8)


def _pick(candidates: Sequence[SampleRecord], k: int, rng: np.random.Generator) -> set[str]:
    ordered = sorted(candidates, key=lambda s: s.id)
    idx = rng.permutation(len(ordered))[:k]
    return {ordered[i].id for i in idx}


def apply_ratio(corpus: Corpus, spec: RatioSpec) -> Corpus:
    """Filter a corpus toward a target ROI-present fraction.

    Keeps the surplus class' samples by seed-deterministic subsampling
    and never fabricates records. A corpus already within 1/len of the
    target is returned unchanged, which also makes the operation
    idempotent.
    """
    spec = spec.validate()
    if len(corpus) == 0:
        raise DataError("cannot apply ratio to an empty corpus")
    r = spec.ratio
    present, absent = corpus.present, corpus.absent
    n_p, n_a = len(present), len(absent)

    if r == 1.0:
        if n_p == 0:
            raise DataError("cannot achieve ratio: corpus has no ROI-present samples")
        return corpus.subset(s.id for s in present)
    if r == 0.0:
        if n_a == 0:
            raise DataError("cannot achieve ratio: corpus has no ROI-absent samples")
        return corpus.subset(s.id for s in absent)
    if n_p == 0 or n_a == 0:
        raise DataError("cannot achieve ratio: corpus lacks both sample classes")

    if abs(n_p / len(corpus) - r) <= 1.0 / len(corpus):
        return corpus

    rng = np.random.default_rng(spec.seed)
    keep_absent = round(n_p * (1.0 - r) / r)
    if keep_absent <= n_a:
        chosen = _pick(absent, keep_absent, rng)
        chosen.update(s.id for s in present)
    else:
        keep_present = round(n_a * r / (1.0 - r))
        chosen = _pick(present, keep_present, rng)
        chosen.update(s.id for s in absent)
    return corpus.subset(chosen)


def split(corpus: Corpus, test_fraction: float, seed: int) -> tuple[Corpus, Corpus]:
    """Seed-deterministic, class-stratified train/test split."""
    if not (0.0 < test_fraction < 1.0):
        raise ValueError("test_fraction must lie in (0, 1)")
    if len(corpus) == 0:
        raise DataError("cannot split an empty corpus")
    rng = np.random.default_rng(seed)
    test_ids: set[str] = set()
    for group in (corpus.present, corpus.absent):
        if not group:
            continue
        k = round(len(group) * test_fraction)
        test_ids.update(_pick(group, k, rng))
    train_ids = {s.id for s in corpus.samples} - test_ids
    return corpus.subset(train_ids), corpus.subset(test_ids)


def write_corpus(
    out_dir: str | Path,
    items: Sequence[tuple[str, np.ndarray, np.ndarray]],
) -> Path:
    """Write (id, image, mask) triples as a PNG corpus; returns the manifest path.

    Masks are stored with foreground at 255 so they are viewable; ingest
    re-binarizes on read.
    """
    out_dir = Path(out_dir)
    (out_dir / "images").mkdir(parents=True, exist_ok=True)
    (out_dir / "masks").mkdir(parents=True, exist_ok=True)
    manifest = out_dir / "manifest.jsonl"
    with manifest.open("w") as fh:
        for sample_id, image, mask in items:
            image = np.asarray(image, dtype=np.uint8)
            mask01 = (np.asarray(mask) != 0).astype(np.uint8)
            image_rel = f"images/{sample_id}.png"
            mask_rel = f"masks/{sample_id}.png"
            Image.fromarray(image, mode="L").save(out_dir / image_rel)
            Image.fromarray(mask01 * 255, mode="L").save(out_dir / mask_rel)
            fh.write(json.dumps({"id": sample_id, "image": image_rel, "mask": mask_rel}) + "\n")
    return manifest


def write_manifest(corpus: Corpus, manifest_path: str | Path) -> Path:
    """Write a manifest for an existing corpus (e.g. a filtered subset).

    Image files are not copied; the manifest references them relative to
    its own directory.
    """
    manifest_path = Path(manifest_path)
    manifest_path.parent.mkdir(parents=True, exist_ok=True)
    base = manifest_path.parent.resolve()
    with manifest_path.open("w") as fh:
        for s in corpus.samples:
            rec = {
                "id": s.id,
                "image": str(Path(s.image_path).resolve().relative_to(base))
                if _is_under(s.image_path, base)
                else str(Path(s.image_path).resolve()),
                "mask": str(Path(s.mask_path).resolve().relative_to(base))
                if _is_under(s.mask_path, base)
                else str(Path(s.mask_path).resolve()),
            }
            fh.write(json.dumps(rec) + "\n")
    return manifest_path


def _is_under(path: Path, base: Path) -> bool:
    try:
        Path(path).resolve().relative_to(base)
        return True
    except ValueError:
        return False

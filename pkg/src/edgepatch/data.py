"""Dataset ingestion, canonical pixel domains, and adversarial test-set selection.

On-disk layout::

    root/classes.csv                          # columns: class_id,name
    root/<split>/images/<class_id>/<name>.png
    root/<split>/masks/<class_id>/<name>.png  # 8-bit gray, 0=background, 255=sign

Images are canonicalized to channel-major 3x128x128 float arrays in [0, 1];
masks to 1x128x128 binary arrays. The generator-internal domain is [-1, 1];
``to_internal``/``to_unit`` are the only conversion boundary.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np
import torch
from PIL import Image

RESOLUTION = 128
_DOMAIN_TOL = 1e-9


class DataError(ValueError):
    """Raised for ingestion failures and domain violations."""


class Split(str, Enum):
    train = "train"
    val = "val"
    adv_test = "adv_test"


@dataclass(frozen=True)
class ImageRecord:
    id: str
    image: np.ndarray  # 3x128x128 float in [0,1]
    label: int
    seg_mask: np.ndarray  # 1x128x128 uint8 in {0,1}
    source_path: str


@dataclass(frozen=True)
class DatasetIndex:
    records: tuple
    class_names: tuple
    split: Split

    def __len__(self) -> int:
        return len(self.records)


def _read_classes(root: Path) -> tuple:
    path = root / "classes.csv"
    if not path.is_file():
        raise DataError(f"missing class table: {path}")
    rows = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            rows[int(row["class_id"])] = row["name"]
    if not rows:
        raise DataError(f"empty class table: {path}")
    n = max(rows) + 1
    return tuple(rows.get(i, f"class_{i}") for i in range(n))


def _load_image(path: Path, dtype) -> np.ndarray:
    try:
        with Image.open(path) as im:
            im = im.convert("RGB").resize((RESOLUTION, RESOLUTION), Image.BILINEAR)
            arr = np.asarray(im, dtype=dtype) / 255.0
    except DataError:
        raise
    except Exception as exc:  # unreadable file is fatal per contract
        raise DataError(f"unreadable image: {path}: {exc}") from exc
    return np.ascontiguousarray(arr.transpose(2, 0, 1))


def _load_mask(path: Path) -> np.ndarray:
    try:
        with Image.open(path) as im:
            im = im.convert("L").resize((RESOLUTION, RESOLUTION), Image.NEAREST)
            arr = np.asarray(im)
    except Exception as exc:
        raise DataError(f"unreadable mask: {path}: {exc}") from exc
    return (arr > 127.5).astype(np.uint8)[np.newaxis]


def load_dataset(root, split, dtype=np.float32) -> DatasetIndex:
    """Load one split; record order is lexicographic by relative path."""
    root = Path(root)
    split = Split(split)
    class_names = _read_classes(root)
    images_dir = root / split.value / "images"
    masks_dir = root / split.value / "masks"
    if not images_dir.is_dir():
        raise DataError(f"missing split directory: {images_dir}")

    records = []
    for class_dir in sorted(images_dir.iterdir()):
        if not class_dir.is_dir():
            continue
        try:
            label = int(class_dir.name)
        except ValueError as exc:
            raise DataError(f"non-numeric class directory: {class_dir}") from exc
        if label >= len(class_names):
            raise DataError(f"class directory {class_dir} not present in classes.csv")
        paths = sorted(class_dir.glob("*.png"))
        if not paths:
            warnings.warn(f"empty class directory skipped: {class_dir}", stacklevel=2)
            continue
        for img_path in paths:
            mask_path = masks_dir / class_dir.name / img_path.name
            if not mask_path.is_file():
                raise DataError(f"missing mask file for image: {mask_path}")
            records.append(
                ImageRecord(
                    id=f"{class_dir.name}/{img_path.stem}",
                    image=_load_image(img_path, dtype),
                    label=label,
                    seg_mask=_load_mask(mask_path),
                    source_path=str(img_path),
                )
            )
    records.sort(key=lambda r: r.source_path)
    return DatasetIndex(records=tuple(records), class_names=class_names, split=split)


def build_adv_testset(index: DatasetIndex, classifiers: Sequence, k: int) -> DatasetIndex:
    """Select the first k records per class correctly classified by ALL classifiers.

    Classes with fewer than k eligible records are excluded entirely.
    """
    if k < 1:
        raise DataError(f"k must be >= 1, got {k}")
    if not classifiers:
        raise DataError("classifiers must be non-empty")
    if not index.records:
        raise DataError("empty source index")

    images = np.stack([r.image for r in index.records])
    labels = np.array([r.label for r in index.records])
    eligible = np.ones(len(index.records), dtype=bool)
    for clf in classifiers:
        eligible &= np.asarray(clf.predict_labels(images)) == labels

    kept_per_class = {}
    for i, record in enumerate(index.records):
        if eligible[i]:
            kept_per_class.setdefault(record.label, []).append(record)

    selected = []
    for label in sorted(kept_per_class):
        recs = kept_per_class[label]
        if len(recs) >= k:
            selected.extend(recs[:k])
    if not selected:
        raise DataError("empty adversarial test set: no class reached k eligible records")
    return DatasetIndex(
        records=tuple(selected), class_names=index.class_names, split=Split.adv_test
    )


def _bounds(x) -> tuple:
    if isinstance(x, torch.Tensor):
        if not bool(torch.isfinite(x).all()):
            raise DataError("non-finite values")
        return float(x.min()), float(x.max())
    arr = np.asarray(x)
    if not np.isfinite(arr).all():
        raise DataError("non-finite values")
    return float(arr.min()), float(arr.max())


def to_internal(image):
    """Map [0,1] pixel values to the generator-internal [-1,1] domain."""
    lo, hi = _bounds(image)
    if lo < -_DOMAIN_TOL or hi > 1.0 + _DOMAIN_TOL:
        raise DataError(f"to_internal input outside [0,1]: range [{lo}, {hi}]")
    return 2.0 * image - 1.0


def to_unit(image):
    """Map [-1,1] internal values back to the [0,1] pixel domain."""
    lo, hi = _bounds(image)
    if lo < -1.0 - _DOMAIN_TOL or hi > 1.0 + _DOMAIN_TOL:
        raise DataError(f"to_unit input outside [-1,1]: range [{lo}, {hi}]")
    return (image + 1.0) / 2.0

"""Labelled dataset container and the CSV exchange format.

CSV layout: header ``y,x1,...,xp``, label column first, one observation per
line, UTF-8 with LF endings, floats written with 17 significant digits so a
write/read cycle is exact.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DataError, InvalidArgumentError


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class Dataset:
    """``n x p`` feature matrix with integer labels in ``0..g-1``.

    ``class_names`` keeps the original label text when the data came from a
    file with non-integer or non-contiguous labels.
    """

    features: NDArray[np.float64]
    labels: NDArray[np.intp]
    class_names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        X = np.array(self.features, dtype=float)
        y = np.asarray(self.labels)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2 or X.shape[1] == 0:
            raise InvalidArgumentError("features must be a non-empty 2-d matrix")
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise InvalidArgumentError("labels must be a vector with one entry per row")
        if not np.all(np.isfinite(X)):
            raise InvalidArgumentError("features contain non-finite values")
        if y.size and not np.all(np.equal(np.mod(y, 1), 0)):
            raise InvalidArgumentError("labels must be integers")
        y = y.astype(np.intp)
        g = int(y.max()) + 1 if y.size else 0
        if y.size and y.min() < 0:
            raise InvalidArgumentError("labels must be non-negative")
        if g < 2:
            raise InvalidArgumentError("need at least two classes")
        if np.any(np.bincount(y, minlength=g) == 0):
            raise InvalidArgumentError("every class id in 0..g-1 must occur at least once")
        if self.class_names is not None and len(self.class_names) != g:
            raise InvalidArgumentError("class_names must have one entry per class")
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]

    @property
    def g(self) -> int:
        return int(self.labels.max()) + 1

    def class_sizes(self) -> NDArray[np.intp]:
        return np.bincount(self.labels, minlength=self.g)

    def subset(self, rows: ArrayLike) -> "Dataset":
        rows = np.asarray(rows)
        return Dataset(self.features[rows], self.labels[rows], self.class_names)

    def with_features(self, features: ArrayLike) -> "Dataset":
        return Dataset(features, self.labels, self.class_names)


def _label_text(ds: Dataset, k: int) -> str:
    return ds.class_names[k] if ds.class_names is not None else str(k)


def write_csv(ds: Dataset, path: str | Path | None = None) -> str:
    """Serialise ``ds``; writes to ``path`` when given and returns the text."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["y"] + [f"x{j + 1}" for j in range(ds.p)])
    for label, row in zip(ds.labels, ds.features):
        w.writerow([_label_text(ds, int(label))] + [fmt_float(v) for v in row])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8", newline="\n")
    return text


def _parse_labels(raw: Sequence[str]) -> tuple[NDArray[np.intp], tuple[str, ...] | None]:
    ints = []
    for s in raw:
        try:
            v = float(s)
        except ValueError:
            ints = None
            break
        if not math.isfinite(v) or v != int(v):
            ints = None
            break
        ints.append(int(v))
    if ints is not None:
        uniq = sorted(set(ints))
        if uniq == list(range(len(uniq))):
            return np.asarray(ints, dtype=np.intp), None
        lookup = {v: k for k, v in enumerate(uniq)}
        return np.asarray([lookup[v] for v in ints], dtype=np.intp), tuple(str(v) for v in uniq)
    uniq_s = sorted(set(raw))
    lookup_s = {v: k for k, v in enumerate(uniq_s)}
    return np.asarray([lookup_s[v] for v in raw], dtype=np.intp), tuple(uniq_s)


def parse_csv(text: str, source: str = "<string>") -> Dataset:
    """Parse the CSV format; errors carry the offending line number."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise DataError(f"{source}: empty file") from None
    if len(header) < 2:
        raise DataError(f"{source}:1: header needs a label column and at least one feature")
    p = len(header) - 1
    labels: list[str] = []
    rows: list[list[float]] = []
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != p + 1:
            raise DataError(f"{source}:{line}: expected {p + 1} fields, got {len(row)}")
        try:
            vals = [float(c) for c in row[1:]]
        except ValueError as exc:
            raise DataError(f"{source}:{line}: {exc}") from None
        if not all(math.isfinite(v) for v in vals):
            raise DataError(f"{source}:{line}: non-finite feature value")
        labels.append(row[0].strip())
        rows.append(vals)
    if not rows:
        raise DataError(f"{source}: no data rows")
    y, names = _parse_labels(labels)
    try:
        return Dataset(np.asarray(rows), y, names)
    except InvalidArgumentError as exc:
        raise DataError(f"{source}: {exc}") from None


def read_csv(path: str | Path) -> Dataset:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None
    return parse_csv(text, str(path))

"""Column scaling estimated on training data."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from .core import empirical_quantile
from .dataset import Dataset
from .errors import InvalidArgumentError

KINDS = ("none", "pooled_within_var", "range", "iqr", "group_map")
_ALIASES = {"pooled": "pooled_within_var", "groups": "group_map"}


@dataclass(frozen=True)
class StandardizationMode:
    kind: str = "none"
    groups: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        kind = _ALIASES.get(self.kind, self.kind)
        if kind not in KINDS:
            raise InvalidArgumentError(f"unknown standardization {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if kind == "group_map":
            if not self.groups:
                raise InvalidArgumentError("group_map needs a non-empty group assignment")
            object.__setattr__(self, "groups", tuple(str(g) for g in self.groups))

    @classmethod
    def parse(cls, text: str) -> "StandardizationMode":
        """Parse ``none|pooled|range|iqr|groups:<file>``.

        The groups file lists one group id per variable, separated by commas
        or whitespace.
        """
        t = text.strip()
        if t.lower().startswith("groups:"):
            path = Path(t.split(":", 1)[1])
            try:
                raw = path.read_text(encoding="utf-8")
            except OSError as exc:
                raise InvalidArgumentError(f"cannot read groups file {path}: {exc.strerror}") from None
            ids = [s for s in raw.replace(",", " ").split() if s]
            return cls("group_map", tuple(ids))
        return cls(t.lower())

    def __str__(self) -> str:
        if self.kind == "group_map":
            return "groups:" + ",".join(self.groups or ())
        return {"pooled_within_var": "pooled"}.get(self.kind, self.kind)


def _pooled_within_sd(data: Dataset) -> NDArray[np.float64]:
    # class-size weighted average of the (n_k - 1)-divisor class variances
    acc = np.zeros(data.p)
    for k in range(data.g):
        Xk = data.features[data.labels == k]
        if Xk.shape[0] > 1:
            acc += Xk.shape[0] * Xk.var(axis=0, ddof=1)
    return np.sqrt(acc / data.n)


def _group_sd(data: Dataset, groups: tuple[str, ...]) -> NDArray[np.float64]:
    if len(groups) != data.p:
        raise InvalidArgumentError(f"group assignment has {len(groups)} entries, data has {data.p} columns")
    out = np.empty(data.p)
    ga = np.asarray(groups)
    for gid in dict.fromkeys(groups):
        cols = ga == gid
        vals = data.features[:, cols].ravel()
        out[cols] = vals.std(ddof=1) if vals.size > 1 else 0.0
    return out


def compute_scales(train: Dataset, mode: StandardizationMode) -> NDArray[np.float64]:
    """Positive per-column scales; unusable (zero) scales are replaced by 1."""
    X = train.features
    if mode.kind == "none":
        return np.ones(train.p)
    if mode.kind == "pooled_within_var":
        s = _pooled_within_sd(train)
    elif mode.kind == "range":
        s = X.max(axis=0) - X.min(axis=0)
    elif mode.kind == "iqr":
        s = np.array(
            [empirical_quantile(X[:, j], 0.75) - empirical_quantile(X[:, j], 0.25) for j in range(train.p)]
        )
    else:
        s = _group_sd(train, mode.groups or ())
    bad = ~(np.isfinite(s) & (s > 0.0))
    if np.any(bad):
        warnings.warn(
            f"{int(bad.sum())} column(s) have zero {mode.kind} scale; using 1",
            RuntimeWarning,
            stacklevel=2,
        )
        s = np.where(bad, 1.0, s)
    return s


def standardize(
    train: Dataset, test: Dataset | None, mode: StandardizationMode
) -> tuple[Dataset, Dataset | None, NDArray[np.float64]]:
    """Scale both sets by scales estimated from ``train`` only."""
    scales = compute_scales(train, mode)
    tr = train.with_features(train.features / scales)
    te = None
    if test is not None:
        if test.p != train.p:
            raise InvalidArgumentError("train and test differ in number of columns")
        te = test.with_features(test.features / scales)
    return tr, te, scales

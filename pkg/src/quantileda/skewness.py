"""Skewness measures and sign unification of variables.

Variables whose class-averaged skewness is negative are negated so that all
variables lean the same way before a single quantile level is chosen.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .core import SampleLike, as_sorted, midpoint_quantile
from .dataset import Dataset
from .errors import DegenerateSampleError, InvalidArgumentError

log = logging.getLogger(__name__)

GALTON_U = 0.75


@dataclass(frozen=True)
class SkewnessMode:
    kind: str = "none"  # none | moment | quantile
    u: float = GALTON_U

    def __post_init__(self) -> None:
        if self.kind not in ("none", "moment", "quantile"):
            raise InvalidArgumentError(f"unknown skewness mode {self.kind!r}")
        if self.kind == "quantile" and not 0.5 < self.u <= 1.0:
            raise InvalidArgumentError(f"quantile skewness needs 0.5 < u <= 1, got {self.u}")

    @classmethod
    def parse(cls, text: str) -> "SkewnessMode":
        """Parse ``none``, ``moment``, ``galton`` or ``quantile:<u>``."""
        t = text.strip().lower()
        if t in ("none", "moment"):
            return cls(t)
        if t == "galton":
            return cls("quantile", GALTON_U)
        if t.startswith("quantile:"):
            try:
                u = float(t.split(":", 1)[1])
            except ValueError:
                raise InvalidArgumentError(f"bad skewness level in {text!r}") from None
            return cls("quantile", u)
        raise InvalidArgumentError(f"unknown skewness mode {text!r}")

    def __str__(self) -> str:
        if self.kind == "quantile":
            return "galton" if self.u == GALTON_U else f"quantile:{self.u!r}"
        return self.kind


def standardized_third_moment(sample: SampleLike) -> float:
    """``m3 / s**3`` with divisor n for both central moments."""
    x = as_sorted(sample).values
    if x.size < 2:
        raise InvalidArgumentError("need at least two observations")
    # correctly rounded sums do not depend on order, so negating the sample
    # negates the result exactly
    n = x.size
    d = x - math.fsum(x) / n
    m2 = math.fsum(d * d) / n
    if m2 <= 0.0:
        raise DegenerateSampleError("zero variance")
    m3 = math.fsum(d * d * d) / n
    return m3 / m2**1.5


def quantile_skewness(sample: SampleLike, u: float = GALTON_U) -> float:
    """Hinkley's quantile skewness; ``u = 0.75`` gives Galton's measure.

    Returns 0.0 when the upper and lower quantiles coincide.
    """
    if not 0.5 < u <= 1.0:
        raise InvalidArgumentError(f"u must lie in (0.5, 1], got {u}")
    s = as_sorted(sample)
    hi = midpoint_quantile(s, u)
    lo = midpoint_quantile(s, 1.0 - u)
    med = midpoint_quantile(s, 0.5)
    den = hi - lo
    if den <= 0.0:
        log.debug("degenerate quantile skewness (zero spread)")
        return 0.0
    return float(np.clip((hi + lo - 2.0 * med) / den, -1.0, 1.0))


def _measure(values: NDArray[np.float64], mode: SkewnessMode) -> float:
    if mode.kind == "moment":
        try:
            return standardized_third_moment(values)
        except DegenerateSampleError:
            return 0.0
    return quantile_skewness(values, mode.u)


def class_averaged_skewness(data: Dataset, mode: SkewnessMode) -> NDArray[np.float64]:
    """Per-variable skewness, computed within each class then averaged with equal weights."""
    if mode.kind == "none":
        return np.zeros(data.p)
    if np.any(data.class_sizes() < 2):
        raise InvalidArgumentError("every class needs at least two observations")
    out = np.zeros(data.p)
    for k in range(data.g):
        Xk = data.features[data.labels == k]
        out += np.array([_measure(Xk[:, j], mode) for j in range(data.p)])
    return out / data.g


def compute_sign_flips(data: Dataset, mode: SkewnessMode) -> NDArray[np.float64]:
    """+1/-1 per variable; -1 where the class-averaged skewness is negative."""
    if mode.kind == "none":
        return np.ones(data.p)
    sk = class_averaged_skewness(data, mode)
    return np.where(sk < 0.0, -1.0, 1.0)


def apply_sign_flips(data: Dataset, flips: ArrayLike) -> Dataset:
    f = np.asarray(flips, dtype=float)
    if f.shape != (data.p,):
        raise InvalidArgumentError(f"expected {data.p} flips, got shape {f.shape}")
    if not np.all(np.abs(f) == 1.0):
        raise InvalidArgumentError("flips must be +1 or -1")
    return data.with_features(data.features * f)

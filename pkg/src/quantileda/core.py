"""Quantile loss, empirical quantiles and component-wise quantile distances.

The empirical quantile is the left-continuous inverse of the empirical CDF,
``inf{x : F_n(x) >= theta}``, i.e. the order statistic ``x_(ceil(n*theta))``.
No interpolation is done, so the returned value is always a sample point and
minimises the empirical asymmetric L1 loss exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import InvalidArgumentError

# n*theta is rounded to this many decimals before taking the ceiling, so that
# decimal grid levels such as 0.3 are not pushed to the next order statistic by
# binary representation error.
_RANK_DECIMALS = 9


def check_level(theta: float, *, open_interval: bool = False) -> float:
    """Validate a quantile level and return it as a float."""
    theta = float(theta)
    if not math.isfinite(theta) or not 0.0 <= theta <= 1.0:
        raise InvalidArgumentError(f"quantile level must lie in [0, 1], got {theta!r}")
    if open_interval and theta in (0.0, 1.0):
        raise InvalidArgumentError(f"quantile level must lie in (0, 1), got {theta!r}")
    return theta


def _finite(x: float, name: str) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise InvalidArgumentError(f"{name} must be finite, got {x!r}")
    return x


@dataclass(frozen=True)
class SortedSample:
    """An ascending, NaN-free, non-empty 1-d sample."""

    values: NDArray[np.float64]

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise InvalidArgumentError("sample must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(v)):
            raise InvalidArgumentError("sample contains non-finite values")
        if np.any(np.diff(v) < 0):
            raise InvalidArgumentError("sample values are not in ascending order")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def from_values(cls, values: ArrayLike) -> "SortedSample":
        v = np.asarray(values, dtype=float).ravel()
        if v.size and not np.all(np.isfinite(v)):
            raise InvalidArgumentError("sample contains non-finite values")
        return cls(np.sort(v))

    def __len__(self) -> int:
        return self.values.size


SampleLike = Union[SortedSample, ArrayLike]


def as_sorted(sample: SampleLike) -> SortedSample:
    if isinstance(sample, SortedSample):
        return sample
    return SortedSample.from_values(sample)


def order_index(n: int, theta: float) -> int:
    """0-based index of the order statistic that is the empirical theta-quantile."""
    if n < 1:
        raise InvalidArgumentError("sample must be non-empty")
    k = math.ceil(round(n * theta, _RANK_DECIMALS))
    return min(max(k, 1), n) - 1


def order_indices(n: int, thetas: ArrayLike) -> NDArray[np.intp]:
    """Vectorised :func:`order_index` over many levels."""
    k = np.ceil(np.round(n * np.asarray(thetas, dtype=float), _RANK_DECIMALS))
    return (np.clip(k, 1, n) - 1).astype(np.intp)


def empirical_quantile(sample: SampleLike, theta: float) -> float:
    """Left-continuous inverse of the empirical CDF at ``theta``.

    >>> empirical_quantile([1, 2, 3, 4], 0.25)
    1.0
    """
    s = as_sorted(sample)
    theta = check_level(theta)
    return float(s.values[order_index(len(s), theta)])


def midpoint_quantile(sample: SampleLike, theta: float) -> float:
    """Average of the left- and right-continuous empirical inverses.

    Differs from :func:`empirical_quantile` only when ``n*theta`` is an
    integer. It satisfies ``Q_{-S}(u) == -Q_S(1-u)`` exactly, which the
    quantile skewness measure relies on.
    """
    s = as_sorted(sample)
    theta = check_level(theta)
    n = len(s)
    nt = round(n * theta, _RANK_DECIMALS)
    lo = order_index(n, theta)
    if nt == math.floor(nt) and 0 < nt < n:
        return 0.5 * (float(s.values[lo]) + float(s.values[lo + 1]))
    return float(s.values[lo])


def quantile_distance(z: float, q: float, theta: float) -> float:
    """Asymmetric L1 distance ``(theta + (1-2 theta) 1[z <= q]) |z - q|``."""
    z = _finite(z, "z")
    q = _finite(q, "q")
    theta = check_level(theta)
    if z <= q:
        return (1.0 - theta) * (q - z)
    return theta * (z - q)


def empirical_quantile_loss(sample: SampleLike, q: float, theta: float) -> float:
    """Summed asymmetric L1 loss of the sample around ``q``."""
    s = as_sorted(sample)
    q = _finite(q, "q")
    theta = check_level(theta)
    x = s.values
    w = np.where(x <= q, 1.0 - theta, theta)
    return float(np.sum(w * np.abs(x - q)))


def distance_matrix(Z: ArrayLike, quantiles: ArrayLike, theta: float) -> NDArray[np.float64]:
    """Class scores for many points at once.

    ``Z`` is ``(n, p)`` and ``quantiles`` is ``(g, p)``; returns the ``(n, g)``
    matrix of summed quantile distances. Every classification path in the
    package goes through here so that scores are computed identically.
    """
    Z = np.asarray(Z, dtype=float)
    Q = np.asarray(quantiles, dtype=float)
    d = Z[:, None, :] - Q[None, :, :]
    w = np.where(d <= 0.0, 1.0 - theta, theta)
    return np.sum(w * np.abs(d), axis=-1)


def class_score(z: ArrayLike, quantiles: ArrayLike, theta: float) -> float:
    """Sum over coordinates of :func:`quantile_distance`."""
    z = np.asarray(z, dtype=float).ravel()
    q = np.asarray(quantiles, dtype=float).ravel()
    if z.shape != q.shape or z.size == 0:
        raise InvalidArgumentError(
            f"z and quantiles must have equal non-zero length, got {z.size} and {q.size}"
        )
    if not (np.all(np.isfinite(z)) and np.all(np.isfinite(q))):
        raise InvalidArgumentError("non-finite input")
    theta = check_level(theta)
    return float(distance_matrix(z[None, :], q[None, :], theta)[0, 0])

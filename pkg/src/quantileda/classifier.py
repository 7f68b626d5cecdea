"""Empirically optimal quantile classifier, baselines and cross-validation."""

from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .core import check_level, distance_matrix, empirical_quantile, order_indices
from .dataset import Dataset
from .errors import ConfigError, InvalidArgumentError
from .scaling import StandardizationMode, compute_scales
from .skewness import SkewnessMode, apply_sign_flips, compute_sign_flips

log = logging.getLogger(__name__)

DEFAULT_TAU = 0.02
DEFAULT_GRID = 49


@dataclass(frozen=True)
class FitConfig:
    tau: float = DEFAULT_TAU
    grid_size: int = DEFAULT_GRID
    skew_mode: SkewnessMode = field(default_factory=SkewnessMode)
    standardization: StandardizationMode = field(default_factory=StandardizationMode)

    def __post_init__(self) -> None:
        if not (0.0 < self.tau < 0.5):
            raise ConfigError(f"tau must lie in (0, 0.5), got {self.tau}")
        if int(self.grid_size) != self.grid_size or self.grid_size < 2:
            raise ConfigError(f"grid size must be an integer >= 2, got {self.grid_size}")

    @property
    def grid(self) -> NDArray[np.float64]:
        return np.linspace(self.tau, 1.0 - self.tau, int(self.grid_size))


@dataclass(frozen=True)
class AccuracyCurve:
    """In-sample correct classification rate for each grid level."""

    thetas: NDArray[np.float64]
    psi_n: NDArray[np.float64]

    def __post_init__(self) -> None:
        t = np.asarray(self.thetas, dtype=float)
        s = np.asarray(self.psi_n, dtype=float)
        if t.shape != s.shape or t.ndim != 1 or t.size == 0:
            raise InvalidArgumentError("curve needs equal-length non-empty vectors")
        object.__setattr__(self, "thetas", t)
        object.__setattr__(self, "psi_n", s)

    def __len__(self) -> int:
        return self.thetas.size


def decide(scores: NDArray[np.float64]) -> NDArray[np.intp]:
    # two classes: class 0 only on a strict win, ties go to class 1
    if scores.shape[1] == 2:
        return np.where(scores[:, 1] - scores[:, 0] > 0.0, 0, 1).astype(np.intp)
    return np.argmin(scores, axis=1).astype(np.intp)


def _as_matrix(z: ArrayLike, p: int) -> tuple[NDArray[np.float64], bool]:
    Z = np.asarray(z, dtype=float)
    single = Z.ndim == 1
    if single:
        Z = Z[None, :]
    if Z.ndim != 2 or Z.shape[1] != p:
        raise InvalidArgumentError(f"expected points of dimension {p}, got shape {np.shape(z)}")
    if not np.all(np.isfinite(Z)):
        raise InvalidArgumentError("non-finite input")
    return Z, single


def _unwrap(pred: NDArray[np.intp], single: bool) -> Union[int, NDArray[np.intp]]:
    return int(pred[0]) if single else pred


@dataclass(frozen=True)
class QuantileModel:
    theta_star: float
    quantiles: NDArray[np.float64]  # g x p, in transformed coordinates
    flips: NDArray[np.float64]
    scales: NDArray[np.float64]
    curve: AccuracyCurve
    skew_mode: SkewnessMode = field(default_factory=SkewnessMode)
    standardization: StandardizationMode = field(default_factory=StandardizationMode)
    class_names: tuple[str, ...] | None = None

    @property
    def g(self) -> int:
        return self.quantiles.shape[0]

    @property
    def p(self) -> int:
        return self.quantiles.shape[1]

    def transform(self, Z: ArrayLike) -> NDArray[np.float64]:
        return np.asarray(Z, dtype=float) / self.scales * self.flips

    def scores(self, z: ArrayLike) -> NDArray[np.float64]:
        Z, _ = _as_matrix(z, self.p)
        return distance_matrix(self.transform(Z), self.quantiles, self.theta_star)

    def predict(self, z: ArrayLike) -> Union[int, NDArray[np.intp]]:
        """Class id(s) for raw point(s); a 1-d input returns a single int."""
        Z, single = _as_matrix(z, self.p)
        return _unwrap(decide(distance_matrix(self.transform(Z), self.quantiles, self.theta_star)), single)

    def error_rate(self, data: Dataset) -> float:
        return float(np.mean(self.predict(data.features) != data.labels))


def select_theta(curve: AccuracyCurve, tau: float | None = None) -> float:
    """Grid argmax of the accuracy curve with the quadratic tie-break.

    When several levels share the best rate, a quadratic is least-squares
    fitted to the whole curve and the tied level with the highest fitted value
    wins. If the fit cannot separate the tied levels, the middle one is taken.
    """
    t, s = curve.thetas, curve.psi_n
    best = s.max()
    tied = np.flatnonzero(s == best)
    if tied.size == 1:
        chosen = float(t[tied[0]])
    else:
        if t.size >= 3:
            coef = np.polyfit(t, s, 2)
            fitted = np.polyval(coef, t[tied])
        else:
            fitted = np.zeros(tied.size)
        top = tied[fitted >= fitted.max() - 1e-12]
        chosen = float(t[top[(top.size - 1) // 2]])
    if tau is not None:
        chosen = min(max(chosen, tau), 1.0 - tau)
    return chosen


def _class_sorted(data: Dataset) -> list[NDArray[np.float64]]:
    return [np.sort(data.features[data.labels == k], axis=0) for k in range(data.g)]


def _quantiles_at(sorted_cols: Sequence[NDArray[np.float64]], theta: float) -> NDArray[np.float64]:
    rows = []
    for Xk in sorted_cols:
        idx = order_indices(Xk.shape[0], [theta])[0]
        rows.append(Xk[idx])
    return np.vstack(rows)


def accuracy_curve(data: Dataset, thetas: ArrayLike, workers: int = 1) -> AccuracyCurve:
    """In-sample correct classification rate of the quantile rule at each level.

    Training points are classified with quantiles estimated from the full
    training set (no hold-out). Levels are independent, so ``workers > 1``
    evaluates them concurrently with identical results.
    """
    thetas = np.asarray(thetas, dtype=float)
    sorted_cols = _class_sorted(data)
    X, y = data.features, data.labels

    def one(theta: float) -> float:
        Q = _quantiles_at(sorted_cols, theta)
        return float(np.count_nonzero(decide(distance_matrix(X, Q, theta)) == y)) / data.n

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            psi = list(ex.map(one, thetas))
    else:
        psi = [one(t) for t in thetas]
    return AccuracyCurve(thetas, np.asarray(psi))


def _check_fit_data(data: Dataset, tau: float) -> None:
    sizes = data.class_sizes()
    if np.any(sizes < 2):
        raise InvalidArgumentError("every class needs at least two training observations")
    if tau * sizes.min() < 1.0:
        warnings.warn(
            f"tau * smallest class size = {tau * sizes.min():.3g} < 1; the tau-quantile is the class minimum",
            RuntimeWarning,
            stacklevel=3,
        )


def fit(data: Dataset, config: FitConfig = FitConfig(), *, thetas: ArrayLike | None = None, workers: int = 1) -> QuantileModel:
    """Fit the empirically optimal quantile classifier.

    Pipeline: scale columns, unify skewness signs, evaluate the accuracy curve
    over the grid (or the explicit ``thetas``), select the best level and store
    the class quantiles at that level.
    """
    _check_fit_data(data, config.tau)
    scales = compute_scales(data, config.standardization)
    scaled = data.with_features(data.features / scales)
    flips = compute_sign_flips(scaled, config.skew_mode)
    work = apply_sign_flips(scaled, flips)
    grid = config.grid if thetas is None else np.asarray(thetas, dtype=float)
    for t in grid:
        check_level(t)
    curve = accuracy_curve(work, grid, workers=workers)
    theta_star = select_theta(curve)
    quantiles = _quantiles_at(_class_sorted(work), theta_star)
    return QuantileModel(
        theta_star=theta_star,
        quantiles=quantiles,
        flips=flips,
        scales=scales,
        curve=curve,
        skew_mode=config.skew_mode,
        standardization=config.standardization,
        class_names=data.class_names,
    )


def fit_fixed(data: Dataset, theta: float) -> QuantileModel:
    """Quantile classifier pinned at ``theta`` with no scaling or sign changes."""
    theta = check_level(theta)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return fit(data, FitConfig(tau=min(theta, 1 - theta, 0.49) or 0.01), thetas=[theta])


def _class_centres(train: Dataset, stat) -> NDArray[np.float64]:
    return np.vstack([stat(train.features[train.labels == k]) for k in range(train.g)])


def centroid_classify(train: Dataset, z: ArrayLike) -> Union[int, NDArray[np.intp]]:
    """Nearest class mean in squared Euclidean distance."""
    Z, single = _as_matrix(z, train.p)
    means = _class_centres(train, lambda Xk: Xk.mean(axis=0))
    d = Z[:, None, :] - means[None, :, :]
    return _unwrap(decide(np.sum(d * d, axis=-1)), single)


def class_medians(train: Dataset) -> NDArray[np.float64]:
    return _class_centres(
        train, lambda Xk: np.array([empirical_quantile(Xk[:, j], 0.5) for j in range(Xk.shape[1])])
    )


def median_classify(train: Dataset, z: ArrayLike) -> Union[int, NDArray[np.intp]]:
    """Nearest class component-wise median in L1 distance."""
    Z, single = _as_matrix(z, train.p)
    med = class_medians(train)
    return _unwrap(decide(np.sum(np.abs(Z[:, None, :] - med[None, :, :]), axis=-1)), single)


@dataclass(frozen=True)
class CVResult:
    rate: float
    stderr: float
    thetas: tuple[float, ...]

    @property
    def mean_theta(self) -> float:
        return float(np.mean(self.thetas))


def binomial_stderr(rate: float, n: int) -> float:
    return math.sqrt(rate * (1.0 - rate) / n)


def stratified_folds(labels: ArrayLike, folds: int | str, seed: int = 0) -> list[NDArray[np.intp]]:
    """Held-out index sets; class proportions are preserved in each fold."""
    y = np.asarray(labels)
    n = y.size
    if folds == "loo":
        return [np.array([i]) for i in range(n)]
    k = int(folds)
    if k < 2 or k > n:
        raise ConfigError(f"number of folds must be in [2, {n}], got {folds}")
    rng = np.random.Generator(np.random.Philox(seed))
    assign = np.empty(n, dtype=np.intp)
    offset = 0
    for c in np.unique(y):
        idx = np.flatnonzero(y == c)
        idx = idx[rng.permutation(idx.size)]
        assign[idx] = (offset + np.arange(idx.size)) % k
        offset += idx.size
    return [np.flatnonzero(assign == f) for f in range(k)]


def cross_validate(
    data: Dataset, config: FitConfig = FitConfig(), folds: int | str = "loo", seed: int = 0
) -> CVResult:
    """Cross-validated misclassification rate; the level is re-selected in every fold."""
    wrong = 0
    thetas = []
    for held in stratified_folds(data.labels, folds, seed):
        mask = np.ones(data.n, dtype=bool)
        mask[held] = False
        counts = np.bincount(data.labels[mask], minlength=data.g)
        if np.any(counts < 2):
            raise ConfigError("a training fold has fewer than two observations of some class")
        train = data.subset(np.flatnonzero(mask))
        model = fit(train, config)
        wrong += int(np.count_nonzero(model.predict(data.features[held]) != data.labels[held]))
        thetas.append(model.theta_star)
    rate = wrong / data.n
    return CVResult(rate, binomial_stderr(rate, data.n), tuple(thetas))

"""Simulated two-class benchmark scenarios.

All randomness comes from numpy's Philox counter-based generator keyed by a
``SeedSequence(seed, spawn_key=...)``. Each draw purpose has its own key:

    (0,)  law parameters shared by train and test (Beta shapes)
    (1,)  training set
    (2,)  test set (derived from ``test_seed`` when that is given)

so a dataset is reproducible from the algorithm name and the seed alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .dataset import Dataset
from .errors import InvalidArgumentError
from .scaling import StandardizationMode, compute_scales, standardize

__all__ = [
    "SCENARIOS",
    "ScenarioSpec",
    "StandardizationMode",
    "compute_scales",
    "generate",
    "stream",
    "standardize",
]

SCENARIOS = ("t3_shift", "lognormal_shift", "mixed_blocks", "beta_random")
RHO = 0.2
T3_SHIFT = 0.5
SKEW_SHIFT = 0.2
BETA_RANGE = (0.1, 10.0)
N_BLOCKS = 5


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent Philox stream for ``seed`` and a purpose key."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=tuple(key))))


@dataclass(frozen=True)
class ScenarioSpec:
    scenario: str
    n: int
    p: int
    relevant_fraction: float = 1.0
    dependent: bool = False
    seed: int = 0
    test_seed: int | None = None

    def __post_init__(self) -> None:
        if self.scenario not in SCENARIOS:
            raise InvalidArgumentError(f"unknown scenario {self.scenario!r}; choose from {', '.join(SCENARIOS)}")
        if self.n < 4 or self.n % 2:
            raise InvalidArgumentError(f"n must be an even integer >= 4, got {self.n}")
        if self.p < 1:
            raise InvalidArgumentError("p must be at least 1")
        if not 0.0 < self.relevant_fraction <= 1.0:
            raise InvalidArgumentError("relevant_fraction must lie in (0, 1]")
        if self.scenario == "beta_random" and self.dependent:
            raise InvalidArgumentError("the beta_random scenario has no dependent variant")
        if not 0 <= self.seed < 2**64:
            raise InvalidArgumentError("seed must be a 64-bit unsigned integer")

    @property
    def n_relevant(self) -> int:
        return min(self.p, math.ceil(round(self.p * self.relevant_fraction, 9)))


def _latent(rng: np.random.Generator, m: int, p: int, dependent: bool) -> NDArray[np.float64]:
    """Standard Gaussian columns; equicorrelated through one shared factor if dependent."""
    E = rng.standard_normal((m, p))
    if not dependent or p == 0:
        return E
    G = rng.standard_normal((m, 1))
    return math.sqrt(RHO) * G + math.sqrt(1.0 - RHO) * E


def _t3(rng: np.random.Generator, W: NDArray[np.float64]) -> NDArray[np.float64]:
    v = rng.chisquare(3, size=W.shape)
    return W / np.sqrt(v / 3.0)


_BLOCK_MAPS = (
    lambda w: w,
    np.exp,
    lambda w: np.log(np.abs(w)),
    np.square,
    lambda w: np.sqrt(np.abs(w)),
)


def block_ids(p: int) -> NDArray[np.intp]:
    """Block index 0..4 of each of ``p`` columns; near-equal contiguous blocks."""
    out = np.empty(p, dtype=np.intp)
    for b, cols in enumerate(np.array_split(np.arange(p), N_BLOCKS)):
        out[cols] = b
    return out


def _transform_blocks(W: NDArray[np.float64]) -> NDArray[np.float64]:
    X = np.empty_like(W)
    ids = block_ids(W.shape[1])
    for b, f in enumerate(_BLOCK_MAPS):
        cols = ids == b
        if cols.any():
            X[:, cols] = f(W[:, cols])
    return X


def _symmetric_family(spec: ScenarioSpec, rng: np.random.Generator, m: int, cls: int) -> NDArray[np.float64]:
    r, p = spec.n_relevant, spec.p
    W_rel = _latent(rng, m, r, spec.dependent)
    W_noise = _latent(rng, m, p - r, False)
    if spec.scenario == "t3_shift":
        rel, noise, shift = _t3(rng, W_rel), _t3(rng, W_noise), T3_SHIFT
    elif spec.scenario == "lognormal_shift":
        rel, noise, shift = np.exp(W_rel), np.exp(W_noise), SKEW_SHIFT
    else:
        rel, noise, shift = _transform_blocks(W_rel), _transform_blocks(W_noise), SKEW_SHIFT
    if cls == 1:
        rel = rel + shift
    return np.hstack([rel, noise])


def _beta_params(spec: ScenarioSpec) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    rng = stream(spec.seed, 0)
    lo, hi = BETA_RANGE
    r, p = spec.n_relevant, spec.p
    rel = rng.uniform(lo, hi, size=(2, 2, r))  # (a|b, class, variable)
    noise = rng.uniform(lo, hi, size=(2, 1, p - r))
    a = np.hstack([rel[0], np.repeat(noise[0], 2, axis=0)])
    b = np.hstack([rel[1], np.repeat(noise[1], 2, axis=0)])
    return a, b


def _beta_family(a, b, rng: np.random.Generator, m: int, cls: int) -> NDArray[np.float64]:
    ak, bk = a[cls], b[cls]
    return rng.beta(ak, bk, size=(m, ak.size)) - ak / (ak + bk)


def _draw_set(spec: ScenarioSpec, rng: np.random.Generator, params) -> Dataset:
    m = spec.n // 2
    blocks = []
    for cls in (0, 1):
        if spec.scenario == "beta_random":
            blocks.append(_beta_family(*params, rng, m, cls))
        else:
            blocks.append(_symmetric_family(spec, rng, m, cls))
    y = np.repeat([0, 1], m)
    return Dataset(np.vstack(blocks), y)


def generate(spec: ScenarioSpec) -> tuple[Dataset, Dataset]:
    """Independent train and test sets of ``n`` observations each (``n/2`` per class).

    Relevant variables occupy the first ``ceil(p * relevant_fraction)``
    columns; the rest are noise drawn from the same base law without the class
    difference, independent of each other and of the relevant block.
    """
    params = _beta_params(spec) if spec.scenario == "beta_random" else None
    train = _draw_set(spec, stream(spec.seed, 1), params)
    test_rng = stream(spec.seed, 2) if spec.test_seed is None else stream(spec.test_seed, 2)
    test = _draw_set(spec, test_rng, params)
    return train, test


def latent_block(spec: ScenarioSpec, m: int, seed: int) -> NDArray[np.float64]:
    """Latent Gaussian layer for the relevant columns, before any transform."""
    return _latent(stream(seed, 3), m, spec.n_relevant, spec.dependent)

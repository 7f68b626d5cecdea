"""Population correct-classification probability of the quantile rule.

For one variable the probability has a closed form in the two class CDFs and
quantile functions. :func:`psi_regions` recomputes it by integrating the
densities over the four pieces of the real line delimited by the two class
quantiles, without using the closed form, and :func:`psi_monte_carlo`
estimates it by simulation for any dimension.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import integrate, optimize, stats

from .classifier import decide
from .core import check_level, distance_matrix
from .errors import InvalidArgumentError

Sampler = Callable[[np.random.Generator, int], NDArray[np.float64]]
LabeledSampler = Callable[[np.random.Generator, int], "tuple[NDArray[np.float64], NDArray[np.intp]]"]


@dataclass(frozen=True)
class UnivariateDistribution:
    name: str
    cdf: Callable[[float], float]
    quantile: Callable[[float], float]
    pdf: Callable[[float], float]
    sampler: Sampler
    support: tuple[float, float] = (-math.inf, math.inf)

    @classmethod
    def from_scipy(cls, name: str, frozen, shift: float = 0.0) -> "UnivariateDistribution":
        lo, hi = frozen.support()
        return cls(
            name=name,
            cdf=lambda x: float(frozen.cdf(x - shift)),
            quantile=lambda t: float(frozen.ppf(t)) + shift,
            pdf=lambda x: float(frozen.pdf(x - shift)),
            sampler=lambda rng, n: frozen.rvs(size=n, random_state=rng) + shift,
            support=(float(lo) + shift, float(hi) + shift),
        )


def normal(mean: float = 0.0, sd: float = 1.0) -> UnivariateDistribution:
    return UnivariateDistribution.from_scipy(f"N({mean:g},{sd:g})", stats.norm(mean, sd))


def chi2(df: float, shift: float = 0.0) -> UnivariateDistribution:
    name = f"chi2_{df:g}" + (f"+{shift:g}" if shift else "")
    return UnivariateDistribution.from_scipy(name, stats.chi2(df), shift)


def exponential(rate: float = 1.0, shift: float = 0.0) -> UnivariateDistribution:
    if rate <= 0:
        raise InvalidArgumentError("rate must be positive")
    return UnivariateDistribution(
        name=f"Exp({rate:g})" + (f"+{shift:g}" if shift else ""),
        cdf=lambda x: -math.expm1(-rate * (x - shift)) if x > shift else 0.0,
        quantile=lambda t: -math.log1p(-t) / rate + shift,
        pdf=lambda x: rate * math.exp(-rate * (x - shift)) if x >= shift else 0.0,
        sampler=lambda rng, n: rng.exponential(1.0 / rate, size=n) + shift,
        support=(shift, math.inf),
    )


@dataclass(frozen=True)
class UnivariateProblem:
    P0: UnivariateDistribution
    P1: UnivariateDistribution
    pi0: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 < self.pi0 < 1.0:
            raise InvalidArgumentError(f"pi0 must lie in (0, 1), got {self.pi0}")

    @property
    def pi1(self) -> float:
        return 1.0 - self.pi0

    def sampler(self) -> LabeledSampler:
        """Labelled sampler: class 1 with probability ``pi1``."""

        def draw(rng: np.random.Generator, n: int):
            y = (rng.random(n) >= self.pi0).astype(np.intp)
            z = np.empty(n)
            n1 = int(y.sum())
            z[y == 0] = self.P0.sampler(rng, n - n1)
            z[y == 1] = self.P1.sampler(rng, n1)
            return z[:, None], y

        return draw


def figure_problems() -> dict[str, UnivariateProblem]:
    """The four two-population examples used to illustrate the effect of skewness."""
    return {
        "gaussian": UnivariateProblem(normal(0, 1), normal(1, 1)),
        "chisq": UnivariateProblem(chi2(5), chi2(5, shift=2.0)),
        "exponential": UnivariateProblem(exponential(1.0), exponential(1.0, shift=0.5)),
        "gauss_chisq": UnivariateProblem(normal(5, 1), chi2(4)),
    }


def psi_lemma1(problem: UnivariateProblem, theta: float) -> float:
    """Closed-form correct-classification probability for one variable."""
    theta = check_level(theta, open_interval=True)
    q0, q1 = problem.P0.quantile(theta), problem.P1.quantile(theta)
    if q0 <= q1:
        cut = theta * q0 + (1.0 - theta) * q1
        return problem.pi0 * problem.P0.cdf(cut) + problem.pi1 * (1.0 - problem.P1.cdf(cut))
    cut = theta * q1 + (1.0 - theta) * q0
    return problem.pi1 * problem.P1.cdf(cut) + problem.pi0 * (1.0 - problem.P0.cdf(cut))


def psi_exponential_shift(lam: float, c: float, pi0: float, theta: float) -> float:
    """Closed form for ``Exp(lam)`` against ``Exp(lam) + c``."""
    if lam <= 0 or c <= 0:
        raise InvalidArgumentError("lambda and c must be positive")
    theta = check_level(theta)
    pi1 = 1.0 - pi0
    return pi0 - (1.0 - theta) * math.exp(c * lam * theta) * (pi0 * math.exp(-c * lam) - pi1)


def _mass(dist: UnivariateDistribution, a: float, b: float) -> float:
    lo, hi = max(a, dist.support[0]), min(b, dist.support[1])
    if not lo < hi:
        return 0.0
    val, _ = integrate.quad(dist.pdf, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=200)
    return val


def psi_regions(problem: UnivariateProblem, theta: float) -> float:
    """Correct-classification probability by integrating densities region by region.

    The line is split at the two class quantiles into a lower tail, the gap
    between the quantiles (on whichever side it lies) and an upper tail. On
    each piece the score difference is affine in ``z``; its sign change, if
    any, is located numerically and the class densities are integrated over
    the parts where each class wins.
    """
    theta = check_level(theta, open_interval=True)
    q0, q1 = problem.P0.quantile(theta), problem.P1.quantile(theta)
    P0, P1, pi0, pi1 = problem.P0, problem.P1, problem.pi0, problem.pi1

    def diff(z: float) -> float:
        # positive => class 0 is chosen
        return _phi(z, q1, theta) - _phi(z, q0, theta)

    lo, hi = min(q0, q1), max(q0, q1)
    total = 0.0
    for a, b, probe in ((-math.inf, lo, lo - 1.0), (hi, math.inf, hi + 1.0)):
        if diff(probe) > 0:
            total += pi0 * _mass(P0, a, b)
        else:
            total += pi1 * _mass(P1, a, b)
    if hi > lo:
        da, db = diff(lo), diff(hi)
        if da > 0 >= db:
            r = optimize.brentq(diff, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
            total += pi0 * _mass(P0, lo, r) + pi1 * _mass(P1, r, hi)
        elif da <= 0 < db:
            r = optimize.brentq(diff, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
            total += pi1 * _mass(P1, lo, r) + pi0 * _mass(P0, r, hi)
        elif da > 0:
            total += pi0 * _mass(P0, lo, hi)
        else:
            total += pi1 * _mass(P1, lo, hi)
    return total


def _phi(z: float, q: float, theta: float) -> float:
    return (1.0 - theta) * (q - z) if z <= q else theta * (z - q)


def optimal_theta_scan(problem: UnivariateProblem, grid: ArrayLike) -> tuple[float, float]:
    """Grid level maximising the closed-form probability, and that maximum."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise InvalidArgumentError("empty grid")
    psi = np.array([psi_lemma1(problem, t) for t in grid])
    i = int(np.argmax(psi))
    return float(grid[i]), float(psi[i])


def theory_curve(problem: UnivariateProblem, grid: ArrayLike) -> NDArray[np.float64]:
    """Rows of ``(theta, psi, 1 - psi)``."""
    grid = np.asarray(grid, dtype=float)
    psi = np.array([psi_lemma1(problem, t) for t in grid])
    return np.column_stack([grid, psi, 1.0 - psi])


def _chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(chunk,))))


def psi_monte_carlo(
    generator: LabeledSampler,
    quantiles: ArrayLike,
    theta: float,
    n_samples: int,
    rng_seed: int,
    *,
    chunk_size: int = 20000,
    workers: int = 1,
) -> tuple[float, float]:
    """Simulated correct-classification rate of the rule with the supplied quantiles.

    Draws are split into fixed-size chunks, each with its own derived stream,
    so the estimate does not depend on ``workers``.
    """
    if n_samples < 100:
        raise InvalidArgumentError("n_samples must be at least 100")
    Q = np.atleast_2d(np.asarray(quantiles, dtype=float))
    theta = check_level(theta)
    sizes = [chunk_size] * (n_samples // chunk_size)
    if n_samples % chunk_size:
        sizes.append(n_samples % chunk_size)

    def run(i: int) -> int:
        Z, y = generator(_chunk_rng(rng_seed, i), sizes[i])
        Z = np.asarray(Z, dtype=float)
        if Z.ndim != 2 or Z.shape != (sizes[i], Q.shape[1]) or np.shape(y) != (sizes[i],):
            raise InvalidArgumentError("sampler output does not match the quantile matrix")
        D = distance_matrix(Z, Q, theta)
        return int(np.count_nonzero(decide(D) == y))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            correct = sum(ex.map(run, range(len(sizes))))
    else:
        correct = sum(run(i) for i in range(len(sizes)))
    est = correct / n_samples
    return est, math.sqrt(est * (1.0 - est) / n_samples)

"""Replicated simulation experiments, cross-validation runs and theta curves."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .classifier import (
    CVResult,
    FitConfig,
    accuracy_curve,
    centroid_classify,
    cross_validate,
    decide,
    fit,
    median_classify,
)
from .core import distance_matrix, order_indices
from .dataset import Dataset, fmt_float, read_csv
from .errors import ConfigError
from .scaling import compute_scales
from .simgen import ScenarioSpec, generate
from .skewness import SkewnessMode, apply_sign_flips, compute_sign_flips

BASELINES = ("centroid", "median")
_BASELINE_LABEL = {"centroid": "CC", "median": "MC"}


def method_name(mode: SkewnessMode) -> str:
    if mode.kind == "none":
        return "QC"
    if mode.kind == "moment":
        return "QCS"
    if mode.u == 0.75:
        return "QCG"
    return f"QC[u={mode.u:g}]"


def replication_seed(master: int, rep: int) -> int:
    ss = np.random.SeedSequence(int(master), spawn_key=(int(rep),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class ExperimentConfig:
    """One experimental setting.

    Either ``scenario`` is set (data are simulated afresh for every
    replication) or ``train_path``/``test_path`` point to a fixed split, in
    which case a single replication is run.
    """

    scenario: ScenarioSpec | None = None
    train_path: str | None = None
    test_path: str | None = None
    fit: FitConfig = field(default_factory=FitConfig)
    skew_modes: tuple[SkewnessMode, ...] = (SkewnessMode("moment"), SkewnessMode("quantile", 0.75))
    replications: int = 20
    baselines: tuple[str, ...] = BASELINES
    seed: int = 0
    workers: int = 1

    def __post_init__(self) -> None:
        if (self.scenario is None) == (self.train_path is None):
            raise ConfigError("give either a scenario or a train/test pair of CSV files")
        if self.train_path is not None and self.test_path is None:
            raise ConfigError("a test CSV is required together with the train CSV")
        if self.replications < 1:
            raise ConfigError("replications must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        bad = set(self.baselines) - set(BASELINES)
        if bad:
            raise ConfigError(f"unknown baseline(s): {', '.join(sorted(bad))}")
        if not self.skew_modes and not self.baselines:
            raise ConfigError("nothing to evaluate")

    def methods(self) -> list[str]:
        return [method_name(m) for m in self.skew_modes] + [_BASELINE_LABEL[b] for b in self.baselines]


@dataclass(frozen=True)
class MethodSummary:
    method: str
    mean_error: float
    sd_error: float
    mean_theta: float | None
    sd_theta: float | None
    replications: int


@dataclass(frozen=True)
class ExperimentReport:
    rows: tuple[MethodSummary, ...]
    header: tuple[str, ...] = ()

    def row(self, method: str) -> MethodSummary:
        for r in self.rows:
            if r.method == method:
                return r
        raise KeyError(method)

    def to_csv(self) -> str:
        buf = io.StringIO()
        for h in self.header:
            buf.write(f"# {h}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["method", "mean_error", "sd_error", "mean_theta", "sd_theta", "replications"])
        for r in self.rows:
            w.writerow(
                [
                    r.method,
                    fmt_float(r.mean_error),
                    fmt_float(r.sd_error),
                    "" if r.mean_theta is None else fmt_float(r.mean_theta),
                    "" if r.sd_theta is None else fmt_float(r.sd_theta),
                    r.replications,
                ]
            )
        return buf.getvalue()

    def to_table(self) -> str:
        lines = [f"{'method':<10}{'error':>8}{'(sd)':>9}{'theta':>9}{'(sd)':>9}"]
        for r in self.rows:
            th = "" if r.mean_theta is None else f"{r.mean_theta:9.3f}{r.sd_theta:9.3f}"
            lines.append(f"{r.method:<10}{r.mean_error:8.3f}{r.sd_error:9.3f}{th}")
        return "\n".join(lines)


def _one_replication(cfg: ExperimentConfig, rep: int) -> list[tuple[float, float | None]]:
    if cfg.scenario is not None:
        spec = replace(cfg.scenario, seed=replication_seed(cfg.seed, rep), test_seed=None)
        train, test = generate(spec)
    else:
        train, test = read_csv(cfg.train_path), read_csv(cfg.test_path)  # type: ignore[arg-type]
    out: list[tuple[float, float | None]] = []
    for mode in cfg.skew_modes:
        model = fit(train, replace(cfg.fit, skew_mode=mode))
        out.append((model.error_rate(test), model.theta_star))
    for b in cfg.baselines:
        clf = centroid_classify if b == "centroid" else median_classify
        out.append((float(np.mean(clf(train, test.features) != test.labels)), None))
    return out


def _sd(values: list[float]) -> float:
    if len(values) < 2:
        return 0.0
    m = math.fsum(values) / len(values)
    return math.sqrt(math.fsum((v - m) ** 2 for v in values) / (len(values) - 1))


def describe(cfg: ExperimentConfig) -> tuple[str, ...]:
    f = cfg.fit
    if cfg.scenario is not None:
        s = cfg.scenario
        src = (
            f"scenario={s.scenario} n={s.n} p={s.p} relevant={s.relevant_fraction:g} "
            f"dependent={str(s.dependent).lower()}"
        )
    else:
        src = f"train={cfg.train_path} test={cfg.test_path}"
    return (
        "quantileda experiment report",
        src,
        f"tau={f.tau:g} grid={f.grid_size} standardization={f.standardization}",
        f"replications={cfg.replications} seed={cfg.seed}",
    )


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Fit and evaluate every method on each replication and aggregate.

    Replications are independent and seeded from ``cfg.seed`` and the
    replication index, and are aggregated in index order, so the report does
    not depend on ``cfg.workers``.
    """
    reps = cfg.replications if cfg.scenario is not None else 1
    if cfg.workers > 1 and reps > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as ex:
            results = list(ex.map(_one_replication, [cfg] * reps, range(reps)))
    else:
        results = [_one_replication(cfg, r) for r in range(reps)]
    rows = []
    for i, name in enumerate(cfg.methods()):
        errs = [res[i][0] for res in results]
        thetas = [res[i][1] for res in results if res[i][1] is not None]
        rows.append(
            MethodSummary(
                method=name,
                mean_error=math.fsum(errs) / reps,
                sd_error=_sd(errs),
                mean_theta=math.fsum(thetas) / reps if thetas else None,
                sd_theta=_sd(thetas) if thetas else None,
                replications=reps,
            )
        )
    return ExperimentReport(tuple(rows), describe(replace(cfg, replications=reps)))


def run_cv(path: str | Path, config: FitConfig, folds: int | str = "loo", seed: int = 0) -> CVResult:
    """Cross-validated error of the quantile classifier on a CSV dataset."""
    return cross_validate(read_csv(path), config, folds, seed)


@dataclass(frozen=True)
class ThetaCurve:
    thetas: np.ndarray
    train_psi: np.ndarray
    test_error: np.ndarray
    theta_star: float
    selected_train_psi: float
    selected_test_error: float
    references: dict[str, tuple[float, float]]  # name -> (train accuracy, test error)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["kind", "theta", "train_psi", "test_error"])
        for t, s, e in zip(self.thetas, self.train_psi, self.test_error):
            w.writerow(["curve", fmt_float(t), fmt_float(s), fmt_float(e)])
        w.writerow(
            ["selected", fmt_float(self.theta_star), fmt_float(self.selected_train_psi), fmt_float(self.selected_test_error)]
        )
        for name, (acc, err) in self.references.items():
            w.writerow([name, "", fmt_float(acc), fmt_float(err)])
        return buf.getvalue()


def theta_curve(train: Dataset, test: Dataset, config: FitConfig) -> ThetaCurve:
    """Training accuracy and test error of the quantile rule at every grid level."""
    scales = compute_scales(train, config.standardization)
    tr = train.with_features(train.features / scales)
    flips = compute_sign_flips(tr, config.skew_mode)
    tr = apply_sign_flips(tr, flips)
    Zte = test.features / scales * flips
    grid = config.grid
    curve = accuracy_curve(tr, grid)
    sorted_cols = [np.sort(tr.features[tr.labels == k], axis=0) for k in range(tr.g)]
    errs = []
    for theta in grid:
        Q = np.vstack([Xk[order_indices(Xk.shape[0], [theta])[0]] for Xk in sorted_cols])
        errs.append(float(np.mean(decide(distance_matrix(Zte, Q, theta)) != test.labels)))
    model = fit(train, config)
    i = int(np.flatnonzero(grid == model.theta_star)[0])
    refs = {}
    for name, clf in (("centroid", centroid_classify), ("median", median_classify)):
        refs[name] = (
            float(np.mean(clf(train, train.features) == train.labels)),
            float(np.mean(clf(train, test.features) != test.labels)),
        )
    return ThetaCurve(grid, curve.psi_n, np.asarray(errs), model.theta_star, float(curve.psi_n[i]), errs[i], refs)

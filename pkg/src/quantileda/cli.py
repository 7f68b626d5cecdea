"""Command line interface: ``quantileda <command> [options]``.

Settings can also come from an INI file given with ``--config``; any flag
given on the command line overrides the file. Recognised sections and keys::

    [scenario]   scenario, n, p, relevant, dependent
    [fit]        tau, grid, skew, standardize
    [experiment] reps, seed, workers, baselines, folds

Exit codes: 0 success, 2 configuration error, 3 data error.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import modelio
from .classifier import DEFAULT_GRID, DEFAULT_TAU, FitConfig, fit
from .dataset import fmt_float, read_csv, write_csv
from .errors import ConfigError, DataError, InvalidArgumentError
from .experiment import BASELINES, ExperimentConfig, run_cv, run_experiment, theta_curve
from .scaling import StandardizationMode
from .simgen import SCENARIOS, ScenarioSpec, generate
from .skewness import SkewnessMode
from .theory import figure_problems, theory_curve

EXIT_CONFIG = 2
EXIT_DATA = 3

_CONFIG_KEYS = {
    "scenario": {"scenario": str, "n": int, "p": int, "relevant": float, "dependent": "bool"},
    "fit": {"tau": float, "grid": int, "skew": str, "standardize": str},
    "experiment": {"reps": int, "seed": int, "workers": int, "baselines": str, "folds": str},
}

_DEFAULTS: dict[str, Any] = {
    "n": 100,
    "p": 50,
    "relevant": 1.0,
    "dependent": False,
    "tau": DEFAULT_TAU,
    "grid": DEFAULT_GRID,
    "skew": "none",
    "reps": 20,
    "seed": 0,
    "workers": 1,
    "baselines": ",".join(BASELINES),
    "folds": "loo",
}


def _read_config(path: str | None) -> dict[str, Any]:
    if path is None:
        return {}
    cp = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except configparser.Error as exc:
        raise ConfigError(f"bad config file {path}: {exc}") from None
    out: dict[str, Any] = {}
    for section in cp.sections():
        keys = _CONFIG_KEYS.get(section)
        if keys is None:
            raise ConfigError(f"{path}: unknown section [{section}]")
        for key, raw in cp.items(section):
            kind = keys.get(key)
            if kind is None:
                raise ConfigError(f"{path}: unknown key {key!r} in [{section}]")
            try:
                out[key] = cp.getboolean(section, key) if kind == "bool" else kind(raw)
            except ValueError:
                raise ConfigError(f"{path}: bad value {raw!r} for {key}") from None
    return out


class Settings:
    """Command-line flags layered over the config file and built-in defaults."""

    def __init__(self, args: argparse.Namespace):
        self._args = args
        self._file = _read_config(getattr(args, "config", None))

    def get(self, key: str) -> Any:
        v = getattr(self._args, key, None)
        if v is not None:
            return v
        if key in self._file:
            return self._file[key]
        return _DEFAULTS.get(key)

    def explicit(self, key: str) -> Any:
        """Value from the command line or config file, ignoring built-in defaults."""
        v = getattr(self._args, key, None)
        return v if v is not None else self._file.get(key)

    def fit_config(self, skew: str | None = None) -> FitConfig:
        std_text = self.get("standardize")
        if std_text is None:
            std_text = "pooled" if self.get("scenario") == "mixed_blocks" else "none"
        try:
            return FitConfig(
                tau=float(self.get("tau")),
                grid_size=int(self.get("grid")),
                skew_mode=SkewnessMode.parse(skew or self.get("skew")),
                standardization=StandardizationMode.parse(std_text),
            )
        except InvalidArgumentError as exc:
            raise ConfigError(str(exc)) from None

    def scenario(self, seed: int | None = None) -> ScenarioSpec | None:
        name = self.get("scenario")
        if name is None:
            return None
        try:
            return ScenarioSpec(
                scenario=name,
                n=int(self.get("n")),
                p=int(self.get("p")),
                relevant_fraction=float(self.get("relevant")),
                dependent=bool(self.get("dependent")),
                seed=int(self.get("seed") if seed is None else seed),
            )
        except InvalidArgumentError as exc:
            raise ConfigError(str(exc)) from None


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        try:
            Path(out).write_text(text, encoding="utf-8", newline="\n")
        except OSError as exc:
            raise DataError(f"cannot write {out}: {exc.strerror}") from None


def _folds(text: str) -> int | str:
    if str(text).lower() == "loo":
        return "loo"
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"--folds must be 'loo' or an integer, got {text!r}") from None


def cmd_fit(args: argparse.Namespace) -> int:
    s = Settings(args)
    model = fit(read_csv(args.train), s.fit_config())
    text = modelio.dumps(model)
    _write(text, args.out)
    print(f"theta* = {model.theta_star:.4g}, training accuracy = {model.curve.psi_n.max():.4f}", file=sys.stderr)
    return 0


def cmd_predict(args: argparse.Namespace) -> int:
    model = modelio.load(args.model)
    data = read_csv(args.data)
    if data.p != model.p:
        raise DataError(f"model expects {model.p} features, data has {data.p}")
    pred = np.atleast_1d(model.predict(data.features))
    names = model.class_names
    lines = ["row,predicted"] + [f"{i + 1},{names[k] if names else k}" for i, k in enumerate(pred)]
    _write("\n".join(lines) + "\n", args.out)
    if args.out not in (None, "-"):
        print(f"error rate against file labels: {np.mean(pred != data.labels):.4f}", file=sys.stderr)
    return 0


def cmd_cv(args: argparse.Namespace) -> int:
    s = Settings(args)
    res = run_cv(args.data, s.fit_config(), _folds(s.get("folds")), int(s.get("seed")))
    text = (
        "rate,stderr,mean_theta\n"
        f"{fmt_float(res.rate)},{fmt_float(res.stderr)},{fmt_float(res.mean_theta)}\n"
    )
    _write(text, args.out)
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    s = Settings(args)
    spec = s.scenario()
    if spec is None:
        raise ConfigError("simulate needs --scenario")
    train, test = generate(spec)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    write_csv(train, out / "train.csv")
    write_csv(test, out / "test.csv")
    print(f"wrote {out / 'train.csv'} and {out / 'test.csv'}", file=sys.stderr)
    return 0


def _train_test(s: Settings, args: argparse.Namespace):
    spec = s.scenario()
    if spec is not None:
        return generate(spec)
    if args.train is None or args.test is None:
        raise ConfigError("give --scenario or both --train and --test")
    return read_csv(args.train), read_csv(args.test)


def cmd_experiment(args: argparse.Namespace) -> int:
    s = Settings(args)
    skews = [t for t in str(s.explicit("skew") or "moment,galton").split(",") if t]
    baselines = tuple(b for b in str(s.get("baselines")).split(",") if b and b != "none")
    try:
        modes = tuple(SkewnessMode.parse(t) for t in skews)
    except InvalidArgumentError as exc:
        raise ConfigError(str(exc)) from None
    cfg = ExperimentConfig(
        scenario=s.scenario(),
        train_path=args.train,
        test_path=args.test,
        fit=s.fit_config(skews[0] if skews else "none"),
        skew_modes=modes,
        replications=int(s.get("reps")),
        baselines=baselines,
        seed=int(s.get("seed")),
        workers=int(s.get("workers")),
    )
    report = run_experiment(cfg)
    _write(report.to_csv(), args.out)
    if args.out not in (None, "-"):
        print(report.to_table(), file=sys.stderr)
    return 0


def cmd_theory(args: argparse.Namespace) -> int:
    s = Settings(args)
    problems = figure_problems()
    tau, k = float(s.get("tau")), int(s.get("grid"))
    if not 0.0 < tau < 0.5 or k < 2:
        raise ConfigError("need 0 < tau < 0.5 and grid >= 2")
    rows = theory_curve(problems[args.problem], np.linspace(tau, 1.0 - tau, k))
    lines = ["theta,psi,misclassification"] + [",".join(fmt_float(v) for v in r) for r in rows]
    _write("\n".join(lines) + "\n", args.out)
    return 0


def cmd_curve(args: argparse.Namespace) -> int:
    s = Settings(args)
    train, test = _train_test(s, args)
    _write(theta_curve(train, test, s.fit_config()).to_csv(), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI file with default settings")
    common.add_argument("--tau", type=float, help=f"grid trimming, grid is [tau, 1-tau] (default {DEFAULT_TAU})")
    common.add_argument("--grid", type=int, help=f"number of grid levels (default {DEFAULT_GRID})")
    common.add_argument("--skew", help="none | moment | galton | quantile:<u>")
    common.add_argument("--standardize", help="none | pooled | range | iqr | groups:<file>")
    common.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    common.add_argument("--out", help="output path ('-' or omitted: stdout)")
    common.add_argument("-v", "--verbose", action="store_true")

    scen = argparse.ArgumentParser(add_help=False)
    scen.add_argument("--scenario", choices=SCENARIOS)
    scen.add_argument("--n", type=int, help="observations per set, split evenly over two classes")
    scen.add_argument("--p", type=int, help="number of variables")
    scen.add_argument("--relevant", type=float, help="fraction of informative variables")
    scen.add_argument("--dependent", action="store_true", default=None, help="equicorrelated latent Gaussian")

    parser = argparse.ArgumentParser(prog="quantileda", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", parents=[common], help="fit a model to a labelled CSV")
    p.add_argument("train")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", parents=[common], help="classify rows of a CSV with a saved model")
    p.add_argument("model")
    p.add_argument("data")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("cv", parents=[common], help="cross-validated error on a CSV")
    p.add_argument("data")
    p.add_argument("--folds", help="'loo' (default) or number of stratified folds")
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("simulate", parents=[common, scen], help="write a simulated train/test pair")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("experiment", parents=[common, scen], help="replicated comparison of classifiers")
    p.add_argument("--train")
    p.add_argument("--test")
    p.add_argument("--reps", type=int, help="replications (default 20)")
    p.add_argument("--workers", type=int, help="worker processes (default 1)")
    p.add_argument("--baselines", help="comma list from centroid,median, or 'none'")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("theory", parents=[common], help="population accuracy curve for a two-population example")
    p.add_argument("--problem", choices=sorted(figure_problems()), default="gaussian")
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("curve", parents=[common, scen], help="training accuracy and test error over the grid")
    p.add_argument("--train")
    p.add_argument("--test")
    p.set_defaults(func=cmd_curve)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, InvalidArgumentError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

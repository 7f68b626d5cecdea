import warnings
from fractions import Fraction

import numpy as np
import pytest

from quantileda import modelio
from quantileda.classifier import (
    AccuracyCurve,
    FitConfig,
    accuracy_curve,
    binomial_stderr,
    centroid_classify,
    class_medians,
    cross_validate,
    decide,
    fit,
    fit_fixed,
    median_classify,
    select_theta,
    stratified_folds,
)
from quantileda.core import empirical_quantile
from quantileda.dataset import Dataset
from quantileda.errors import ConfigError, DataError, InvalidArgumentError
from quantileda.scaling import StandardizationMode
from quantileda.simgen import ScenarioSpec, generate
from quantileda.skewness import SkewnessMode


def exact_quadratic_fit(ts, ys):
    """Least-squares a + b t + c t^2 via the normal equations in rationals."""
    ts = [Fraction(t).limit_denominator(1000) for t in ts]
    ys = [Fraction(y).limit_denominator(1000) for y in ys]
    A = [[sum(t ** (i + j) for t in ts) for j in range(3)] for i in range(3)]
    b = [sum(y * t**i for t, y in zip(ts, ys)) for i in range(3)]
    for i in range(3):  # Gauss-Jordan, exact
        piv = A[i][i]
        A[i] = [v / piv for v in A[i]]
        b[i] /= piv
        for r in range(3):
            if r != i:
                f = A[r][i]
                A[r] = [vr - f * vi for vr, vi in zip(A[r], A[i])]
                b[r] -= f * b[i]
    return lambda t: b[0] + b[1] * Fraction(t).limit_denominator(1000) + b[2] * Fraction(t).limit_denominator(1000) ** 2


GRID9 = np.round(np.linspace(0.1, 0.9, 9), 10)


class TestSelectTheta:
    def test_unique_max(self):
        psi = np.array([0.5, 0.6, 0.8, 0.7, 0.6, 0.5, 0.5, 0.4, 0.3])
        assert select_theta(AccuracyCurve(GRID9, psi)) == pytest.approx(0.3)

    def test_flat_curve_median_point(self):
        assert select_theta(AccuracyCurve(GRID9, np.full(9, 0.7))) == pytest.approx(0.5)

    @pytest.mark.parametrize(
        "psi",
        [
            [0.9, 0.9, 0.85, 0.75, 0.6, 0.5, 0.4, 0.3, 0.2],
            [0.2, 0.3, 0.4, 0.5, 0.6, 0.75, 0.85, 0.9, 0.9],
            [0.9, 0.6, 0.5, 0.45, 0.5, 0.55, 0.6, 0.8, 0.9],
            [0.8, 0.9, 0.7, 0.6, 0.5, 0.6, 0.7, 0.85, 0.9],
        ],
    )
    def test_tie_break_matches_exact_fit(self, psi):
        psi = np.array(psi)
        tied = GRID9[psi == psi.max()]
        q = exact_quadratic_fit(GRID9, psi)
        expected = max(tied, key=q)
        assert select_theta(AccuracyCurve(GRID9, psi)) == expected

    def test_curve_argmax_property(self, rng):
        train, _ = generate(ScenarioSpec("t3_shift", n=60, p=10, seed=3))
        model = fit(train)
        i = int(np.flatnonzero(model.curve.thetas == model.theta_star)[0])
        assert np.all(model.curve.psi_n[i] >= model.curve.psi_n)


class TestFit:
    def test_degenerate_separated(self):
        X = np.array([[0.0, 0.0]] * 3 + [[1.0, 2.0]] * 3)
        ds = Dataset(X, np.repeat([0, 1], 3))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            model = fit(ds)
        assert np.all(model.curve.psi_n == 1.0)
        assert model.theta_star == pytest.approx(0.5)
        assert list(model.predict(X)) == [0, 0, 0, 1, 1, 1]

    def test_quantiles_match_empirical(self, rng):
        train, _ = generate(ScenarioSpec("mixed_blocks", n=80, p=10, seed=4))
        cfg = FitConfig(skew_mode=SkewnessMode("moment"), standardization=StandardizationMode("pooled"))
        model = fit(train, cfg)
        Z = model.transform(train.features)
        for k in range(2):
            for j in range(10):
                assert model.quantiles[k, j] == empirical_quantile(Z[train.labels == k, j], model.theta_star)
        assert np.all(model.scales > 0)

    def test_curve_structure(self):
        train, _ = generate(ScenarioSpec("t3_shift", n=50, p=5, seed=2))
        model = fit(train)
        assert len(model.curve) == 49
        assert np.allclose(model.curve.thetas, np.linspace(0.02, 0.98, 49))
        assert np.allclose(model.curve.psi_n * 50, np.round(model.curve.psi_n * 50), atol=1e-12)

    def test_small_class_rejected(self):
        ds = Dataset(np.array([[0.0], [1.0], [2.0]]), np.array([0, 0, 1]))
        with pytest.raises(InvalidArgumentError):
            fit(ds)

    def test_warns_on_small_tau_n(self):
        ds = Dataset(np.arange(6.0)[:, None], np.repeat([0, 1], 3))
        with pytest.warns(RuntimeWarning):
            fit(ds)

    def test_config_validation(self):
        for kw in (dict(tau=0.0), dict(tau=0.5), dict(grid_size=1), dict(grid_size=2.5)):
            with pytest.raises(ConfigError):
                FitConfig(**kw)

    def test_parallel_curve_identical(self):
        train, _ = generate(ScenarioSpec("beta_random", n=100, p=20, seed=6))
        grid = FitConfig().grid
        a = accuracy_curve(train, grid)
        b = accuracy_curve(train, grid, workers=4)
        assert np.array_equal(a.psi_n, b.psi_n)

    def test_t3_theta_near_half(self):
        thetas = [fit(generate(ScenarioSpec("t3_shift", n=500, p=50, seed=s))[0]).theta_star for s in range(5)]
        assert 0.35 <= np.mean(thetas) <= 0.65

    def test_lognormal_theta_at_edge(self):
        cfg = FitConfig(skew_mode=SkewnessMode("moment"))
        thetas = [fit(generate(ScenarioSpec("lognormal_shift", n=500, p=50, seed=s))[0], cfg).theta_star for s in range(3)]
        assert np.mean(thetas) <= 0.06


class TestPredict:
    def _model(self):
        X = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [5.0, 5.0], [6.0, 6.0], [7.0, 7.0]])
        return fit_fixed(Dataset(X, np.repeat([0, 1], 3)), 0.5)

    def test_quantile_vector_maps_to_class(self):
        m = self._model()
        assert m.predict(m.quantiles[0]) == 0
        assert m.predict(m.quantiles[1]) == 1

    def test_single_and_batch(self):
        m = self._model()
        assert isinstance(m.predict([0.0, 0.0]), int)
        assert list(m.predict(np.array([[0.0, 0.0], [9.0, 9.0]]))) == [0, 1]

    def test_two_class_tie_goes_to_one(self):
        m = self._model()
        assert m.predict([3.5, 3.5]) == 1
        assert list(decide(np.array([[2.0, 2.0], [1.0, 2.0], [2.0, 1.0]]))) == [1, 0, 1]

    def test_multiclass_tie_lowest(self):
        assert list(decide(np.array([[1.0, 1.0, 1.0], [3.0, 2.0, 2.0], [5.0, 4.0, 1.0]]))) == [0, 1, 2]

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            self._model().predict([1.0, 2.0, 3.0])
        with pytest.raises(InvalidArgumentError):
            self._model().predict([1.0, np.nan])


def _random_dataset(rng, n, p, g, integer=False):
    y = np.concatenate([np.arange(g), rng.integers(0, g, size=n - g)])
    while np.any(np.bincount(y, minlength=g) < 2):
        y = np.concatenate([np.arange(g), np.arange(g), rng.integers(0, g, size=n - 2 * g)])
    X = rng.integers(-3, 4, size=(n, p)).astype(float) if integer else rng.normal(size=(n, p)) * rng.uniform(0.1, 5, p)
    return Dataset(X, y)


class TestBaselines:
    def test_centroid_examples(self):
        ds = Dataset(np.array([[0.0], [0.0], [1.0], [1.0]]), np.array([0, 0, 1, 1]))
        assert centroid_classify(ds, [0.0]) == 0
        assert centroid_classify(ds, [0.4]) == 0
        assert centroid_classify(ds, [0.5]) == 1

    def test_median_examples(self):
        ds = Dataset(np.array([[0.0], [0.0], [10.0], [10.0]]), np.array([0, 0, 1, 1]))
        assert median_classify(ds, [4.0]) == 0
        assert median_classify(ds, [5.0]) == 1
        assert median_classify(ds, class_medians(ds)[0]) == 0

    def test_median_equivalence_many_inputs(self, rng):
        ds = _random_dataset(rng, 30, 4, 2)
        Z = rng.normal(size=(1000, 4)) * 3
        assert np.array_equal(fit_fixed(ds, 0.5).predict(Z), median_classify(ds, Z))


class TestInvariants:
    @pytest.mark.parametrize("mode", ["pooled", "range", "iqr"])
    def test_scale_equivariance(self, mode, rng):
        train, test = generate(ScenarioSpec("mixed_blocks", n=60, p=10, seed=12))
        cfg = FitConfig(skew_mode=SkewnessMode("moment"), standardization=StandardizationMode(mode))
        base = fit(train, cfg)
        # powers of two rescale without rounding, so equality is exact
        lam = 2.0 ** rng.integers(-6, 7, size=10)
        scaled = fit(train.with_features(train.features * lam), cfg)
        assert scaled.theta_star == base.theta_star
        assert np.array_equal(scaled.predict(test.features * lam), base.predict(test.features))

    def test_label_permutation(self, rng):
        ds = _random_dataset(rng, 60, 5, 3)
        Z = rng.normal(size=(200, 5))
        perm = np.array([2, 0, 1])
        a = fit(ds)
        b = fit(Dataset(ds.features, perm[ds.labels]))
        assert a.theta_star == b.theta_star
        assert np.array_equal(perm[a.predict(Z)], b.predict(Z))

    def test_duplicating_all_columns(self):
        train, test = generate(ScenarioSpec("t3_shift", n=60, p=8, seed=21))
        a = fit(train)
        b = fit(train.with_features(np.hstack([train.features, train.features])))
        assert a.theta_star == b.theta_star
        assert np.array_equal(a.predict(test.features), b.predict(np.hstack([test.features, test.features])))


class TestCrossValidation:
    def test_separated_zero(self):
        X = np.array([[0.0, 0.0]] * 5 + [[4.0, 4.0]] * 5)
        ds = Dataset(X, np.repeat([0, 1], 5))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = cross_validate(ds)
        assert res.rate == 0.0 and res.stderr == 0.0
        assert len(res.thetas) == 10

    def test_random_labels_near_half(self, rng):
        X = rng.normal(size=(80, 5))
        ds = Dataset(X, rng.permutation(np.repeat([0, 1], 40)))
        res = cross_validate(ds, folds=5, seed=3)
        assert abs(res.rate - 0.5) <= 3 * binomial_stderr(0.5, 80)

    def test_stderr_formula(self):
        assert binomial_stderr(0.033, 60) == pytest.approx(0.023, abs=5e-4)

    def test_stratified_folds(self):
        y = np.repeat([0, 1], [12, 8])
        folds = stratified_folds(y, 4, seed=1)
        assert sorted(np.concatenate(folds)) == list(range(20))
        for f in folds:
            assert list(np.bincount(y[f], minlength=2)) == [3, 2]
        assert all(np.array_equal(a, b) for a, b in zip(folds, stratified_folds(y, 4, seed=1)))

    def test_bad_folds(self):
        ds = Dataset(np.arange(6.0)[:, None], np.repeat([0, 1], 3))
        with pytest.raises(ConfigError):
            cross_validate(ds, folds=1)
        small = Dataset(np.arange(6.0)[:, None], np.array([0, 0, 1, 1, 1, 1]))
        with pytest.raises(ConfigError):
            cross_validate(small, folds=2)  # a training fold keeps one of class 0


class TestModelIO:
    def test_round_trip_exact(self, tmp_path):
        train, test = generate(ScenarioSpec("mixed_blocks", n=60, p=7, seed=2))
        cfg = FitConfig(skew_mode=SkewnessMode("quantile", 0.9), standardization=StandardizationMode("iqr"))
        m = fit(train, cfg)
        modelio.save(m, tmp_path / "m.txt")
        back = modelio.load(tmp_path / "m.txt")
        assert back.theta_star == m.theta_star
        for attr in ("quantiles", "flips", "scales"):
            assert np.array_equal(getattr(back, attr), getattr(m, attr))
        assert np.array_equal(back.curve.psi_n, m.curve.psi_n)
        assert back.skew_mode == m.skew_mode and back.standardization == m.standardization
        assert np.array_equal(back.predict(test.features), m.predict(test.features))
        assert modelio.dumps(back) == modelio.dumps(m)

    def test_header(self):
        ds = Dataset(np.array([[0.0], [1.0], [5.0], [6.0]]), np.array([0, 0, 1, 1]))
        text = modelio.dumps(fit_fixed(ds, 0.5))
        for key in ("version", "g", "p", "theta_star", "skew_mode", "standardization"):
            assert f"\n{key} = " in "\n" + text

    def test_corrupt(self):
        with pytest.raises(DataError):
            modelio.loads("version = 99\n")
        with pytest.raises(DataError):
            modelio.loads("garbage")

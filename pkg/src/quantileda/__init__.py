"""Component-wise quantile classifiers with an empirically optimal quantile level."""

from .classifier import (
    AccuracyCurve,
    CVResult,
    FitConfig,
    QuantileModel,
    centroid_classify,
    cross_validate,
    fit,
    fit_fixed,
    median_classify,
    select_theta,
)
from .core import (
    SortedSample,
    class_score,
    empirical_quantile,
    empirical_quantile_loss,
    quantile_distance,
)
from .dataset import Dataset, read_csv, write_csv
from .errors import ConfigError, DataError, DegenerateSampleError, InvalidArgumentError
from .scaling import StandardizationMode, standardize
from .skewness import SkewnessMode

__version__ = "0.1.0"

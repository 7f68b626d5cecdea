import numpy as np
import pytest

GRID = np.linspace(0.02, 0.98, 49)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def brute_force_quantile(ints, k, denom=50):
    """Smallest minimiser over sample points of the quantile loss at level k/denom.

    ``ints`` are integer-valued observations; the loss scaled by ``denom`` is
    an exact integer, so the argmin involves no rounding.
    """
    x = np.asarray(ints, dtype=np.int64)
    cand = np.unique(x)
    diff = x[None, :] - cand[:, None]
    w = np.where(diff <= 0, denom - k, k)
    loss = np.sum(w * np.abs(diff), axis=1)
    return int(cand[np.flatnonzero(loss == loss.min())[0]])

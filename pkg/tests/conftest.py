import numpy as np
import pytest

from smallgrad import make_logistic, make_quadratic, prepare, synth_dataset


def random_quadratic(rng, d, n=1, singular=False):
    """Random PSD quadratic; strictly PD unless ``singular``."""
    M = rng.standard_normal((d, max(d - 1, 1) if singular else d))
    A = M @ M.T / d
    if not singular:
        A += 0.05 * np.eye(d)
    b = rng.standard_normal(d)
    return make_quadratic(A, b, n=n, seed=int(rng.integers(2 ** 31)))


def random_logistic(rng, n, d, separability=0.7):
    """Small logistic instance with unit-norm rows (L = 0.25)."""
    ds = synth_dataset(int(rng.integers(2 ** 31)), n, d, separability)
    return make_logistic(prepare(ds))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

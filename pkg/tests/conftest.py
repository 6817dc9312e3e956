import numpy as np
import pytest

from mcca.covariance import ModeCovariances


def random_spd(rng, p, rank=None):
    a = rng.standard_normal((p, rank or p + 2))
    return a @ a.T / a.shape[1]


def random_orthonormal(rng, p, r):
    q, _ = np.linalg.qr(rng.standard_normal((p, r)))
    return q


def random_instance(rng, n_groups, shape):
    """Covariances from actual samples, so every matrix is PSD."""
    mats = []
    for _ in range(n_groups):
        n = int(rng.integers(3, 9))
        x = rng.standard_normal((n,) + tuple(shape)) * rng.uniform(0.5, 2.0, size=shape)
        from mcca.covariance import mode_covariance
        mats.append([mode_covariance(x, k) for k in range(len(shape))])
    return ModeCovariances(mats)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

import numpy as np
import pytest

from conftest import random_orthonormal
from mcca import CCA, MPCA, PCA
from mcca.exceptions import ShapeError
from mcca.linalg import principal_angles
from mcca.metrics import rer


def test_pca_matches_naive_covariance(rng):
    x = rng.standard_normal((40, 3, 4)) * rng.uniform(0.2, 3.0, size=(3, 4))
    est = PCA(n_components=4).fit(x)
    flat = x.reshape(40, -1)
    c = flat - flat.mean(axis=0)
    naive = sum(np.outer(r, r) for r in c) / 40
    top = np.linalg.eigh(naive)[1][:, -4:]
    assert principal_angles(est.components_, top).max() < 1e-8
    assert est.transform(x).shape == (40, 4)
    assert est.reconstruct(x).shape == x.shape


def test_pca_affine_subspace(rng):
    basis = random_orthonormal(rng, 12, 3)
    x = (rng.standard_normal((30, 3)) @ basis.T).reshape(30, 3, 4)
    assert rer(x, PCA(n_components=3).fit(x)) < 1e-20


def test_cca_single_group_is_pca(rng):
    x = rng.standard_normal((50, 10)) * np.linspace(3, 0.5, 10)
    p = PCA(n_components=3).fit(x)
    c = CCA(n_components=3).fit(x)
    assert principal_angles(p.components_, c.components_).max() < 1e-8


def test_cca_identical_groups(rng):
    base = rng.standard_normal((20, 6)) * np.linspace(2, 0.5, 6)
    # the second group is a sign flip, which leaves its covariance unchanged
    x = np.concatenate([base, -base])
    y = np.repeat([0, 1], 20)
    two = CCA(n_components=2).fit(x, y)
    one = CCA(n_components=2).fit(base)
    assert principal_angles(two.components_, one.components_).max() < 1e-8


def test_cca_objective_oracle(rng):
    x = rng.standard_normal((30, 5))
    y = np.repeat([0, 1], 15)
    est = CCA(n_components=2).fit(x, y)
    v = est.components_
    total = 0.0
    for g in (0, 1):
        xs = x[y == g] - x[y == g].mean(axis=0)
        s = xs.T @ xs / len(xs)
        total += np.trace(v.T @ s @ v @ v.T @ s @ v)
    np.testing.assert_allclose(est.objective_, total, rtol=1e-12)
    trace = est.report_.objective_trace
    assert all(b >= a - 1e-10 * abs(a) for a, b in zip(trace, trace[1:]))


def test_vector_cap(rng):
    with pytest.raises(ShapeError):
        PCA(n_components=1, cap=10).fit(rng.standard_normal((3, 4, 4)))
    with pytest.raises(ShapeError):
        CCA(n_components=1, cap=10).fit(rng.standard_normal((3, 4, 4)))
    with pytest.raises(ShapeError):
        PCA(n_components=17).fit(rng.standard_normal((3, 4, 4)))


def test_mpca_separable_rank_one(rng):
    a = rng.standard_normal(6)
    b = rng.standard_normal(5)
    x = rng.standard_normal(25)[:, None, None] * np.outer(a, b)
    est = MPCA(ranks=(1, 1)).fit(x)
    assert principal_angles(est.components_[0], a[:, None]).max() < 1e-8
    assert principal_angles(est.components_[1], b[:, None]).max() < 1e-8


def test_mpca_single_sample(rng):
    x = rng.standard_normal((1, 6, 5))
    est = MPCA(ranks=(3, 3), center=False).fit(x)
    u, _, vt = np.linalg.svd(x[0])
    assert principal_angles(est.components_[0], u[:, :3]).max() < 1e-7
    assert principal_angles(est.components_[1], vt[:3].T).max() < 1e-7


def test_mpca_scatter_monotone(rng):
    x = rng.standard_normal((40, 6, 5, 3))
    est = MPCA(ranks=(2, 2, 2), tol=1e-12).fit(x)
    t = est.scatter_trace_
    assert all(b >= a - 1e-10 * abs(a) for a, b in zip(t, t[1:]))
    for u in est.components_:
        np.testing.assert_allclose(u.T @ u, np.eye(u.shape[1]), atol=1e-10)


@pytest.mark.parametrize("est", [PCA(n_components=12), CCA(n_components=12), MPCA(ranks=(3, 4))])
def test_full_rank_lossless(rng, est):
    x = rng.standard_normal((20, 3, 4))
    y = np.repeat([0, 1], 10)
    est.fit(x, y)
    assert rer(x, est) < 1e-10

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from mcca import MCCA
from mcca.covariance import GroupedDataset, ModeCovariances
from mcca.estimator import expand_ranks
from mcca.exceptions import ShapeError
from mcca.tensor import mode_product


@pytest.fixture
def grouped(rng):
    x = rng.standard_normal((30, 5, 4))
    y = np.repeat(["a", "b", "c"], 10)
    return x, y


def test_params_and_clone():
    est = MCCA(ranks=(2, 3), tol=1e-6)
    params = est.get_params()
    assert params["ranks"] == (2, 3) and params["tol"] == 1e-6
    twin = clone(est)
    assert twin.get_params() == params
    est.set_params(max_iter=5)
    assert est.max_iter == 5


def test_fit_transform_shapes(grouped):
    x, y = grouped
    est = MCCA(ranks=(2, 3)).fit(x, y)
    assert est.groups_ == ("a", "b", "c")
    assert est.ranks_ == (2, 3)
    z = est.transform(x)
    assert z.shape == (30, 2, 3)
    assert est.inverse_transform(z).shape == x.shape
    assert len(est.latent_covariances_) == 3
    assert est.n_samples_fit_ == 30 and est.sample_shape_ == (5, 4)
    assert est.contraction_ratios_.shape == (2,)
    np.testing.assert_array_equal(est.fit_transform(x, y), z)


def test_transform_is_mode_products(grouped):
    x, y = grouped
    est = MCCA(ranks=2).fit(x, y)
    v1, v2 = est.components_
    expected = mode_product(mode_product(x[0], v1.T, 0), v2.T, 1)
    np.testing.assert_allclose(est.transform(x[:1])[0], expected, atol=1e-13)


def test_reconstruct_idempotent(grouped):
    x, y = grouped
    est = MCCA(ranks=(2, 2)).fit(x, y)
    once = est.reconstruct(x)
    np.testing.assert_allclose(est.reconstruct(once), once, atol=1e-12)


def test_alternate_entry_points_agree(grouped):
    x, y = grouped
    a = MCCA(ranks=(2, 2)).fit(x, y)
    data = GroupedDataset.from_labels(x, y)
    b = MCCA(ranks=(2, 2)).fit_grouped(data)
    c = MCCA(ranks=(2, 2)).fit_covariances(ModeCovariances.from_dataset(data))
    for est in (b, c):
        for u, v in zip(a.components_, est.components_):
            np.testing.assert_array_equal(u, v)
    assert c.n_samples_fit_ == 30


def test_without_labels_is_one_group(grouped):
    x, _ = grouped
    assert MCCA(ranks=1).fit(x).groups_ == (0,) or len(MCCA(ranks=1).fit(x).groups_) == 1


def test_errors(grouped):
    x, y = grouped
    with pytest.raises(NotFittedError):
        MCCA().transform(x)
    with pytest.raises(ShapeError):
        MCCA(ranks=(6, 1)).fit(x, y)
    with pytest.raises(ShapeError):
        MCCA(ranks=(1, 1, 1)).fit(x, y)
    est = MCCA(ranks=1).fit(x, y)
    with pytest.raises(ShapeError):
        est.transform(np.zeros((2, 4, 5)))
    with pytest.raises(ValueError):
        MCCA(tol=-1).fit(x, y)
    with pytest.raises(ValueError):
        MCCA().fit(np.full((3, 2, 2), np.nan))


def test_expand_ranks():
    assert expand_ranks(2, (3, 4, 5)) == (2, 2, 2)
    assert expand_ranks([1, 2], (3, 4)) == (1, 2)

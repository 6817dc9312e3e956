import io

import numpy as np
import pytest

from conftest import random_orthonormal, random_spd
from mcca import MCCA, PCA
from mcca.covariance import GroupedDataset
from mcca.estimator import MultilinearProjection
from mcca.exceptions import ShapeError
from mcca.metrics import (CompressionRecord, compression_ratio, model_param_count, param_count, read_records_csv,
                          reconstruct, rer, residual, write_records_csv)


class FixedProjection(MultilinearProjection):
    def fit(self, X=None, y=None):
        return self


def projection(bases):
    model = FixedProjection()
    model.components_ = [np.asarray(b) for b in bases]
    model.sample_shape_ = tuple(b.shape[0] for b in bases)
    return model


def test_param_count_examples():
    assert param_count("mcca", (28, 28), (8, 8), 100) == 6848
    assert compression_ratio("mcca", (28, 28), (8, 8), 100) == 6848 / 78400
    assert param_count("pca", (784,), 64, 100) == 56576
    assert param_count("pca", (28, 28), (64,), 100) == 56576
    assert compression_ratio("mpca", (4, 5), (4, 5), 10) > 1
    with pytest.raises(ValueError):
        param_count("svd", (2, 2), (1, 1), 3)
    with pytest.raises(ShapeError):
        param_count("mcca", (2, 2), (1,), 3)


def test_param_count_matches_census(rng):
    bases = [random_orthonormal(rng, 7, 3), random_orthonormal(rng, 5, 2)]
    assert model_param_count(bases, 11) == param_count("mcca", (7, 5), (3, 2), 11)
    assert model_param_count([random_orthonormal(rng, 35, 4)], 11) == param_count("cca", (7, 5), 4, 11)


def test_reconstruct_kronecker_oracle(rng):
    bases = [random_orthonormal(rng, 3, 2), random_orthonormal(rng, 4, 2)]
    model = projection(bases)
    x = rng.standard_normal((3, 4))
    v = np.kron(bases[0], bases[1])
    expected = (v @ v.T @ x.reshape(-1)).reshape(3, 4)
    np.testing.assert_allclose(reconstruct(model, x), expected, atol=1e-13)
    once = reconstruct(model, rng.standard_normal((5, 3, 4)))
    np.testing.assert_allclose(reconstruct(model, once), once, atol=1e-12)
    with pytest.raises(ShapeError):
        reconstruct(model, np.zeros((4, 3)))


def test_reconstruct_orthogonal_sample_vanishes(rng):
    e = np.eye(3)
    model = projection([e[:, :1], np.eye(2)])
    x = np.zeros((3, 2))
    x[1:, :] = rng.standard_normal((2, 2))
    np.testing.assert_array_equal(reconstruct(model, x), 0.0)
    assert rer(x[None], model) == 1.0


def test_rer_basic(rng):
    x = rng.standard_normal((10, 3, 4))
    assert rer(x, projection([np.eye(3), np.eye(4)])) < 1e-28
    with pytest.raises(ValueError):
        rer(np.zeros((2, 3, 4)), projection([np.eye(3), np.eye(4)]))
    b = [random_orthonormal(rng, 3, 2), random_orthonormal(rng, 4, 3)]
    core = rng.standard_normal((10, 2, 3))
    inside = np.einsum("ia,nab,jb->nij", b[0], core, b[1])
    assert rer(inside, projection(b)) < 1e-10
    value = rer(x, projection(b))
    assert 0 <= value <= 1


def test_rer_permutation_and_relabel_invariance(rng):
    x = rng.standard_normal((12, 4, 3))
    y = np.repeat([0, 1, 2], 4)
    model = projection([random_orthonormal(rng, 4, 2), random_orthonormal(rng, 3, 2)])
    base = rer(GroupedDataset.from_labels(x, y), model)
    perm = rng.permutation(12)
    np.testing.assert_allclose(rer(x[perm], model), base, rtol=1e-12)
    relabeled = GroupedDataset.from_labels(x, np.array(["c", "a", "b"])[y])
    np.testing.assert_allclose(rer(relabeled, model), base, rtol=1e-12)


def test_rer_nested_nonincreasing(rng):
    x = rng.standard_normal((15, 5, 4))
    q1, q2 = random_orthonormal(rng, 5, 5), random_orthonormal(rng, 4, 4)
    grid = np.array([[rer(x, projection([q1[:, :r1], q2[:, :r2]])) for r2 in range(1, 5)] for r1 in range(1, 6)])
    assert np.all(np.diff(grid, axis=0) <= 1e-12)
    assert np.all(np.diff(grid, axis=1) <= 1e-12)


def test_residual():
    s = np.array([[2.0, 1.0], [1.0, 3.0]])
    e = residual(s, np.array([[1.0], [0.0]]), np.array([[2.0]]))
    np.testing.assert_array_equal(e, [[0.0, 1.0], [1.0, 3.0]])
    with pytest.raises(ShapeError):
        residual(s, np.eye(3), np.eye(3))


def test_residual_full_rank_and_nested(rng):
    s = random_spd(rng, 5)
    vals, vecs = np.linalg.eigh(s)
    vecs = vecs[:, ::-1]
    norms = []
    for r in range(1, 6):
        v = vecs[:, :r]
        norms.append(np.linalg.norm(residual(s, v, v.T @ s @ v)))
    assert norms[-1] < 1e-12
    assert all(b <= a + 1e-12 for a, b in zip(norms, norms[1:]))


def test_record_evaluate_and_csv(rng):
    x = rng.standard_normal((20, 4, 3))
    y = np.repeat([0, 1], 10)
    recs = [CompressionRecord.evaluate("mcca", MCCA(ranks=(2, 2)).fit(x, y), x),
            CompressionRecord.evaluate("pca", PCA(n_components=3).fit(x), x)]
    assert recs[0].params == param_count("mcca", (4, 3), (2, 2), 20)
    assert recs[1].ranks == (3,)
    text = write_records_csv(recs)
    assert text.splitlines()[0] == "method,ranks,params,cr,rer"
    assert text.splitlines()[1].startswith("mcca,2x2,")
    assert read_records_csv(text) == recs
    buf = io.StringIO()
    write_records_csv(recs, buf)
    buf.seek(0)
    assert read_records_csv(buf) == recs
    with pytest.raises(ValueError):
        read_records_csv("a,b\n")

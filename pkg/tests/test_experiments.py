import xml.etree.ElementTree as ET

import numpy as np
import pytest

from mcca import MCCA
from mcca.covariance import ModeCovariances
from mcca.exceptions import ShapeError
from mcca.experiments import (alpha_scan, check_grid, curve, expand_grid, interpolate_rer, matched_vector_rank,
                              parse_axis, parse_grid, parse_ranks, rer_curve)
from mcca.linalg import principal_angles
from mcca.metrics import CompressionRecord, param_count
from mcca.solver import contraction_ratios
from mcca.svg import line_chart
from mcca.synth import make_grouped_tensors


def test_parsers():
    assert parse_ranks("8x8") == (8, 8)
    assert parse_ranks("3") == (3,)
    assert parse_axis("1-4") == [1, 2, 3, 4]
    assert parse_axis("2,5-9:2") == [2, 5, 7, 9]
    assert parse_grid("1-3x2,4x2") == [[1, 2, 3], [2, 4], [2]]
    for bad in ("0x2", "ax2"):
        with pytest.raises(ValueError):
            parse_ranks(bad)
    for bad in ("3-1", "x", "0", "1-2:0"):
        with pytest.raises(ValueError):
            parse_axis(bad)


def test_expand_grid():
    assert expand_grid([[1, 2], [3, 4]]) == [(1, 3), (1, 4), (2, 3), (2, 4)]
    assert expand_grid([[1, 2, 3], [9]], tie=True) == [(1, 1), (2, 2), (3, 3)]
    assert expand_grid([[1, 2], [1], [2]], tie=True) == [(1, 1, 2), (2, 2, 2)]
    with pytest.raises(ValueError):
        expand_grid([[1]], tie=True)
    with pytest.raises(ShapeError):
        check_grid([(1, 5)], (3, 4))


def test_alpha_scan_matches_direct(rng):
    data = make_grouped_tensors((6, 5), (2, 2), 3, 8, seed=1).dataset
    cov = ModeCovariances.from_dataset(data)
    points = expand_grid([[1, 3, 6], [2, 5]])
    rows = alpha_scan(cov, points)
    assert len(rows) == 12
    for p, k, a in rows:
        np.testing.assert_allclose(a, contraction_ratios(cov, p)[k], rtol=1e-12)
        if p[k] == cov.shape[k]:
            np.testing.assert_allclose(a, 1.0, atol=1e-12)


def test_matched_vector_rank():
    r = matched_vector_rank((28, 28), (8, 8), 100)
    budget = param_count("mcca", (28, 28), (8, 8), 100)
    costs = [abs(param_count("pca", (28, 28), q, 100) - budget) for q in range(1, 785)]
    assert r == 1 + int(np.argmin(costs))


def test_rer_curve_and_interpolation():
    data = make_grouped_tensors((5, 4), (2, 2), 2, 6, seed=3).dataset
    records = rer_curve(data, ["mcca", "pca"], [(1, 1), (2, 2), (5, 4)], vector_ranks=[1, 4, 20])
    assert len(records) == 6
    assert [r.cr for r in records] == sorted(r.cr for r in records)
    xs, ys = curve(records, "pca")
    assert list(xs) == sorted(xs) and len(ys) == 3
    mid = 0.5 * (xs[0] + xs[1])
    np.testing.assert_allclose(interpolate_rer(records, "pca", mid), 0.5 * (ys[0] + ys[1]))
    assert interpolate_rer(records, "pca", xs[-1] * 2) is None
    assert interpolate_rer(records, "mpca", 0.5) is None
    with pytest.raises(ValueError):
        rer_curve(data, [], [(1, 1)])
    with pytest.raises(ValueError):
        rer_curve(data, ["svd"], [(1, 1)])


def test_synth_conforms_to_model():
    syn = make_grouped_tensors((6, 5), (3, 2), 2, 30, noise=0.0, seed=4)
    data = syn.dataset
    assert data.n_groups == 2 and data.shape == (6, 5)
    for v in syn.bases:
        np.testing.assert_allclose(v.T @ v, np.eye(v.shape[1]), atol=1e-12)
    # noiseless samples live in the planted subspace
    for x in data.groups:
        for k, v in enumerate(syn.bases):
            unf = np.moveaxis(x, k + 1, 1).reshape(x.shape[0], x.shape[k + 1], -1)
            resid = unf - v @ (v.T @ unf)
            assert np.abs(resid).max() < 1e-12


def test_two_groups_shared_basis_recovery():
    syn = make_grouped_tensors((8, 7), (3, 2), 2, 200, noise=0.05, seed=5)
    est = MCCA(ranks=(3, 2)).fit_grouped(syn.dataset)
    for v, planted in zip(est.components_, syn.bases):
        assert principal_angles(v, planted).max() < 0.05


def test_line_chart_is_valid_svg():
    doc = line_chart([("A & B", [0, 1, 2], [1.0, 0.5, 0.25]), ("C", [0.5], [0.3])], "t", "x", "y")
    root = ET.fromstring(doc)
    assert root.tag.endswith("svg")
    polylines = [e for e in root.iter() if e.tag.endswith("polyline")]
    assert len(polylines) == 2
    assert "A &amp; B" in doc
    ET.fromstring(line_chart([], "empty"))

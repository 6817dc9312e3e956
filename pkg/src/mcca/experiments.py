"""Rank-grid experiments: contraction-ratio scans and RER-vs-CR curves."""
from __future__ import annotations

import itertools
import re
from typing import Iterable, Sequence

import numpy as np

from . import solver
from .baselines import CCA, MPCA, PCA
from .covariance import GroupedDataset, ModeCovariances
from .estimator import MCCA
from .linalg import DEFAULT_TOL, sym_eig
from .metrics import CompressionRecord, param_count

METHODS = ("mcca", "mpca", "cca", "pca")

_RANGE = re.compile(r"^(\d+)-(\d+)(?::(\d+))?$")


def parse_ranks(text: str) -> tuple[int, ...]:
    """``"8x8"`` -> ``(8, 8)``."""
    try:
        ranks = tuple(int(r) for r in text.lower().split("x"))
    except ValueError as exc:
        raise ValueError(f"cannot parse ranks {text!r}") from exc
    if any(r < 1 for r in ranks):
        raise ValueError(f"ranks must be positive: {text!r}")
    return ranks


def parse_axis(text: str) -> list[int]:
    values = []
    for item in text.split(","):
        item = item.strip()
        m = _RANGE.match(item)
        if m:
            lo, hi, step = int(m.group(1)), int(m.group(2)), int(m.group(3) or 1)
            if hi < lo or step < 1:
                raise ValueError(f"bad range {item!r}")
            values.extend(range(lo, hi + 1, step))
        elif item.isdigit():
            values.append(int(item))
        else:
            raise ValueError(f"cannot parse grid axis item {item!r}")
    if not values or min(values) < 1:
        raise ValueError(f"grid axis {text!r} must list positive ranks")
    return values


def parse_grid(text: str) -> list[list[int]]:
    """Per-mode rank lists separated by ``x``; items are ``n``, ``a-b`` or ``a-b:step``.

    ``"1-4x2,3"`` -> ``[[1, 2, 3, 4], [2, 3]]``.
    """
    return [parse_axis(axis) for axis in text.lower().split("x")]


def expand_grid(axes: Sequence[Sequence[int]], tie: bool = False) -> list[tuple[int, ...]]:
    """Cartesian product of the axes; ``tie`` sets ``R_2 = R_1`` along the first axis."""
    axes = [list(a) for a in axes]
    if tie:
        if len(axes) < 2:
            raise ValueError("tie needs at least two modes")
        head = [(r, r) for r in axes[0]]
        return [h + tuple(rest) for h in head for rest in itertools.product(*axes[2:])]
    return [tuple(p) for p in itertools.product(*axes)]


def check_grid(points: Iterable[Sequence[int]], shape: Sequence[int]) -> None:
    for p in points:
        solver.check_ranks(p, shape)


def alpha_scan(cov: ModeCovariances, points: Sequence[Sequence[int]], eig_tol: float = DEFAULT_TOL,
               backend: str = "auto") -> list[tuple[tuple[int, ...], int, float]]:
    """Contraction ratio of every mode at every grid point.

    Returns ``(ranks, k, alpha)`` rows in grid order, modes 0-based. One
    eigendecomposition is shared by all points that agree on the other modes'
    ranks.
    """
    points = [tuple(int(r) for r in p) for p in points]
    check_grid(points, cov.shape)
    cache: dict = {}
    rows = []
    for p in points:
        for k in range(cov.n_modes):
            key = (k,) + p[:k] + p[k + 1:]
            if key not in cache:
                m = solver.tilde_m_matrix(cov, k, p, eig_tol)
                cache[key] = (sym_eig(m, tol=eig_tol, backend=backend)[0], float(np.trace(m)))
            values, total = cache[key]
            if total > 0:
                alpha = float(np.clip(np.sum(values[:p[k]]) / total, 0.0, 1.0))
            else:
                alpha = 1.0 if p[k] == cov.shape[k] else 0.0
            rows.append((p, k, alpha))
    return rows


def matched_vector_rank(shape: Sequence[int], ranks: Sequence[int], n_samples: int) -> int:
    """Vector-method rank whose parameter count is closest to the multilinear one."""
    p = int(np.prod(shape, dtype=np.int64))
    target = param_count("mcca", shape, ranks, n_samples)
    return int(min(max(1, round(target / (p + n_samples))), p))


def make_estimator(method: str, ranks, **fit_kw):
    tol = fit_kw.get("tol", 1e-8)
    max_iter = fit_kw.get("max_iter", 100)
    if method == "mcca":
        return MCCA(ranks=tuple(ranks), tol=tol, max_iter=max_iter)
    if method == "mpca":
        return MPCA(ranks=tuple(ranks), tol=tol, max_iter=max_iter)
    r = ranks if np.isscalar(ranks) else ranks[0]
    if method == "cca":
        return CCA(n_components=int(r), tol=tol, max_iter=max_iter)
    if method == "pca":
        return PCA(n_components=int(r))
    raise ValueError(f"unknown method {method!r}")


def fit_method(method: str, data: GroupedDataset, ranks, **fit_kw):
    x, y = data.stacked()
    return make_estimator(method, ranks, **fit_kw).fit(x, y)


def rer_curve(data: GroupedDataset, methods: Sequence[str], points: Sequence[Sequence[int]],
              vector_ranks: Sequence[int] | None = None, **fit_kw) -> list[CompressionRecord]:
    """Fit every method at every grid point; records sorted by CR.

    Vector methods use ``vector_ranks`` when given, otherwise the rank that
    matches each grid point's multilinear parameter budget.
    """
    if not methods:
        raise ValueError("at least one method is required")
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}")
    points = [tuple(int(r) for r in p) for p in points]
    check_grid(points, data.shape)
    x, _ = data.stacked()
    if vector_ranks is None:
        vector_ranks = sorted({matched_vector_rank(data.shape, p, data.n_samples) for p in points})
    records = []
    for method in methods:
        grid = points if method in ("mcca", "mpca") else [(r,) for r in vector_ranks]
        for p in grid:
            model = fit_method(method, data, p, **fit_kw)
            records.append(CompressionRecord.evaluate(method, model, x))
    order = {m: i for i, m in enumerate(methods)}
    return sorted(records, key=lambda r: (r.cr, order[r.method], r.ranks))


def curve(records: Sequence[CompressionRecord], method: str) -> tuple[np.ndarray, np.ndarray]:
    rows = sorted((r.cr, r.rer) for r in records if r.method == method)
    return np.array([c for c, _ in rows]), np.array([e for _, e in rows])


def interpolate_rer(records: Sequence[CompressionRecord], method: str, cr: float) -> float | None:
    """RER of ``method`` linearly interpolated at ``cr``; None outside its CR range."""
    xs, ys = curve(records, method)
    if xs.size == 0 or cr < xs[0] or cr > xs[-1]:
        return None
    return float(np.interp(cr, xs, ys))

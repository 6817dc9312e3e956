"""Dense tensor primitives: unfolding, folding, mode products, norms.

Tensors are plain :class:`numpy.ndarray` objects of dtype float64. Mode
indices are 0-based. The unfolding follows the classical index map in which
tensor element ``(p_1, ..., p_M)`` lands at column
``l = sum_{t != k} p_t * L_t`` with ``L_t = prod_{m < t, m != k} P_m``
(0-based), i.e. the remaining modes are enumerated first-index-fastest.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .exceptions import ShapeError


def as_tensor(t) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    if t.ndim < 1 or 0 in t.shape:
        raise ShapeError(f"tensor must have at least one mode and positive extents, got {t.shape}")
    return t


def _check_mode(k: int, ndim: int) -> int:
    if not isinstance(k, (int, np.integer)) or not 0 <= k < ndim:
        raise ShapeError(f"mode index {k!r} out of range for a {ndim}-mode tensor")
    return int(k)


def unfold(t, k: int) -> np.ndarray:
    """Mode-``k`` matricization, shape ``(P_k, prod_{j != k} P_j)``."""
    t = as_tensor(t)
    k = _check_mode(k, t.ndim)
    return np.reshape(np.moveaxis(t, k, 0), (t.shape[k], -1), order="F")


def fold(m, k: int, shape: Sequence[int]) -> np.ndarray:
    """Inverse of :func:`unfold` for a tensor of the given ``shape``."""
    m = np.asarray(m, dtype=np.float64)
    shape = tuple(int(s) for s in shape)
    k = _check_mode(k, len(shape))
    rest = shape[:k] + shape[k + 1:]
    if m.ndim != 2 or m.shape != (shape[k], int(np.prod(rest, dtype=np.int64))):
        raise ShapeError(f"matrix of shape {m.shape} cannot be folded into {shape} along mode {k}")
    full = np.reshape(m, (shape[k],) + rest, order="F")
    return np.moveaxis(full, 0, k)


def mode_product(t, a, k: int) -> np.ndarray:
    """The ``k``-mode product ``t x_k a``.

    The result replaces extent ``P_k`` with ``a.shape[0]``.
    """
    t = as_tensor(t)
    a = np.asarray(a, dtype=np.float64)
    k = _check_mode(k, t.ndim)
    if a.ndim != 2 or a.shape[1] != t.shape[k]:
        raise ShapeError(f"matrix of shape {a.shape} incompatible with mode {k} of extent {t.shape[k]}")
    return np.moveaxis(np.tensordot(a, t, axes=(1, k)), 0, k)


def multi_mode_product(t, matrices: Sequence, modes: Sequence[int] | None = None,
                       transpose: bool = False) -> np.ndarray:
    """Apply :func:`mode_product` over several modes (all modes by default)."""
    if modes is None:
        modes = range(len(matrices))
    for a, k in zip(matrices, modes):
        t = mode_product(t, a.T if transpose else a, k)
    return t


def batch_mode_product(x, matrices: Sequence, transpose: bool = False) -> np.ndarray:
    """Mode products over a stack of samples ``x`` of shape ``(N, P_1, ..., P_M)``.

    ``matrices[k]`` acts on sample mode ``k``; ``transpose`` multiplies by
    ``matrices[k].T`` instead.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != len(matrices) + 1:
        raise ShapeError(f"expected {len(matrices) + 1}-d sample stack, got shape {x.shape}")
    for k, a in enumerate(matrices):
        a = np.asarray(a, dtype=np.float64)
        if transpose:
            a = a.T
        if a.shape[1] != x.shape[k + 1]:
            raise ShapeError(f"matrix of shape {a.shape} incompatible with sample mode {k} of extent {x.shape[k + 1]}")
        x = np.moveaxis(np.tensordot(a, x, axes=(1, k + 1)), 0, k + 1)
    return x


def frobenius_norm(t) -> float:
    """Root of the sum of squared entries."""
    t = np.asarray(t, dtype=np.float64)
    return float(np.sqrt(np.sum(t * t)))


def kronecker(a, b) -> np.ndarray:
    """Kronecker product with ``a`` as the outer (leftmost) factor."""
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    return np.kron(a, b)


def kronecker_chain(matrices: Sequence) -> np.ndarray:
    """``matrices[0] (x) matrices[1] (x) ... (x) matrices[-1]``."""
    out = np.atleast_2d(np.asarray(matrices[0], dtype=np.float64))
    for m in matrices[1:]:
        out = kronecker(out, m)
    return out


def vectorize(t) -> np.ndarray:
    """Flatten with the last mode fastest.

    This is the vectorization under which ``kronecker_chain`` of per-mode
    matrices (mode 1 leftmost) acts as the corresponding mode products.
    """
    return np.asarray(t, dtype=np.float64).reshape(-1)

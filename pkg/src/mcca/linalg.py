"""Symmetric eigendecomposition by Jacobi rotations.

The rotations are applied in round-robin (tournament) order: each round
annihilates ``n // 2`` disjoint off-diagonal pairs at once, so a sweep of
``n - 1`` rounds touches every pair exactly once. Disjoint rotations commute,
which lets each round be one vectorized update.
"""
from __future__ import annotations

import numpy as np

from .exceptions import ConvergenceError, ShapeError

DEFAULT_TOL = 1e-12
MAX_SWEEPS = 60
# above this size "auto" hands off to LAPACK; a Jacobi sweep costs O(n^3)
# in Python-level rounds
JACOBI_MAX_DIM = 64


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(p, q), max(p, q)) for p, q in pairs if p < n and q < n]
        if pairs:
            p, q = np.array(pairs, dtype=np.intp).T
            rounds.append((p, q))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _off_norm(a: np.ndarray) -> float:
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(off * off)))


def jacobi_eigh(a, tol: float = DEFAULT_TOL, max_sweeps: int = MAX_SWEEPS) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and eigenvectors of a symmetric matrix (unsorted).

    Sweeps continue until the off-diagonal Frobenius norm falls to
    ``tol * ||a||_F``.
    """
    a = np.array(a, dtype=np.float64, copy=True)
    n = a.shape[0]
    v = np.eye(n)
    if n == 1:
        return a.diagonal().copy(), v
    scale = float(np.sqrt(np.sum(a * a)))
    if scale == 0.0:
        return np.zeros(n), v
    threshold = tol * scale
    rounds = _round_robin(n)
    for _ in range(max_sweeps):
        if _off_norm(a) <= threshold:
            return a.diagonal().copy(), v
        for p, q in rounds:
            apq = a[p, q]
            active = apq != 0.0
            if not active.any():
                continue
            if not active.all():
                p, q, apq = p[active], q[active], apq[active]
            with np.errstate(over="ignore", divide="ignore"):
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.hypot(1.0, tau))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c

            cols_p, cols_q = a[:, p], a[:, q]
            a[:, p] = c * cols_p - s * cols_q
            a[:, q] = s * cols_p + c * cols_q
            rows_p, rows_q = a[p, :], a[q, :]
            a[p, :] = c[:, None] * rows_p - s[:, None] * rows_q
            a[q, :] = s[:, None] * rows_p + c[:, None] * rows_q
            a[p, q] = 0.0
            a[q, p] = 0.0

            vp, vq = v[:, p], v[:, q]
            v[:, p] = c * vp - s * vq
            v[:, q] = s * vp + c * vq
    if _off_norm(a) <= threshold:
        return a.diagonal().copy(), v
    raise ConvergenceError(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps")


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip columns so each one's largest-magnitude entry is positive.

    Ties resolve to the first such entry.
    """
    vectors = np.array(vectors, dtype=np.float64, copy=True)
    if vectors.size == 0:
        return vectors
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def sym_eig(s, tol: float = DEFAULT_TOL, backend: str = "auto") -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix.

    Parameters
    ----------
    s : array_like, shape (n, n)
        Symmetric matrix with finite entries.
    tol : float
        Relative off-diagonal threshold for the Jacobi iteration.
    backend : {"auto", "jacobi", "lapack"}
        ``"lapack"`` delegates to :func:`numpy.linalg.eigh`. ``"auto"`` uses
        Jacobi up to ``JACOBI_MAX_DIM`` rows and LAPACK beyond.

    Returns
    -------
    values : ndarray, shape (n,)
        Eigenvalues in descending order (stable for ties).
    vectors : ndarray, shape (n, n)
        Orthonormal eigenvectors as columns, with the largest-magnitude entry
        of each column positive.
    """
    s = np.asarray(s, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {s.shape}")
    if not np.all(np.isfinite(s)):
        raise ValueError("matrix contains non-finite entries")
    if backend == "auto":
        backend = "jacobi" if s.shape[0] <= JACOBI_MAX_DIM else "lapack"
    if backend == "jacobi":
        values, vectors = jacobi_eigh(s, tol=tol)
    elif backend == "lapack":
        values, vectors = np.linalg.eigh(s)
    else:
        raise ValueError(f"unknown eigensolver backend {backend!r}")
    order = np.argsort(-values, kind="stable")
    return values[order], fix_signs(vectors[:, order])


def top_eigvecs(s, r: int, tol: float = DEFAULT_TOL, backend: str = "auto") -> tuple[np.ndarray, np.ndarray]:
    """Leading ``r`` eigenpairs ``(values, vectors)`` of a symmetric matrix."""
    values, vectors = sym_eig(s, tol=tol, backend=backend)
    return values[:r], vectors[:, :r]


def symmetrize(a: np.ndarray) -> np.ndarray:
    """Mirror the upper triangle so the result is exactly symmetric."""
    upper = np.triu(a)
    return upper + np.triu(a, 1).T


def principal_angles(a, b) -> np.ndarray:
    """Principal angles between the column spaces of orthonormal ``a`` and ``b``."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[0] != b.shape[0]:
        raise ShapeError(f"row dimensions differ: {a.shape} vs {b.shape}")
    if b.shape[1] > a.shape[1]:
        a, b = b, a
    cos = np.clip(np.linalg.svd(a.T @ b, compute_uv=False), 0.0, 1.0)
    # arccos loses all accuracy below ~1e-8, so small angles come from the sines
    sin = np.clip(np.sort(np.linalg.svd(b - a @ (a.T @ b), compute_uv=False)), 0.0, 1.0)
    return np.where(cos ** 2 < 0.5, np.arccos(cos), np.arcsin(sin))

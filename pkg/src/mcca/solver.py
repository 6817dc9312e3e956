"""Alternating eigendecomposition solver for multilinear common components.

Everything here works on :class:`~mcca.covariance.ModeCovariances` and a
list of per-mode bases ``V[k]`` of shape ``(P_k, R_k)`` with orthonormal
columns. Mode indices are 0-based.

The quantity being maximized is

    F(V) = sum_g prod_k tr(V_k^T S_gk V_k V_k^T S_gk V_k)

Viewed as a function of one mode it reads ``tr(V_k^T M(V_k) V_k)`` with
``M(V_k) = sum_g w_gk S_gk V_k V_k^T S_gk``; each update replaces ``V_k`` by
the leading eigenvectors of ``M`` evaluated at the current ``V_k``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .covariance import ModeCovariances
from .exceptions import ShapeError
from .linalg import DEFAULT_TOL, sym_eig, symmetrize

logger = logging.getLogger(__name__)

# relative eigengap below which the rank-R subspace is treated as ambiguous
_DEGENERATE_GAP = 1e-10


@dataclass(frozen=True)
class FitConfig:
    ranks: tuple
    tol: float = 1e-8
    max_iter: int = 100
    eig_tol: float = DEFAULT_TOL
    eig_backend: str = "auto"

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if int(self.max_iter) < 1:
            raise ValueError("max_iter must be at least 1")
        object.__setattr__(self, "ranks", tuple(int(r) for r in self.ranks))


@dataclass
class FitReport:
    """Diagnostics collected by :func:`fit`.

    ``objective_trace[0]`` is the objective at the initial bases and entry
    ``s`` the value after outer iteration ``s``. ``step_trace`` additionally
    records the value after every single-mode update. ``bounds[k]`` is the
    pair ``(alpha_k * f_max_k, f_max_k)`` bracketing the mode-wise maximum.
    """

    objective_trace: list = field(default_factory=list)
    step_trace: list = field(default_factory=list)
    alphas: list = field(default_factory=list)
    bounds: list = field(default_factory=list)
    converged: bool = False
    n_iter: int = 0

    @property
    def objective(self) -> float:
        return self.objective_trace[-1]

    def lower_bound_met(self, rtol: float = 1e-8) -> list[bool]:
        """Whether the attained objective clears ``alpha_k * f_max_k`` per mode."""
        f = self.objective
        return [f >= lo - rtol * abs(lo) for lo, _ in self.bounds]

    def upper_bound_met(self, rtol: float = 1e-8) -> list[bool]:
        f = self.objective
        return [f <= hi + rtol * abs(hi) for _, hi in self.bounds]


@dataclass
class MccaModel:
    """Fitted bases, latent covariances and per-mode contraction ratios."""

    bases: list
    latent: list
    alphas: list

    @property
    def ranks(self) -> tuple[int, ...]:
        return tuple(v.shape[1] for v in self.bases)


def check_ranks(ranks: Sequence[int], shape: Sequence[int]) -> tuple[int, ...]:
    ranks = tuple(int(r) for r in ranks)
    if len(ranks) != len(shape):
        raise ShapeError(f"got {len(ranks)} ranks for {len(shape)} modes")
    for k, (r, p) in enumerate(zip(ranks, shape)):
        if not 1 <= r <= p:
            raise ShapeError(f"rank {r} for mode {k} must lie in [1, {p}]")
    return ranks


def _warn_if_degenerate(values: np.ndarray, r: int, what: str) -> None:
    if r >= values.size:
        return
    scale = max(abs(values[0]), np.finfo(float).tiny)
    if values[r - 1] > 0 and values[r - 1] - values[r] <= _DEGENERATE_GAP * scale:
        logger.warning("%s: eigenvalues %d and %d coincide; the rank-%d subspace is not unique",
                       what, r, r + 1, r)


def _sq_norm(a: np.ndarray) -> float:
    return float(np.sum(a * a))


def init_weight_tilde(cov: ModeCovariances, k: int, ranks: Sequence[int], eig_tol: float = DEFAULT_TOL) -> np.ndarray:
    """Upper-bound weights ``prod_{j != k} sum_{i <= R_j} lambda_i(S_gj S_gj)``, one per group."""
    ranks = check_ranks(ranks, cov.shape)
    w = np.ones(cov.n_groups)
    for g in range(cov.n_groups):
        for j in range(cov.n_modes):
            if j == k:
                continue
            sq = np.sort(cov.eigenvalues(g, j, eig_tol) ** 2)[::-1]
            w[g] *= float(np.sum(sq[:ranks[j]]))
    return w


def tilde_m_matrix(cov: ModeCovariances, k: int, ranks: Sequence[int], eig_tol: float = DEFAULT_TOL) -> np.ndarray:
    w = init_weight_tilde(cov, k, ranks, eig_tol)
    p = cov.shape[k]
    m = np.zeros((p, p))
    for g in range(cov.n_groups):
        s = cov[g, k]
        m += w[g] * (s @ s)
    return symmetrize(m)


def init_basis(cov: ModeCovariances, k: int, ranks: Sequence[int], eig_tol: float = DEFAULT_TOL,
               backend: str = "auto") -> tuple[np.ndarray, float, float]:
    """Initial basis for mode ``k`` from the surrogate problem.

    Returns
    -------
    basis : ndarray, shape (P_k, R_k)
        Leading eigenvectors of ``sum_g w~_g S_gk S_gk``.
    f_max : float
        Sum of the leading ``R_k`` eigenvalues, the surrogate's maximum.
    alpha : float
        Contraction ratio ``f_max / trace``, in [0, 1].
    """
    ranks = check_ranks(ranks, cov.shape)
    r = ranks[k]
    m = tilde_m_matrix(cov, k, ranks, eig_tol)
    values, vectors = sym_eig(m, tol=eig_tol, backend=backend)
    _warn_if_degenerate(values, r, f"initialization of mode {k}")
    f_max = float(np.sum(values[:r]))
    total = float(np.trace(m))
    if total > 0:
        alpha = float(np.clip(f_max / total, 0.0, 1.0))
    else:
        # no variance in this mode: nothing is lost only when keeping every direction
        alpha = 1.0 if r == cov.shape[k] else 0.0
    return vectors[:, :r], f_max, alpha


def contraction_ratios(cov: ModeCovariances, ranks: Sequence[int], eig_tol: float = DEFAULT_TOL,
                       backend: str = "auto") -> np.ndarray:
    """Per-mode contraction ratios for the given ranks, without fitting."""
    return np.array([init_basis(cov, k, ranks, eig_tol, backend)[2] for k in range(cov.n_modes)])


def latent_covariance(v: np.ndarray, s: np.ndarray) -> np.ndarray:
    return symmetrize(v.T @ s @ v)


def latent_covariances(bases: Sequence[np.ndarray], cov: ModeCovariances) -> list[list[np.ndarray]]:
    return [[latent_covariance(bases[k], cov[g, k]) for k in range(cov.n_modes)] for g in range(cov.n_groups)]


def _factors(bases: Sequence[np.ndarray], cov: ModeCovariances) -> np.ndarray:
    # factor[g, k] = tr(V^T S V V^T S V) = ||V^T S V||_F^2
    return np.array([[_sq_norm(bases[k].T @ cov[g, k] @ bases[k]) for k in range(cov.n_modes)]
                     for g in range(cov.n_groups)])


def weight(bases: Sequence[np.ndarray], cov: ModeCovariances, g: int, k: int) -> float:
    """``w_g^(-k)``: product over the other modes of ``tr(V^T S V V^T S V)``."""
    out = 1.0
    for j in range(cov.n_modes):
        if j != k:
            out *= _sq_norm(bases[j].T @ cov[g, j] @ bases[j])
    return out


def m_matrix(bases: Sequence[np.ndarray], cov: ModeCovariances, k: int) -> np.ndarray:
    """``M(V_k) = sum_g w_g^(-k) S_gk V_k V_k^T S_gk``."""
    p = cov.shape[k]
    m = np.zeros((p, p))
    for g in range(cov.n_groups):
        sv = cov[g, k] @ bases[k]
        m += weight(bases, cov, g, k) * (sv @ sv.T)
    return symmetrize(m)


def objective_mode(bases: Sequence[np.ndarray], cov: ModeCovariances, k: int) -> float:
    """``f_k(V_k) = tr(V_k^T M(V_k) V_k)``."""
    v = bases[k]
    return float(np.trace(v.T @ m_matrix(bases, cov, k) @ v))


def objective_total(bases: Sequence[np.ndarray], cov: ModeCovariances) -> float:
    """``sum_g prod_k tr(V_k^T S_gk V_k V_k^T S_gk V_k)``."""
    return float(np.sum(np.prod(_factors(bases, cov), axis=1)))


def update_step(bases: Sequence[np.ndarray], cov: ModeCovariances, k: int, eig_tol: float = DEFAULT_TOL,
                backend: str = "auto") -> np.ndarray:
    """Leading ``R_k`` eigenvectors of ``M`` at the current bases."""
    r = bases[k].shape[1]
    values, vectors = sym_eig(m_matrix(bases, cov, k), tol=eig_tol, backend=backend)
    _warn_if_degenerate(values, r, f"update of mode {k}")
    return vectors[:, :r]


def _relative_change(new: float, old: float) -> float:
    if new == old:
        return 0.0
    return abs(new - old) / max(abs(old), np.finfo(float).tiny)


def fit(cov: ModeCovariances, config: FitConfig) -> tuple[MccaModel, FitReport]:
    """Initialize every mode, then cycle single-mode updates until the
    relative change of the objective over a full sweep drops below
    ``config.tol`` or ``config.max_iter`` sweeps have run."""
    ranks = check_ranks(config.ranks, cov.shape)
    report = FitReport()
    bases = []
    for k in range(cov.n_modes):
        v0, f_max, alpha = init_basis(cov, k, ranks, config.eig_tol, config.eig_backend)
        bases.append(v0)
        report.alphas.append(alpha)
        report.bounds.append((alpha * f_max, f_max))

    current = objective_total(bases, cov)
    report.objective_trace.append(current)
    report.step_trace.append(current)
    for it in range(1, int(config.max_iter) + 1):
        previous = current
        for k in range(cov.n_modes):
            bases[k] = update_step(bases, cov, k, config.eig_tol, config.eig_backend)
            report.step_trace.append(objective_total(bases, cov))
        current = report.step_trace[-1]
        report.objective_trace.append(current)
        report.n_iter = it
        if _relative_change(current, previous) < config.tol:
            report.converged = True
            break
    if not report.converged:
        logger.info("stopped after %d iterations without meeting tol=%g", report.n_iter, config.tol)

    model = MccaModel(bases=bases, latent=latent_covariances(bases, cov), alphas=list(report.alphas))
    return model, report

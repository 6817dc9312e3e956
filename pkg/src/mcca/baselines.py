"""Reference methods: PCA, CCA and MPCA.

PCA and MPCA treat all groups as one pooled dataset. CCA (common component
analysis) is the single-mode case of the multilinear solver applied to the
per-group covariances of vectorized samples.
"""
from __future__ import annotations

import numpy as np

from . import solver
from .covariance import GroupedDataset, ModeCovariances, mode_covariance
from .estimator import MultilinearProjection, VectorProjection, check_samples, expand_ranks
from .exceptions import ShapeError
from .linalg import DEFAULT_TOL, sym_eig
from .tensor import batch_mode_product

VECTOR_CAP = 4096


def _check_vector_rank(r, p: int, cap: int) -> int:
    if p > cap:
        raise ShapeError(f"vectorized dimension {p} exceeds the cap of {cap}")
    r = int(r)
    if not 1 <= r <= p:
        raise ShapeError(f"n_components={r} must lie in [1, {p}]")
    return r


class PCA(VectorProjection):
    """Principal components of the pooled, vectorized samples.

    ``components_`` has shape ``(prod P_k, n_components)``; the sample
    covariance uses the 1/N convention.
    """

    def __init__(self, n_components=1, eig_tol=DEFAULT_TOL, eig_backend="auto", cap=VECTOR_CAP):
        self.n_components = n_components
        self.eig_tol = eig_tol
        self.eig_backend = eig_backend
        self.cap = cap

    def fit(self, X, y=None):
        X = check_samples(X)
        flat = X.reshape(X.shape[0], -1)
        r = _check_vector_rank(self.n_components, flat.shape[1], self.cap)
        values, vectors = sym_eig(mode_covariance(flat, 0), tol=self.eig_tol, backend=self.eig_backend)
        self.components_ = vectors[:, :r]
        self.explained_variance_ = values[:r]
        self.latent_covariances_ = [[np.diag(values[:r])]]
        self.sample_shape_ = X.shape[1:]
        self.n_samples_fit_ = X.shape[0]
        return self


class CCA(VectorProjection):
    """Common component analysis on vectorized samples.

    One orthonormal basis ``V`` shared by all groups, maximizing
    ``sum_g tr(V^T S_g V V^T S_g V)``. Solved by the multilinear solver with a
    single mode, so the same initialization and monotone updates apply.
    """

    def __init__(self, n_components=1, tol=1e-8, max_iter=100, eig_tol=DEFAULT_TOL, eig_backend="auto",
                 cap=VECTOR_CAP):
        self.n_components = n_components
        self.tol = tol
        self.max_iter = max_iter
        self.eig_tol = eig_tol
        self.eig_backend = eig_backend
        self.cap = cap

    def fit(self, X, y=None):
        X = check_samples(X)
        data = GroupedDataset.from_labels(X.reshape(X.shape[0], -1), y)
        r = _check_vector_rank(self.n_components, data.shape[0], self.cap)
        cov = ModeCovariances.from_dataset(data)
        config = solver.FitConfig(ranks=(r,), tol=self.tol, max_iter=self.max_iter, eig_tol=self.eig_tol,
                                  eig_backend=self.eig_backend)
        model, report = solver.fit(cov, config)
        self.components_ = model.bases[0]
        self.latent_covariances_ = model.latent
        self.contraction_ratio_ = model.alphas[0]
        self.report_ = report
        self.n_iter_ = report.n_iter
        self.converged_ = report.converged
        self.objective_ = report.objective
        self.groups_ = data.labels
        self.sample_shape_ = X.shape[1:]
        self.n_samples_fit_ = X.shape[0]
        return self


class MPCA(MultilinearProjection):
    """Multilinear PCA by alternating partial projections.

    Each mode's basis starts as the leading eigenvectors of its full scatter
    (the other modes left unprojected). Sweeps then set ``U_k`` to the leading
    eigenvectors of ``sum_i Y_i Y_i^T`` where ``Y_i`` is the mode-``k``
    unfolding of sample ``i`` projected on every other mode's basis. The total
    projected scatter never decreases.

    Parameters
    ----------
    ranks : int or sequence of int
    tol : float, default=1e-8
        Relative change of the total projected scatter that ends the sweeps.
    max_iter : int, default=100
    center : bool, default=True
        Subtract the pooled mean before computing scatters.
    """

    def __init__(self, ranks=1, tol=1e-8, max_iter=100, center=True, eig_tol=DEFAULT_TOL, eig_backend="auto"):
        self.ranks = ranks
        self.tol = tol
        self.max_iter = max_iter
        self.center = center
        self.eig_tol = eig_tol
        self.eig_backend = eig_backend

    def _scatter(self, X, bases, k):
        others = [b if j != k else np.eye(X.shape[k + 1]) for j, b in enumerate(bases)]
        proj = batch_mode_product(X, others, transpose=True)
        d = np.moveaxis(proj, k + 1, 0).reshape(X.shape[k + 1], -1)
        return d @ d.T

    def fit(self, X, y=None):
        X = check_samples(X)
        shape = X.shape[1:]
        ranks = expand_ranks(self.ranks, shape)
        Xc = X - X.mean(axis=0) if self.center else X
        m = len(shape)

        bases = []
        for k in range(m):
            d = np.moveaxis(Xc, k + 1, 0).reshape(shape[k], -1)
            bases.append(sym_eig(d @ d.T, tol=self.eig_tol, backend=self.eig_backend)[1][:, :ranks[k]])

        scatter = float(np.sum(batch_mode_product(Xc, bases, transpose=True) ** 2))
        trace = [scatter]
        self.converged_ = False
        self.n_iter_ = 0
        for it in range(1, int(self.max_iter) + 1):
            previous = scatter
            for k in range(m):
                bases[k] = sym_eig(self._scatter(Xc, bases, k), tol=self.eig_tol,
                                   backend=self.eig_backend)[1][:, :ranks[k]]
            scatter = float(np.sum(batch_mode_product(Xc, bases, transpose=True) ** 2))
            trace.append(scatter)
            self.n_iter_ = it
            if scatter == previous or abs(scatter - previous) < self.tol * max(abs(previous), np.finfo(float).tiny):
                self.converged_ = True
                break

        self.components_ = bases
        self.scatter_trace_ = trace
        self.latent_covariances_ = [[solver.latent_covariance(u, mode_covariance(X, k)) for k, u in enumerate(bases)]]
        self.sample_shape_ = shape
        self.n_samples_fit_ = X.shape[0]
        return self

"""Scikit-learn compatible estimator for multilinear common components."""
from __future__ import annotations

from numbers import Integral

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import solver
from .covariance import GroupedDataset, ModeCovariances
from .exceptions import ShapeError
from .linalg import DEFAULT_TOL
from .tensor import batch_mode_product


def check_samples(x, sample_shape=None) -> np.ndarray:
    """Validate a stack of tensor samples ``(N, P_1, ..., P_M)``."""
    x = check_array(x, allow_nd=True, dtype=np.float64, ensure_2d=True)
    if sample_shape is not None and x.shape[1:] != tuple(sample_shape):
        raise ShapeError(f"samples have shape {x.shape[1:]}, model expects {tuple(sample_shape)}")
    return x


def expand_ranks(ranks, shape) -> tuple[int, ...]:
    if isinstance(ranks, Integral):
        ranks = (int(ranks),) * len(shape)
    return solver.check_ranks(ranks, shape)


class MultilinearProjection(TransformerMixin, BaseEstimator):
    """Shared transform logic for models with one orthonormal basis per mode.

    Subclasses set ``components_`` (list of ``(P_k, R_k)`` arrays) and
    ``sample_shape_`` during fit.
    """

    def transform(self, X):
        """Project samples onto the core space, shape ``(N, R_1, ..., R_M)``."""
        check_is_fitted(self, "components_")
        X = check_samples(X, self.sample_shape_)
        return batch_mode_product(X, self.components_, transpose=True)

    def inverse_transform(self, Z):
        check_is_fitted(self, "components_")
        Z = np.asarray(Z, dtype=np.float64)
        return batch_mode_product(Z, self.components_)

    def reconstruct(self, X):
        """Orthogonal projection ``X x_1 V_1 V_1^T ... x_M V_M V_M^T``."""
        return self.inverse_transform(self.transform(X))

    @property
    def ranks_(self) -> tuple[int, ...]:
        check_is_fitted(self, "components_")
        return tuple(v.shape[1] for v in self.components_)


class VectorProjection(TransformerMixin, BaseEstimator):
    """Shared transform logic for models acting on vectorized samples.

    Samples are flattened with the last mode fastest; ``components_`` has
    shape ``(prod P_k, R)``.
    """

    def transform(self, X):
        check_is_fitted(self, "components_")
        X = check_samples(X, self.sample_shape_)
        return X.reshape(X.shape[0], -1) @ self.components_

    def inverse_transform(self, Z):
        check_is_fitted(self, "components_")
        Z = np.asarray(Z, dtype=np.float64)
        return (Z @ self.components_.T).reshape((Z.shape[0],) + tuple(self.sample_shape_))

    def reconstruct(self, X):
        return self.inverse_transform(self.transform(X))

    @property
    def ranks_(self) -> tuple[int, ...]:
        check_is_fitted(self, "components_")
        return (self.components_.shape[1],)


class MCCA(MultilinearProjection):
    """Multilinear common component analysis.

    Finds one orthonormal basis per tensor mode, shared by every group, such
    that each group's mode-wise covariances are well approximated in it.

    Parameters
    ----------
    ranks : int or sequence of int
        Number of components per mode; an int applies to every mode.
    tol : float, default=1e-8
        Stop when the relative objective change over one sweep is below this.
    max_iter : int, default=100
    eig_tol : float, default=1e-12
        Relative off-diagonal threshold of the Jacobi eigensolver.
    eig_backend : {"auto", "jacobi", "lapack"}, default="auto"

    Attributes
    ----------
    components_ : list of ndarray
        Basis ``V_k`` of shape ``(P_k, R_k)`` per mode.
    latent_covariances_ : list of list of ndarray
        ``latent_covariances_[g][k] = V_k^T S_gk V_k``.
    contraction_ratios_ : ndarray of shape (M,)
    report_ : FitReport
    n_iter_ : int
    converged_ : bool
    objective_ : float
    groups_ : tuple
        Group labels in fitting order.
    n_samples_fit_ : int
    sample_shape_ : tuple of int

    Examples
    --------
    >>> import numpy as np
    >>> rng = np.random.default_rng(0)
    >>> X = rng.standard_normal((40, 6, 5))
    >>> y = np.repeat([0, 1], 20)
    >>> model = MCCA(ranks=(3, 2)).fit(X, y)
    >>> model.transform(X).shape
    (40, 3, 2)
    """

    def __init__(self, ranks=1, tol=1e-8, max_iter=100, eig_tol=DEFAULT_TOL, eig_backend="auto"):
        self.ranks = ranks
        self.tol = tol
        self.max_iter = max_iter
        self.eig_tol = eig_tol
        self.eig_backend = eig_backend

    def fit(self, X, y=None):
        """Fit on samples ``X`` of shape ``(N, P_1, ..., P_M)``; ``y`` holds group labels.

        Without ``y`` all samples form a single group.
        """
        X = check_samples(X)
        data = GroupedDataset.from_labels(X, y)
        return self._fit_covariances(ModeCovariances.from_dataset(data), data.labels, data.n_samples)

    def fit_grouped(self, data: GroupedDataset):
        return self._fit_covariances(ModeCovariances.from_dataset(data), data.labels, data.n_samples)

    def fit_covariances(self, cov: ModeCovariances, n_samples: int | None = None):
        """Fit directly from precomputed mode-wise covariances."""
        if n_samples is None:
            n_samples = sum(cov.n_samples) if cov.n_samples else 0
        return self._fit_covariances(cov, tuple(range(cov.n_groups)), n_samples)

    def _fit_covariances(self, cov, labels, n_samples):
        config = solver.FitConfig(
            ranks=expand_ranks(self.ranks, cov.shape),
            tol=self.tol,
            max_iter=self.max_iter,
            eig_tol=self.eig_tol,
            eig_backend=self.eig_backend,
        )
        model, report = solver.fit(cov, config)
        self.components_ = model.bases
        self.latent_covariances_ = model.latent
        self.contraction_ratios_ = np.asarray(model.alphas)
        self.report_ = report
        self.n_iter_ = report.n_iter
        self.converged_ = report.converged
        self.objective_ = report.objective
        self.groups_ = tuple(labels)
        self.n_samples_fit_ = int(n_samples)
        self.sample_shape_ = tuple(cov.shape)
        return self

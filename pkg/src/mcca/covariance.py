"""Grouped tensor datasets and their mode-wise sample covariances."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import ShapeError
from .linalg import sym_eig, symmetrize
from .tensor import kronecker_chain

FULL_COVARIANCE_CAP = 4096


@dataclass(frozen=True)
class GroupedDataset:
    """G groups of equally shaped tensor samples.

    Each entry of ``groups`` is an array of shape ``(N_g, P_1, ..., P_M)``.
    """

    groups: tuple
    labels: tuple = ()

    def __post_init__(self):
        groups = tuple(np.asarray(g, dtype=np.float64) for g in self.groups)
        if not groups:
            raise ShapeError("a grouped dataset needs at least one group")
        shape = groups[0].shape[1:]
        if len(shape) < 1:
            raise ShapeError("samples must have at least one mode")
        for g, x in enumerate(groups):
            if x.shape[0] < 1:
                raise ShapeError(f"group {g} is empty")
            if x.shape[1:] != shape:
                raise ShapeError(f"group {g} has sample shape {x.shape[1:]}, expected {shape}")
        labels = tuple(self.labels) if self.labels else tuple(range(len(groups)))
        if len(labels) != len(groups):
            raise ShapeError("one label per group required")
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_labels(cls, x, y=None) -> "GroupedDataset":
        """Split a sample stack by group label, keeping first-seen label order."""
        x = np.asarray(x, dtype=np.float64)
        if y is None:
            return cls((x,))
        y = np.asarray(y)
        if y.shape != (x.shape[0],):
            raise ShapeError(f"expected {x.shape[0]} group labels, got shape {y.shape}")
        _, first = np.unique(y, return_index=True)
        labels = [y[i] for i in np.sort(first)]
        return cls(tuple(x[y == lab] for lab in labels), tuple(labels))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.groups[0].shape[1:]

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    @property
    def n_samples(self) -> int:
        return sum(g.shape[0] for g in self.groups)

    def stacked(self) -> tuple[np.ndarray, np.ndarray]:
        """All samples concatenated in group order, with group indices."""
        x = np.concatenate(self.groups, axis=0)
        y = np.repeat(np.arange(self.n_groups), [g.shape[0] for g in self.groups])
        return x, y


def mean_tensor(group) -> np.ndarray:
    """Elementwise mean of a sample stack ``(N, P_1, ..., P_M)``."""
    group = np.asarray(group, dtype=np.float64)
    if group.ndim < 1 or group.shape[0] == 0:
        raise ShapeError("cannot average an empty group")
    return group.mean(axis=0)


def mode_covariance(group, k: int) -> np.ndarray:
    """Mode-``k`` sample covariance of one group.

    ``(1 / (N prod_{j != k} P_j)) sum_i D_i D_i^T`` where ``D_i`` is the
    mode-``k`` unfolding of the centered sample ``i``. The 1/N convention is
    used (no bias correction).
    """
    group = np.asarray(group, dtype=np.float64)
    if group.ndim < 2 or group.shape[0] == 0:
        raise ShapeError("cannot compute a covariance of an empty group")
    m = group.ndim - 1
    if not isinstance(k, (int, np.integer)) or not 0 <= k < m:
        raise ShapeError(f"mode index {k!r} out of range for {m}-mode samples")
    n = group.shape[0]
    centered = group - group.mean(axis=0)
    # rows index mode k; columns run over samples and all other modes
    d = np.moveaxis(centered, k + 1, 0).reshape(group.shape[k + 1], -1)
    others = centered[0].size // group.shape[k + 1]
    return symmetrize(d @ d.T) / (n * others)


@dataclass(frozen=True)
class ModeCovariances:
    """Per-group, per-mode covariance matrices ``matrices[g][k]``."""

    matrices: tuple
    n_samples: tuple = ()
    _eig_cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        mats = tuple(tuple(symmetrize(np.asarray(s, dtype=np.float64)) for s in row) for row in self.matrices)
        if not mats or not mats[0]:
            raise ShapeError("need at least one group and one mode")
        shape = tuple(s.shape[0] for s in mats[0])
        for g, row in enumerate(mats):
            if tuple(s.shape for s in row) != tuple((p, p) for p in shape):
                raise ShapeError(f"group {g} covariance shapes do not match {shape}")
            for s in row:
                if not np.all(np.isfinite(s)):
                    raise ValueError(f"group {g} has a non-finite covariance entry")
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "n_samples", tuple(self.n_samples))

    @classmethod
    def from_dataset(cls, data: GroupedDataset) -> "ModeCovariances":
        m = len(data.shape)
        mats = tuple(tuple(mode_covariance(x, k) for k in range(m)) for x in data.groups)
        return cls(mats, tuple(x.shape[0] for x in data.groups))

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(s.shape[0] for s in self.matrices[0])

    @property
    def n_groups(self) -> int:
        return len(self.matrices)

    @property
    def n_modes(self) -> int:
        return len(self.matrices[0])

    def __getitem__(self, gk: tuple[int, int]) -> np.ndarray:
        g, k = gk
        return self.matrices[g][k]

    def eigenvalues(self, g: int, k: int, tol: float = 1e-12) -> np.ndarray:
        """Descending eigenvalues of ``S_(g)^(k)``, computed once."""
        key = (g, k, tol)
        if key not in self._eig_cache:
            self._eig_cache[key] = sym_eig(self.matrices[g][k], tol=tol)[0]
        return self._eig_cache[key]


def mode_covariances(data: GroupedDataset) -> ModeCovariances:
    return ModeCovariances.from_dataset(data)


def full_covariance(cov: ModeCovariances, g: int, cap: int = FULL_COVARIANCE_CAP) -> np.ndarray:
    """Kronecker covariance ``S^(1) (x) ... (x) S^(M)`` of group ``g``."""
    size = int(np.prod(cov.shape, dtype=np.int64))
    if size > cap:
        raise ShapeError(f"full covariance of size {size} exceeds the cap of {cap}")
    return symmetrize(kronecker_chain(cov.matrices[g]))

"""Seeded synthetic grouped tensor data with a planted common structure.

Every group shares the per-mode bases ``V_k`` but draws its cores from its
own mode-wise latent covariances, so sample ``i`` of group ``g`` is::

    X = (Z x_1 L_g1 ... x_M L_gM) x_1 V_1 ... x_M V_M + noise * E

with ``Z`` and ``E`` standard normal and ``L_gk L_gk^T = Lambda_gk``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .covariance import GroupedDataset
from .ingest import MANIFEST_VERSION
from .linalg import fix_signs
from .serialization import save_tensor
from .solver import check_ranks
from .tensor import batch_mode_product


@dataclass
class SyntheticData:
    dataset: GroupedDataset
    bases: list
    latent: list


def random_orthonormal(rng: np.random.Generator, p: int, r: int) -> np.ndarray:
    q, _ = np.linalg.qr(rng.standard_normal((p, r)))
    return fix_signs(q)


def make_grouped_tensors(shape: Sequence[int], ranks: Sequence[int], n_groups: int, n_per_group: int,
                         noise: float = 0.1, decay: float = 0.5, seed: int = 0) -> SyntheticData:
    """Draw a grouped dataset conforming to a shared-basis model.

    Latent spectra decay as ``exp(-decay * i)`` with a random per-group
    multiplicative jitter in [0.5, 1.5]; latent eigenvectors are random per
    group, so groups differ in how they use the common subspace.
    """
    shape = tuple(int(p) for p in shape)
    ranks = check_ranks(ranks, shape)
    rng = np.random.default_rng(seed)
    bases = [random_orthonormal(rng, p, r) for p, r in zip(shape, ranks)]
    groups, latent = [], []
    for _ in range(int(n_groups)):
        roots, covs = [], []
        for r in ranks:
            spectrum = np.exp(-decay * np.arange(r)) * rng.uniform(0.5, 1.5, size=r)
            q = random_orthonormal(rng, r, r)
            roots.append(q * np.sqrt(spectrum))
            covs.append(q @ np.diag(spectrum) @ q.T)
        z = rng.standard_normal((int(n_per_group),) + ranks)
        cores = batch_mode_product(z, roots)
        x = batch_mode_product(cores, bases)
        x = x + noise * rng.standard_normal(x.shape)
        groups.append(x)
        latent.append(covs)
    return SyntheticData(GroupedDataset(tuple(groups)), bases, latent)


def write_synthetic(out_dir, data: SyntheticData) -> Path:
    """Write one stacked MCTN1 file per group, the planted bases and a manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for g, x in enumerate(data.dataset.groups):
        name = f"group_{g:03d}.mctn"
        save_tensor(out / name, np.moveaxis(x, 0, -1))
        entries.append({"label": str(data.dataset.labels[g]), "files": [name], "stacked": True})
    for k, v in enumerate(data.bases):
        save_tensor(out / f"basis_{k}.mctn", v)
    manifest = {"version": MANIFEST_VERSION, "root": ".", "downsample": 1, "channels": "keep", "groups": entries}
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path

"""Reconstruction error, compression accounting and subspace utilities."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .covariance import GroupedDataset
from .exceptions import ShapeError
from .linalg import principal_angles, symmetrize

MULTILINEAR_METHODS = ("mcca", "mpca")
VECTOR_METHODS = ("cca", "pca")
CSV_HEADER = ("method", "ranks", "params", "cr", "rer")

__all__ = [
    "CompressionRecord", "compression_ratio", "model_param_count", "param_count", "principal_angles",
    "read_records_csv", "reconstruct", "rer", "residual", "write_records_csv",
]


def reconstruct(model, sample) -> np.ndarray:
    """Project one sample (or a stack of samples) onto a fitted model's subspace."""
    x = np.asarray(sample, dtype=np.float64)
    shape = tuple(model.sample_shape_)
    if x.shape == shape:
        return model.reconstruct(x[None])[0]
    if x.shape[1:] == shape:
        return model.reconstruct(x)
    raise ShapeError(f"sample shape {x.shape} does not match model shape {shape}")


def _stack(data) -> np.ndarray:
    if isinstance(data, GroupedDataset):
        return data.stacked()[0]
    return np.asarray(data, dtype=np.float64)


def rer(data, model) -> float:
    """Reconstruction error rate ``||X - X~||^2 / ||X||^2`` over all samples pooled."""
    x = _stack(data)
    denom = float(np.sum(x * x))
    if denom == 0.0:
        raise ValueError("reconstruction error rate is undefined for an all-zero dataset")
    diff = x - reconstruct(model, x)
    return float(np.sum(diff * diff)) / denom


def _rank_tuple(ranks) -> tuple[int, ...]:
    if np.isscalar(ranks):
        return (int(ranks),)
    return tuple(int(r) for r in ranks)


def param_count(method: str, shape: Sequence[int], ranks, n_samples: int) -> int:
    """Stored parameters: bases plus the latent codes of all ``n_samples``.

    Multilinear methods: ``sum_k P_k R_k + N prod_k R_k``.
    Vector methods: ``R prod_k P_k + N R``.
    """
    shape = tuple(int(p) for p in shape)
    ranks = _rank_tuple(ranks)
    n = int(n_samples)
    if method in MULTILINEAR_METHODS:
        if len(ranks) != len(shape):
            raise ShapeError(f"{method} needs one rank per mode")
        return sum(p * r for p, r in zip(shape, ranks)) + n * int(np.prod(ranks, dtype=np.int64))
    if method in VECTOR_METHODS:
        if len(ranks) != 1:
            raise ShapeError(f"{method} takes a single rank")
        return ranks[0] * int(np.prod(shape, dtype=np.int64)) + n * ranks[0]
    raise ValueError(f"unknown method {method!r}")


def compression_ratio(method: str, shape: Sequence[int], ranks, n_samples: int) -> float:
    """``param_count / (N prod_k P_k)``; exceeds 1 when the model stores more than the raw data."""
    raw = int(n_samples) * int(np.prod(shape, dtype=np.int64))
    return param_count(method, shape, ranks, n_samples) / raw


def model_param_count(bases: Iterable[np.ndarray], n_samples: int) -> int:
    """Parameter census from stored bases: every basis entry plus one code per core cell per sample."""
    bases = list(bases)
    core = int(np.prod([b.shape[1] for b in bases], dtype=np.int64))
    return sum(int(b.size) for b in bases) + int(n_samples) * core


def residual(s, v, lam) -> np.ndarray:
    """Error matrix ``S - V Lambda V^T``."""
    s = np.asarray(s, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    lam = np.asarray(lam, dtype=np.float64)
    if s.shape != (v.shape[0], v.shape[0]) or lam.shape != (v.shape[1], v.shape[1]):
        raise ShapeError(f"incompatible shapes S{s.shape}, V{v.shape}, Lambda{lam.shape}")
    return symmetrize(s - v @ lam @ v.T)


@dataclass(frozen=True)
class CompressionRecord:
    method: str
    ranks: tuple
    params: int
    cr: float
    rer: float

    @classmethod
    def evaluate(cls, method: str, model, data) -> "CompressionRecord":
        x = _stack(data)
        ranks = tuple(model.ranks_)
        shape = x.shape[1:]
        return cls(method, ranks, param_count(method, shape, ranks, x.shape[0]),
                   compression_ratio(method, shape, ranks, x.shape[0]), rer(x, model))


def _fmt(value: float) -> str:
    return format(value, ".17g")


def write_records_csv(records: Iterable[CompressionRecord], fh=None) -> str | None:
    """Write ``method,ranks,params,cr,rer`` rows; returns the text if ``fh`` is None."""
    out = io.StringIO() if fh is None else fh
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rec in records:
        writer.writerow([rec.method, "x".join(str(r) for r in rec.ranks), rec.params, _fmt(rec.cr), _fmt(rec.rer)])
    return out.getvalue() if fh is None else None


def read_records_csv(fh) -> list[CompressionRecord]:
    if isinstance(fh, str):
        fh = io.StringIO(fh)
    reader = csv.reader(fh)
    header = next(reader)
    if tuple(header) != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {header}")
    return [
        CompressionRecord(m, tuple(int(r) for r in ranks.split("x")), int(params), float(cr), float(e))
        for m, ranks, params, cr, e in reader
    ]

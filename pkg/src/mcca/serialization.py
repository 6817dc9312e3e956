"""Binary containers for tensors (``MCTN1``) and fitted models (``MCCA1``).

All integers and floats are little-endian; matrices and tensors are stored
first-index-fastest (column-major).

MCTN1 layout::

    b"MCTN1" | u32 M | u32 extent * M | f64 data * prod(extents)

MCCA1 layout::

    b"MCCA1" | u8 method | u32 M | u32 G | u64 N | u32 extent * M
    | u32 n_ranks | u32 rank * n_ranks
    | bases | latent covariances (group-major, then mode)

Multilinear methods (mcca, mpca) store one basis ``(P_k, R_k)`` and one latent
covariance ``(R_k, R_k)`` per mode. Vector methods (cca, pca) store a single
basis ``(prod P_k, R)`` and one ``(R, R)`` latent covariance per group.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .exceptions import FormatError

TENSOR_MAGIC = b"MCTN1"
MODEL_MAGIC = b"MCCA1"
METHOD_CODES = {"mcca": 0, "mpca": 1, "cca": 2, "pca": 3}
METHOD_NAMES = {v: k for k, v in METHOD_CODES.items()}


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise FormatError(f"truncated container: need {n} bytes at offset {self.pos}")
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack("<" + fmt, self.take(struct.calcsize("<" + fmt)))

    def array(self, shape) -> np.ndarray:
        count = int(np.prod(shape, dtype=np.int64))
        data = np.frombuffer(self.take(8 * count), dtype="<f8")
        return data.reshape(shape, order="F").astype(np.float64)


def _f64_bytes(a: np.ndarray) -> bytes:
    return np.asarray(a, dtype="<f8").tobytes(order="F")


def tensor_to_bytes(t) -> bytes:
    t = np.asarray(t, dtype=np.float64)
    head = TENSOR_MAGIC + struct.pack("<I", t.ndim) + struct.pack(f"<{t.ndim}I", *t.shape)
    return head + _f64_bytes(t)


def tensor_from_bytes(buf: bytes) -> np.ndarray:
    r = _Reader(buf)
    if r.take(5) != TENSOR_MAGIC:
        raise FormatError("not an MCTN1 tensor container")
    (m,) = r.unpack("I")
    shape = r.unpack(f"{m}I")
    out = r.array(shape)
    if r.pos != len(buf):
        raise FormatError("trailing bytes after tensor payload")
    return out


def save_tensor(path, t) -> None:
    Path(path).write_bytes(tensor_to_bytes(t))


def load_tensor(path) -> np.ndarray:
    return tensor_from_bytes(Path(path).read_bytes())


def _method_of(model) -> str:
    from .baselines import CCA, MPCA, PCA
    from .estimator import MCCA

    for cls, name in ((MCCA, "mcca"), (MPCA, "mpca"), (CCA, "cca"), (PCA, "pca")):
        if isinstance(model, cls):
            return name
    raise TypeError(f"cannot serialize {type(model).__name__}")


def model_to_bytes(model) -> bytes:
    method = _method_of(model)
    shape = tuple(model.sample_shape_)
    latent = model.latent_covariances_
    bases = list(model.components_) if method in ("mcca", "mpca") else [model.components_]
    ranks = [b.shape[1] for b in bases]
    parts = [
        MODEL_MAGIC,
        struct.pack("<BIIQ", METHOD_CODES[method], len(shape), len(latent), int(model.n_samples_fit_)),
        struct.pack(f"<{len(shape)}I", *shape),
        struct.pack("<I", len(ranks)),
        struct.pack(f"<{len(ranks)}I", *ranks),
    ]
    parts += [_f64_bytes(b) for b in bases]
    parts += [_f64_bytes(lam) for row in latent for lam in row]
    return b"".join(parts)


def model_from_bytes(buf: bytes):
    """Rebuild a fitted estimator (transform-ready) from an MCCA1 container."""
    from .baselines import CCA, MPCA, PCA
    from .estimator import MCCA

    r = _Reader(buf)
    if r.take(5) != MODEL_MAGIC:
        raise FormatError("not an MCCA1 model container")
    code, m, g, n = r.unpack("BIIQ")
    if code not in METHOD_NAMES:
        raise FormatError(f"unknown method code {code}")
    method = METHOD_NAMES[code]
    shape = r.unpack(f"{m}I")
    (n_ranks,) = r.unpack("I")
    ranks = r.unpack(f"{n_ranks}I")
    if method in ("mcca", "mpca"):
        if n_ranks != m:
            raise FormatError("multilinear model needs one rank per mode")
        bases = [r.array((p, k)) for p, k in zip(shape, ranks)]
        latent = [[r.array((k, k)) for k in ranks] for _ in range(g)]
    else:
        if n_ranks != 1:
            raise FormatError("vector model needs exactly one rank")
        bases = r.array((int(np.prod(shape, dtype=np.int64)), ranks[0]))
        latent = [[r.array((ranks[0], ranks[0]))] for _ in range(g)]
    if r.pos != len(buf):
        raise FormatError("trailing bytes after model payload")

    model = {"mcca": MCCA, "mpca": MPCA, "cca": CCA, "pca": PCA}[method]()
    if method in ("mcca", "mpca"):
        model.ranks = tuple(ranks)
    else:
        model.n_components = ranks[0]
    model.components_ = bases
    model.latent_covariances_ = latent
    model.sample_shape_ = tuple(shape)
    model.n_samples_fit_ = int(n)
    return model


def save_model(path, model) -> None:
    Path(path).write_bytes(model_to_bytes(model))


def load_model(path):
    return model_from_bytes(Path(path).read_bytes())


def method_name(model) -> str:
    return _method_of(model)

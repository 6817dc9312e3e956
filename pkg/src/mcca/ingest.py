"""Dataset loaders: IDX (MNIST), binary PGM/PPM, MCTN1, and manifests.

A manifest is a JSON document (format version 1)::

    {
      "version": 1,
      "root": "data",                 # relative to the manifest's directory
      "downsample": 2,                # mean-pooling factor on modes 1 and 2
      "channels": "keep",             # or "grayscale-average"
      "transpose": false,             # swap modes 1 and 2 after loading
      "groups": [
        {"label": "s1", "files": ["s1/*.pgm"], "exclude": ["s1/10.pgm"], "limit": 10},
        {"label": "g0", "files": ["g0.mctn"], "stacked": true},
        {"label": "3", "idx_images": "train-images-idx3-ubyte",
         "idx_labels": "train-labels-idx1-ubyte", "class": 3, "limit": 10}
      ]
    }

File patterns are globbed relative to ``root`` and sorted lexicographically.
A ``stacked`` MCTN1 file holds a whole group with samples along its last mode.
Pixel values are kept as raw reals (0-255 for 8-bit images).
"""
from __future__ import annotations

import json
import re
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .covariance import GroupedDataset
from .exceptions import FormatError, ShapeError
from .serialization import load_tensor

MANIFEST_VERSION = 1

_IDX_TYPES = {
    0x08: np.dtype("u1"),
    0x09: np.dtype("i1"),
    0x0B: np.dtype(">i2"),
    0x0C: np.dtype(">i4"),
    0x0D: np.dtype(">f4"),
    0x0E: np.dtype(">f8"),
}


class ManifestError(ValueError):
    pass


def read_idx(path) -> np.ndarray:
    """Whole IDX file as an array with the header's dimensions."""
    buf = Path(path).read_bytes()
    if len(buf) < 4 or buf[0] != 0 or buf[1] != 0:
        raise FormatError(f"{path}: bad IDX magic")
    code, ndim = buf[2], buf[3]
    if code not in _IDX_TYPES:
        raise FormatError(f"{path}: unsupported IDX element type 0x{code:02x}")
    if ndim < 1 or len(buf) < 4 + 4 * ndim:
        raise FormatError(f"{path}: truncated IDX header")
    dims = struct.unpack(f">{ndim}I", buf[4:4 + 4 * ndim])
    dtype = _IDX_TYPES[code]
    expected = int(np.prod(dims, dtype=np.int64)) * dtype.itemsize
    payload = buf[4 + 4 * ndim:]
    if len(payload) != expected:
        raise FormatError(f"{path}: IDX payload has {len(payload)} bytes, header implies {expected}")
    return np.frombuffer(payload, dtype=dtype).reshape(dims)


def load_idx(path) -> list[np.ndarray]:
    """One float64 tensor per record of an IDX file (e.g. one 28x28 image each)."""
    return [np.asarray(a, dtype=np.float64) for a in read_idx(path)]


_PNM_TOKEN = re.compile(rb"\s*(?:#[^\n\r]*[\n\r]\s*)*(\S+)")


def load_pnm(path) -> np.ndarray:
    """Binary PGM (P5) as ``(rows, cols)`` or PPM (P6) as ``(rows, cols, 3)``."""
    buf = Path(path).read_bytes()
    pos = 0
    tokens = []
    for _ in range(4):
        m = _PNM_TOKEN.match(buf, pos)
        if m is None:
            raise FormatError(f"{path}: malformed PNM header")
        tokens.append(m.group(1))
        pos = m.end()
    magic = tokens[0]
    if magic not in (b"P5", b"P6"):
        raise FormatError(f"{path}: unsupported PNM variant {magic.decode(errors='replace')}")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise FormatError(f"{path}: malformed PNM header") from exc
    if width < 1 or height < 1:
        raise FormatError(f"{path}: malformed PNM header")
    if not 0 < maxval <= 255:
        raise FormatError(f"{path}: unsupported maxval {maxval}")
    if pos >= len(buf) or not buf[pos:pos + 1].isspace():
        raise FormatError(f"{path}: malformed PNM header")
    pos += 1
    channels = 3 if magic == b"P6" else 1
    n = width * height * channels
    raster = buf[pos:pos + n]
    if len(raster) < n:
        raise FormatError(f"{path}: truncated raster, expected {n} bytes, got {len(raster)}")
    img = np.frombuffer(raster, dtype=np.uint8).astype(np.float64)
    return img.reshape((height, width, 3) if channels == 3 else (height, width))


def downsample(t, factor: int) -> np.ndarray:
    """Mean pooling over ``factor x factor`` blocks of the first two modes.

    Rows and columns that do not fill a whole block are dropped.
    """
    t = np.asarray(t, dtype=np.float64)
    factor = int(factor)
    if factor < 1:
        raise ValueError("downsample factor must be >= 1")
    if t.ndim < 2:
        raise ShapeError("downsampling needs at least two modes")
    if factor > t.shape[0] or factor > t.shape[1]:
        raise ShapeError(f"factor {factor} larger than extents {t.shape[:2]}")
    if factor == 1:
        return t.copy()
    h, w = t.shape[0] // factor, t.shape[1] // factor
    blocks = t[:h * factor, :w * factor].reshape((h, factor, w, factor) + t.shape[2:])
    return blocks.mean(axis=(1, 3))


def to_grayscale(t) -> np.ndarray:
    """Average the channel mode (mode 3) away."""
    t = np.asarray(t, dtype=np.float64)
    if t.ndim != 3:
        raise ShapeError("grayscale averaging expects a rows x cols x channels tensor")
    return t.mean(axis=2)


@dataclass
class GroupSpec:
    label: str
    files: list = field(default_factory=list)
    exclude: list = field(default_factory=list)
    limit: int | None = None
    stacked: bool = False
    idx_images: str | None = None
    idx_labels: str | None = None
    klass: int | None = None


@dataclass
class DatasetManifest:
    root: Path
    groups: list
    downsample: int = 1
    channels: str = "keep"
    transpose: bool = False

    def __post_init__(self):
        if int(self.downsample) < 1:
            raise ManifestError("downsample must be >= 1")
        if self.channels not in ("keep", "grayscale-average"):
            raise ManifestError(f"unknown channel handling {self.channels!r}")
        if not self.groups:
            raise ManifestError("manifest lists no groups")


def parse_manifest(doc: dict, base_dir=".") -> DatasetManifest:
    if not isinstance(doc, dict):
        raise ManifestError("manifest must be a JSON object")
    version = doc.get("version")
    if version != MANIFEST_VERSION:
        raise ManifestError(f"unsupported manifest version {version!r}")
    groups = []
    for i, g in enumerate(doc.get("groups") or []):
        if not isinstance(g, dict):
            raise ManifestError(f"group {i} must be an object")
        files = g.get("files", [])
        if isinstance(files, str):
            files = [files]
        spec = GroupSpec(
            label=str(g.get("label", i)),
            files=list(files),
            exclude=list(g.get("exclude", [])),
            limit=g.get("limit"),
            stacked=bool(g.get("stacked", False)),
            idx_images=g.get("idx_images"),
            idx_labels=g.get("idx_labels"),
            klass=g.get("class"),
        )
        if not spec.files and not spec.idx_images:
            raise ManifestError(f"group {spec.label!r} has neither files nor idx_images")
        if spec.idx_images and (spec.idx_labels is None) != (spec.klass is None):
            raise ManifestError(f"group {spec.label!r}: idx_labels and class go together")
        if spec.limit is not None and int(spec.limit) < 1:
            raise ManifestError(f"group {spec.label!r}: limit must be >= 1")
        groups.append(spec)
    root = Path(base_dir) / doc.get("root", ".")
    return DatasetManifest(root=root, groups=groups, downsample=int(doc.get("downsample", 1)),
                           channels=doc.get("channels", "keep"), transpose=bool(doc.get("transpose", False)))


def load_manifest(path) -> DatasetManifest:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: invalid JSON: {exc}") from exc
    return parse_manifest(doc, path.parent)


def _load_file(path: Path, stacked: bool) -> list[np.ndarray]:
    suffix = path.suffix.lower()
    if suffix in (".pgm", ".ppm", ".pnm"):
        return [load_pnm(path)]
    if suffix == ".mctn":
        t = load_tensor(path)
        return [t[..., i] for i in range(t.shape[-1])] if stacked else [t]
    return load_idx(path)


def _group_samples(spec: GroupSpec, root: Path) -> list[np.ndarray]:
    if spec.idx_images:
        images = read_idx(root / spec.idx_images)
        if spec.idx_labels is not None:
            labels = read_idx(root / spec.idx_labels)
            if labels.shape[0] != images.shape[0]:
                raise ShapeError("IDX image and label counts differ")
            images = images[labels == int(spec.klass)]
        samples = [np.asarray(a, dtype=np.float64) for a in images]
    else:
        excluded = {(root / e).resolve() for e in spec.exclude}
        paths = set()
        for pattern in spec.files:
            matches = [p for p in root.glob(pattern) if p.is_file()]
            if not matches:
                raise FileNotFoundError(f"no files match {pattern!r} under {root}")
            paths.update(matches)
        samples = []
        for p in sorted(paths, key=lambda q: q.as_posix()):
            if p.resolve() not in excluded:
                samples.extend(_load_file(p, spec.stacked))
    if spec.limit is not None:
        samples = samples[:int(spec.limit)]
    if not samples:
        raise ShapeError(f"group {spec.label!r} has no samples")
    return samples


def _preprocess(t: np.ndarray, manifest: DatasetManifest) -> np.ndarray:
    if manifest.transpose:
        t = np.swapaxes(t, 0, 1)
    if manifest.downsample > 1:
        t = downsample(t, manifest.downsample)
    if manifest.channels == "grayscale-average" and t.ndim == 3:
        t = to_grayscale(t)
    return t


def assemble(manifest: DatasetManifest) -> GroupedDataset:
    """Load, preprocess and group every sample listed in the manifest."""
    groups = []
    shape = None
    for spec in manifest.groups:
        samples = [_preprocess(t, manifest) for t in _group_samples(spec, Path(manifest.root))]
        for t in samples:
            if shape is None:
                shape = t.shape
            elif t.shape != shape:
                raise ShapeError(f"group {spec.label!r}: sample shape {t.shape} differs from {shape}")
        groups.append(np.stack(samples))
    return GroupedDataset(tuple(groups), tuple(s.label for s in manifest.groups))

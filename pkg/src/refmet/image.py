"""Image, mask and rectangle types plus file I/O.

Images are dense 2D or 3D float grids. Arrays follow numpy layout:
``(h, w)`` for 2D and ``(d, h, w)`` for 3D. Two on-disk formats are
supported:

* PGM ("P2" ASCII or "P5" binary), maxval 255 or 65535, 16-bit values
  big-endian per the PGM convention. 2D only.
* rawf32: little-endian float32 in C row-major order, with a JSON
  sidecar at ``<path>.meta`` holding ``{"dims": [h, w] | [d, h, w],
  "dtype": "f32le"}``.

Images and masks are immutable after construction; every operation here
is pure.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import FormatError, RefmetError, ShapeMismatchError

__all__ = [
    "Image",
    "Mask",
    "Rect",
    "load_image",
    "save_image",
    "intensity_stats",
    "crop",
    "bounding_box",
]


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Image:
    """A 2D/3D intensity grid with optional declared range and provenance.

    ``declared_range`` is advisory metadata (e.g. the nominal range of the
    file format the image came from); metrics never read it implicitly.
    ``provenance`` records the fingerprints of distortions applied so far.
    """

    data: np.ndarray
    declared_range: tuple[float, float] | None = None
    provenance: tuple[str, ...] = ()

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim not in (2, 3):
            raise RefmetError(f"image must be 2D or 3D, got ndim={data.ndim}")
        if any(n < 1 for n in data.shape):
            raise RefmetError(f"image dims must be >= 1, got {data.shape}")
        if not np.all(np.isfinite(data)):
            raise RefmetError("image contains non-finite values")
        object.__setattr__(self, "data", _freeze(data))
        if self.declared_range is not None:
            lo, hi = (float(self.declared_range[0]), float(self.declared_range[1]))
            if lo > float(data.min()) or hi < float(data.max()):
                raise RefmetError(
                    f"declared_range ({lo}, {hi}) does not cover data range "
                    f"({data.min()}, {data.max()})"
                )
            object.__setattr__(self, "declared_range", (lo, hi))
        object.__setattr__(self, "provenance", tuple(self.provenance))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def width(self) -> int:
        return self.data.shape[-1]

    @property
    def height(self) -> int:
        return self.data.shape[-2]

    @property
    def depth(self) -> int | None:
        return self.data.shape[0] if self.data.ndim == 3 else None

    def with_data(self, data: np.ndarray, declared_range=None, provenance=None) -> "Image":
        """New image with replaced pixel data (range/provenance optional)."""
        return Image(
            data,
            declared_range=declared_range,
            provenance=self.provenance if provenance is None else tuple(provenance),
        )


@dataclass(frozen=True, eq=False)
class Mask:
    """Boolean grid congruent with some image."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.dtype != np.bool_:
            raise RefmetError(f"mask data must be boolean, got {data.dtype}")
        if data.ndim not in (2, 3):
            raise RefmetError(f"mask must be 2D or 3D, got ndim={data.ndim}")
        object.__setattr__(self, "data", _freeze(data))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def count(self) -> int:
        return int(self.data.sum())


@dataclass(frozen=True)
class Rect:
    """Axis-aligned box in array index order (same axis order as ``data.shape``)."""

    origin: tuple[int, ...]
    extent: tuple[int, ...]

    def __post_init__(self):
        origin = tuple(int(v) for v in self.origin)
        extent = tuple(int(v) for v in self.extent)
        if len(origin) != len(extent):
            raise RefmetError("origin and extent must have equal length")
        if any(o < 0 for o in origin):
            raise RefmetError(f"rect origin must be >= 0, got {origin}")
        if any(e < 1 for e in extent):
            raise RefmetError(f"rect extent must be >= 1, got {extent}")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "extent", extent)

    def slices(self) -> tuple[slice, ...]:
        return tuple(slice(o, o + e) for o, e in zip(self.origin, self.extent))


def intensity_stats(img: Image) -> tuple[float, float, float, float]:
    """(min, max, mean, std) over all elements; std uses population divisor N."""
    d = img.data
    return float(d.min()), float(d.max()), float(d.mean()), float(d.std(ddof=0))


def crop(img: Image, r: Rect) -> Image:
    """Sub-image at ``r``; declared range and provenance are propagated."""
    if len(r.origin) != img.ndim:
        raise RefmetError(f"rect rank {len(r.origin)} != image rank {img.ndim}")
    for o, e, n in zip(r.origin, r.extent, img.shape):
        if o + e > n:
            raise RefmetError(f"rect {r} out of bounds for image shape {img.shape}")
    return Image(img.data[r.slices()], declared_range=img.declared_range,
                 provenance=img.provenance)


def bounding_box(m: Mask) -> Rect:
    """Minimal Rect containing every true element of the mask."""
    if not m.data.any():
        raise RefmetError("bounding_box of an empty mask")
    idx = np.nonzero(m.data)
    origin = tuple(int(ax.min()) for ax in idx)
    extent = tuple(int(ax.max()) - int(ax.min()) + 1 for ax in idx)
    return Rect(origin, extent)


# ---------------------------------------------------------------------------
# File I/O
# ---------------------------------------------------------------------------

_TOKEN = re.compile(rb"\S+")


def _pgm_tokens(buf: bytes, count: int, pos: int) -> tuple[list[bytes], int]:
    """Next ``count`` whitespace-separated tokens, skipping '#' comments."""
    out: list[bytes] = []
    while len(out) < count:
        m = _TOKEN.search(buf, pos)
        if m is None:
            raise FormatError("truncated PGM header")
        tok = m.group(0)
        if tok.startswith(b"#"):
            nl = buf.find(b"\n", m.start())
            if nl < 0:
                raise FormatError("truncated PGM comment")
            pos = nl + 1
            continue
        out.append(tok)
        pos = m.end()
    return out, pos


def _load_pgm(path: Path) -> Image:
    buf = path.read_bytes()
    (magic,), pos = _pgm_tokens(buf, 1, 0)
    if magic not in (b"P2", b"P5"):
        raise FormatError(f"not a PGM file (magic {magic!r})")
    (w_tok, h_tok, maxval_tok), pos = _pgm_tokens(buf, 3, pos)
    try:
        w, h, maxval = int(w_tok), int(h_tok), int(maxval_tok)
    except ValueError as exc:
        raise FormatError(f"bad PGM header field: {exc}") from None
    if w < 1 or h < 1:
        raise FormatError(f"bad PGM dims {w}x{h}")
    if maxval not in (255, 65535):
        raise FormatError(f"unsupported PGM maxval {maxval} (need 255 or 65535)")
    n = w * h
    if magic == b"P2":
        toks = buf[pos:].split()
        if len(toks) != n:
            raise FormatError(f"PGM payload has {len(toks)} values, expected {n}")
        try:
            vals = np.array([int(t) for t in toks], dtype=np.int64)
        except ValueError as exc:
            raise FormatError(f"bad PGM sample: {exc}") from None
    else:
        pos += 1  # single whitespace byte after maxval
        itemsize = 1 if maxval < 256 else 2
        payload = buf[pos:pos + n * itemsize]
        if len(payload) != n * itemsize:
            raise FormatError(
                f"PGM payload has {len(payload)} bytes, expected {n * itemsize}")
        dtype = np.uint8 if itemsize == 1 else np.dtype(">u2")
        vals = np.frombuffer(payload, dtype=dtype).astype(np.int64)
    if vals.min() < 0 or vals.max() > maxval:
        raise FormatError(f"PGM sample out of range [0, {maxval}]")
    return Image(vals.reshape(h, w).astype(np.float64),
                 declared_range=(0.0, float(maxval)))


def _load_rawf32(path: Path) -> Image:
    meta_path = Path(str(path) + ".meta")
    if not meta_path.exists():
        raise FormatError(f"missing rawf32 sidecar {meta_path}")
    try:
        meta = json.loads(meta_path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"bad rawf32 sidecar JSON: {exc}") from None
    dims = meta.get("dims")
    dtype = meta.get("dtype")
    if dtype != "f32le":
        raise FormatError(f"unsupported rawf32 dtype {dtype!r}")
    if not isinstance(dims, list) or len(dims) not in (2, 3) or \
            not all(isinstance(v, int) and v >= 1 for v in dims):
        raise FormatError(f"bad rawf32 dims {dims!r}")
    n = int(np.prod(dims))
    payload = path.read_bytes()
    if len(payload) != 4 * n:
        raise FormatError(f"rawf32 payload has {len(payload)} bytes, expected {4 * n}")
    vals = np.frombuffer(payload, dtype="<f4").reshape(dims)
    if not np.all(np.isfinite(vals)):
        raise FormatError("rawf32 contains non-finite values")
    return Image(vals.astype(np.float64))


def load_image(path, format: str | None = None) -> Image:
    """Load an image; format inferred from the extension when omitted."""
    path = Path(path)
    fmt = format or ("pgm" if path.suffix.lower() == ".pgm" else "rawf32")
    if not path.exists():
        raise FormatError(f"no such file: {path}")
    if fmt == "pgm":
        return _load_pgm(path)
    if fmt == "rawf32":
        return _load_rawf32(path)
    raise FormatError(f"unknown format {fmt!r}")


def save_image(img: Image, path, format: str | None = None) -> None:
    """Write ``img``; pgm requires integer values in [0, 65535] and 2D data."""
    path = Path(path)
    fmt = format or ("pgm" if path.suffix.lower() == ".pgm" else "rawf32")
    if fmt == "pgm":
        if img.ndim != 2:
            raise FormatError("PGM only stores 2D images")
        d = img.data
        if not np.all(d == np.floor(d)):
            raise FormatError("PGM requires integer-valued data")
        if d.min() < 0 or d.max() > 65535:
            raise FormatError("PGM values must lie in [0, 65535]")
        maxval = 255 if d.max() <= 255 else 65535
        h, w = d.shape
        header = f"P5\n{w} {h}\n{maxval}\n".encode()
        dtype = np.uint8 if maxval == 255 else np.dtype(">u2")
        path.write_bytes(header + d.astype(dtype).tobytes())
    elif fmt == "rawf32":
        payload = img.data.astype("<f4").tobytes(order="C")
        path.write_bytes(payload)
        meta = {"dims": [int(v) for v in img.shape], "dtype": "f32le"}
        Path(str(path) + ".meta").write_text(json.dumps(meta) + "\n")
    else:
        raise FormatError(f"unknown format {fmt!r}")


def mask_from_image(img: Image, threshold: float = 0.5) -> Mask:
    """Interpret an intensity image as a boolean mask (``> threshold``)."""
    return Mask(img.data > threshold)


def mask_to_image(m: Mask) -> Image:
    """Boolean mask as a 0/255 image, convenient for PGM export."""
    return Image(m.data.astype(np.float64) * 255.0, declared_range=(0.0, 255.0))


def require_same_shape(a, b) -> None:
    if a.shape != b.shape:
        raise ShapeMismatchError(f"shape mismatch: {a.shape} vs {b.shape}")

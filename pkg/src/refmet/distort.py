"""Deterministic, seeded image distortions.

Every operation is pure and reproducible: equal inputs (and seed, where
one applies) give bit-identical outputs, and each distortion's identity
parameter (gamma=1, factor=1, zero shift, sigma_rel=0, amplitude_rel=0)
returns the input image object unchanged.

Gaussian noise draws from the package's portable splitmix64 generator
(see :mod:`refmet.rng`), never from global state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy import ndimage

from . import rng
from .errors import ConfigError, DegenerateRangeError, RefmetError
from .image import Image
from .metrics.score import fingerprint

__all__ = [
    "DistortionSpec",
    "gamma_transform", "linear_scale", "translate", "mirror_replace",
    "add_gaussian_noise", "add_stripes", "gaussian_blur", "crop_fraction",
    "apply", "apply_chain", "parse_chain",
]


def _span(img: Image) -> tuple[float, float]:
    lo = float(img.data.min())
    hi = float(img.data.max())
    if hi == lo:
        raise DegenerateRangeError("operation undefined on a constant image")
    return lo, hi


def gamma_transform(img: Image, gamma: float) -> Image:
    """Power-law remap of min-max-normalized intensities, range restored.

    Endpoints are fixed (min -> min, max -> max) and the map is strictly
    monotone for any gamma > 0.
    """
    gamma = float(gamma)
    if not gamma > 0:
        raise ConfigError(f"gamma must be > 0, got {gamma}")
    if gamma == 1.0:
        return img
    lo, hi = _span(img)
    unit = (img.data - lo) / (hi - lo)
    out = lo + (hi - lo) * np.power(unit, gamma)
    return img.with_data(out, declared_range=img.declared_range)


def linear_scale(img: Image, factor: float) -> Image:
    """Elementwise multiplication by ``factor`` (any nonzero real)."""
    factor = float(factor)
    if factor == 0.0:
        raise ConfigError("linear scale factor must be nonzero")
    if factor == 1.0:
        return img
    declared = None
    if img.declared_range is not None:
        lo, hi = img.declared_range
        declared = tuple(sorted((lo * factor, hi * factor)))
    return img.with_data(img.data * factor, declared_range=declared)


def translate(img: Image, shift: tuple[int, ...]) -> Image:
    """Whole-pixel shift; vacated cells are filled with the image minimum."""
    shift = tuple(int(s) for s in shift)
    if len(shift) != img.ndim:
        raise ConfigError(f"shift rank {len(shift)} != image rank {img.ndim}")
    for s, n in zip(shift, img.shape):
        if abs(s) >= n:
            raise ConfigError(f"shift {s} must be smaller than extent {n}")
    if all(s == 0 for s in shift):
        return img
    fill = float(img.data.min())
    out = np.full_like(img.data, fill)
    src = tuple(slice(max(0, -s), n - max(0, s)) for s, n in zip(shift, img.shape))
    dst = tuple(slice(max(0, s), n - max(0, -s)) for s, n in zip(shift, img.shape))
    out[dst] = img.data[src]
    return img.with_data(out, declared_range=img.declared_range)


def mirror_replace(img: Image, axis: int = 0) -> Image:
    """Replace the lower half along ``axis`` with a mirror of the upper half.

    For odd extents the middle line is kept. The output is symmetric about
    the midline: out[k] = in[n-1-k] for every k in the replaced half.
    """
    axis = int(axis)
    if not 0 <= axis < img.ndim:
        raise ConfigError(f"axis {axis} out of range for rank {img.ndim}")
    n = img.shape[axis]
    if n < 2:
        raise ConfigError(f"extent along axis {axis} must be >= 2")
    out = np.array(img.data)
    keep = (n + 1) // 2
    idx_dst = [slice(None)] * img.ndim
    idx_src = [slice(None)] * img.ndim
    idx_dst[axis] = slice(keep, n)
    # reversed first rows: out[k] = in[n-1-k] for k in [keep, n)
    idx_src[axis] = slice(n - 1 - keep, None, -1)
    out[tuple(idx_dst)] = img.data[tuple(idx_src)]
    return img.with_data(out, declared_range=img.declared_range)


def add_gaussian_noise(img: Image, sigma_rel: float, seed: int) -> Image:
    """Add N(0, (sigma_rel * (max - min))^2) noise, seeded and portable."""
    sigma_rel = float(sigma_rel)
    if sigma_rel < 0:
        raise ConfigError(f"sigma_rel must be >= 0, got {sigma_rel}")
    if sigma_rel == 0.0:
        return img
    lo, hi = _span(img)
    noise = rng.normals(seed, img.data.size).reshape(img.shape)
    out = img.data + sigma_rel * (hi - lo) * noise
    return img.with_data(out, declared_range=None)


def add_stripes(img: Image, period: int, amplitude_rel: float, axis: int = 0) -> Image:
    """Add a constant offset to every period-th line along ``axis``."""
    period = int(period)
    if period < 2:
        raise ConfigError(f"stripe period must be >= 2, got {period}")
    amplitude_rel = float(amplitude_rel)
    if not 0 <= axis < img.ndim:
        raise ConfigError(f"axis {axis} out of range for rank {img.ndim}")
    if amplitude_rel == 0.0:
        return img
    lo, hi = _span(img)
    out = np.array(img.data)
    idx = [slice(None)] * img.ndim
    idx[axis] = slice(0, None, period)
    out[tuple(idx)] += amplitude_rel * (hi - lo)
    return img.with_data(out, declared_range=None)


def _gauss_kernel(sigma: float) -> np.ndarray:
    radius = int(np.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def gaussian_blur(img: Image, sigma: float) -> Image:
    """Separable Gaussian blur, kernel truncated at radius ceil(3 sigma).

    Boundaries are handled by edge-inclusive mirroring, which conserves
    total intensity for the symmetric kernel.
    """
    sigma = float(sigma)
    if not sigma > 0:
        raise ConfigError(f"blur sigma must be > 0, got {sigma}")
    kern = _gauss_kernel(sigma)
    out = img.data
    for ax in range(img.ndim):
        out = ndimage.correlate1d(out, kern, axis=ax, mode="reflect")
    return img.with_data(out, declared_range=img.declared_range)


def crop_fraction(img: Image, fraction: float) -> Image:
    """Symmetric crop removing floor(fraction * extent) pixels per side."""
    fraction = float(fraction)
    if not 0.0 < fraction < 0.5:
        raise ConfigError(f"crop fraction must lie in (0, 0.5), got {fraction}")
    margins = [int(np.floor(fraction * n)) for n in img.shape]
    if any(n - 2 * m < 1 for m, n in zip(margins, img.shape)):
        raise RefmetError(f"crop fraction {fraction} degenerates shape {img.shape}")
    if all(m == 0 for m in margins):
        return img
    sl = tuple(slice(m, n - m) for m, n in zip(margins, img.shape))
    return img.with_data(img.data[sl], declared_range=img.declared_range)


# ---------------------------------------------------------------------------
# Serializable specs and dispatch
# ---------------------------------------------------------------------------

# kind -> (required params, whether the seed is consumed)
_KINDS: dict[str, tuple[tuple[str, ...], bool]] = {
    "gamma": (("gamma",), False),
    "linear_scale": (("factor",), False),
    "translate": (("shift",), False),
    "mirror_replace": (("axis",), False),
    "gaussian_noise": (("sigma_rel",), True),
    "stripes": (("period", "amplitude_rel", "axis"), False),
    "gaussian_blur": (("sigma",), False),
    "crop_fraction": (("fraction",), False),
}


@dataclass(frozen=True)
class DistortionSpec:
    """One deterministic distortion: kind, parameters, and a seed.

    The seed is consumed only by ``gaussian_noise``. JSON form:
    ``{"kind": "...", "params": {...}, "seed": n}``; chains are JSON
    arrays applied left to right.
    """

    kind: str
    params: Mapping[str, object] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ConfigError(f"unknown distortion kind {self.kind!r}")
        required, _ = _KINDS[self.kind]
        missing = [k for k in required if k not in self.params]
        if missing:
            raise ConfigError(f"{self.kind} spec missing params {missing}")
        extra = [k for k in self.params if k not in required]
        if extra:
            raise ConfigError(f"{self.kind} spec has unknown params {extra}")
        params = dict(self.params)
        if "shift" in params:
            params["shift"] = tuple(int(v) for v in params["shift"])
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "seed", int(self.seed))
        self._validate_values()

    def _validate_values(self):
        p = self.params
        if self.kind == "gamma" and not p["gamma"] > 0:
            raise ConfigError(f"gamma must be > 0, got {p['gamma']}")
        if self.kind == "linear_scale" and p["factor"] == 0:
            raise ConfigError("linear scale factor must be nonzero")
        if self.kind == "gaussian_noise" and p["sigma_rel"] < 0:
            raise ConfigError(f"sigma_rel must be >= 0, got {p['sigma_rel']}")
        if self.kind == "stripes" and int(p["period"]) < 2:
            raise ConfigError(f"stripe period must be >= 2, got {p['period']}")
        if self.kind == "gaussian_blur" and not p["sigma"] > 0:
            raise ConfigError(f"blur sigma must be > 0, got {p['sigma']}")
        if self.kind == "crop_fraction" and not 0.0 < p["fraction"] < 0.5:
            raise ConfigError(
                f"crop fraction must lie in (0, 0.5), got {p['fraction']}")

    def fingerprint(self) -> str:
        kv = dict(self.params)
        if _KINDS[self.kind][1]:
            kv["seed"] = self.seed
        inner = ",".join(f"{k}={v!r}" if isinstance(v, float) else f"{k}={v}"
                         for k, v in sorted(kv.items()))
        return f"{self.kind}({inner})"

    def to_json(self) -> dict:
        params = {k: (list(v) if isinstance(v, tuple) else v)
                  for k, v in self.params.items()}
        return {"kind": self.kind, "params": params, "seed": self.seed}

    @classmethod
    def from_json(cls, obj) -> "DistortionSpec":
        if not isinstance(obj, dict) or "kind" not in obj:
            raise ConfigError(f"bad distortion spec {obj!r}")
        return cls(obj["kind"], obj.get("params", {}), obj.get("seed", 0))


def apply(spec: DistortionSpec, img: Image) -> Image:
    """Dispatch one spec and append its fingerprint to the provenance trail."""
    p = spec.params
    if spec.kind == "gamma":
        out = gamma_transform(img, p["gamma"])
    elif spec.kind == "linear_scale":
        out = linear_scale(img, p["factor"])
    elif spec.kind == "translate":
        out = translate(img, p["shift"])
    elif spec.kind == "mirror_replace":
        out = mirror_replace(img, p["axis"])
    elif spec.kind == "gaussian_noise":
        out = add_gaussian_noise(img, p["sigma_rel"], spec.seed)
    elif spec.kind == "stripes":
        out = add_stripes(img, p["period"], p["amplitude_rel"], p["axis"])
    elif spec.kind == "gaussian_blur":
        out = gaussian_blur(img, p["sigma"])
    else:
        out = crop_fraction(img, p["fraction"])
    return Image(out.data, declared_range=out.declared_range,
                 provenance=img.provenance + (spec.fingerprint(),))


def apply_chain(specs, img: Image) -> Image:
    for spec in specs:
        img = apply(spec, img)
    return img


def parse_chain(text: str) -> tuple[DistortionSpec, ...]:
    """Parse a JSON distortion chain (single object or array of objects)."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"bad distortion JSON: {exc}") from None
    if isinstance(obj, dict):
        obj = [obj]
    if not isinstance(obj, list):
        raise ConfigError("distortion chain must be a JSON object or array")
    return tuple(DistortionSpec.from_json(o) for o in obj)


def chain_fingerprint(specs) -> str:
    return "|".join(s.fingerprint() for s in specs) if specs else "identity"

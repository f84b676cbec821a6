"""Mutual information metrics from joint intensity histograms.

Entropies use the natural logarithm. The joint histogram has ``bins``
equal-width bins per axis; bin edges cover each image's own range by
default (``per_image``) or the joint min/max of both images (``joint``).
Marginal entropies are derived from the same joint histogram, so
mi(R, R) = H(R) holds exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, DegenerateRangeError
from ..image import Image, require_same_shape
from .score import MetricScore, fingerprint

__all__ = ["HistogramParams", "mi", "nmi"]


@dataclass(frozen=True)
class HistogramParams:
    bins: int = 256
    range_policy: str = "per_image"

    def __post_init__(self):
        if self.bins < 2:
            raise ConfigError(f"histogram bins must be >= 2, got {self.bins}")
        if self.range_policy not in ("per_image", "joint"):
            raise ConfigError(f"unknown histogram range policy {self.range_policy!r}")

    def fingerprint(self) -> str:
        return fingerprint(bins=self.bins, hist_range=self.range_policy)


def _edges(vals: np.ndarray, other: np.ndarray, h: HistogramParams) -> np.ndarray:
    if h.range_policy == "joint":
        lo = min(float(vals.min()), float(other.min()))
        hi = max(float(vals.max()), float(other.max()))
    else:
        lo, hi = float(vals.min()), float(vals.max())
    if lo == hi:
        # Constant axis: a single occupied bin, entropy 0.
        lo, hi = lo - 0.5, hi + 0.5
    return np.linspace(lo, hi, h.bins + 1)


def joint_histogram(ref_vals: np.ndarray, test_vals: np.ndarray,
                    h: HistogramParams) -> np.ndarray:
    hist, _, _ = np.histogram2d(
        ref_vals.ravel(), test_vals.ravel(),
        bins=[_edges(ref_vals, test_vals, h), _edges(test_vals, ref_vals, h)])
    return hist


def _entropy(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def entropies(ref_vals: np.ndarray, test_vals: np.ndarray,
              h: HistogramParams) -> tuple[float, float, float]:
    """(H(R), H(I), H(R,I)) from one shared joint histogram."""
    hist = joint_histogram(ref_vals, test_vals, h)
    p = hist / hist.sum()
    return _entropy(p.sum(axis=1)), _entropy(p.sum(axis=0)), _entropy(p.ravel())


def mi_values(ref_vals: np.ndarray, test_vals: np.ndarray, h: HistogramParams) -> float:
    hr, ht, hrt = entropies(ref_vals, test_vals, h)
    return hr + ht - hrt


def nmi_values(ref_vals: np.ndarray, test_vals: np.ndarray, h: HistogramParams) -> float:
    hr, ht, hrt = entropies(ref_vals, test_vals, h)
    if hrt == 0.0:
        raise DegenerateRangeError("nmi undefined: joint entropy is 0 (constant images)")
    return (hr + ht) / hrt


def mi(ref: Image, test: Image, params: HistogramParams | None = None) -> MetricScore:
    """Mutual information H(R) + H(I) - H(R,I) in nats."""
    require_same_shape(ref, test)
    h = params or HistogramParams()
    return MetricScore("mi", mi_values(ref.data, test.data, h), h.fingerprint())


def nmi(ref: Image, test: Image, params: HistogramParams | None = None) -> MetricScore:
    """Normalized mutual information (H(R) + H(I)) / H(R,I), in [1, 2]."""
    require_same_shape(ref, test)
    h = params or HistogramParams()
    return MetricScore("nmi", nmi_values(ref.data, test.data, h), h.fingerprint())

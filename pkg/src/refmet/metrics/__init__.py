"""Reference-metric registry and masked/cropped evaluation semantics.

Metric identifiers (exact strings): ``mae``, ``mse``, ``psnr``, ``ssim``,
``ms_ssim``, ``cw_ssim``, ``pcc``, ``mi``, ``nmi``, ``dice``.

Metrics come in three kinds:

* ``pointwise`` metrics read co-located intensity pairs and accept any
  non-empty mask (evaluation restricted to masked locations).
* ``windowed`` metrics combine neighboring pixels and accept only masks
  that are exactly a filled rectangle; rectangular-mask evaluation is
  bit-identical to evaluating on the cropped images.
* ``mask`` metrics (dice) compare boolean grids directly.

``register_metric`` is the extension point for attaching additional
(e.g. learned) metrics under the same evaluation semantics.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from ..errors import ConfigError, NonRectangularMaskError, RefmetError
from ..image import Image, Mask, bounding_box, crop, mask_from_image, require_same_shape
from ..normalize import DataRangePolicy, resolve_data_range_values
from .information import HistogramParams, mi, mi_values, nmi, nmi_values
from .overlap import dice
from .pointwise import (mae, mae_values, mse, mse_values, pcc, pcc_values,
                        psnr, psnr_values)
from .score import MetricScore, fingerprint, format_score, merge_fingerprints
from .structural import (DEFAULT_MSSSIM_WEIGHTS, MsSsimParams, SsimParams,
                         WindowSpec, ms_ssim, ssim, truncated_weights)
from .wavelet import CwSsimParams, cw_ssim

__all__ = [
    "MetricScore", "fingerprint", "format_score",
    "WindowSpec", "SsimParams", "MsSsimParams", "CwSsimParams", "HistogramParams",
    "mae", "mse", "psnr", "pcc", "ssim", "ms_ssim", "cw_ssim", "mi", "nmi", "dice",
    "EvalContext", "evaluate", "masked_evaluate", "register_metric",
    "metric_kind", "registered_metrics", "truncated_weights",
]


@dataclass(frozen=True)
class EvalContext:
    """All tunable knobs a string-keyed metric evaluation may need."""

    range_policy: DataRangePolicy = field(default_factory=DataRangePolicy.joint)
    window: WindowSpec = field(default_factory=WindowSpec)
    k1: float = 0.01
    k2: float = 0.03
    scales: int = 5
    weights: tuple[float, ...] = DEFAULT_MSSSIM_WEIGHTS
    cw: CwSsimParams = field(default_factory=CwSsimParams)
    hist: HistogramParams = field(default_factory=HistogramParams)

    def ssim_params(self, ref: Image, test: Image) -> SsimParams:
        L = resolve_data_range_values(ref.data, test.data, self.range_policy)
        return SsimParams(L, window=self.window, k1=self.k1, k2=self.k2)

    def ms_ssim_params(self, ref: Image, test: Image) -> MsSsimParams:
        return MsSsimParams(self.ssim_params(ref, test),
                            scales=self.scales, weights=self.weights)


def _policy_fp(ctx: EvalContext) -> str:
    return fingerprint(range_policy=ctx.range_policy.spec_string())


def _eval_ssim(ref, test, ctx):
    score = ssim(ref, test, ctx.ssim_params(ref, test))
    return replace(score, params_fingerprint=merge_fingerprints(
        score.params_fingerprint, _policy_fp(ctx)))


def _eval_ms_ssim(ref, test, ctx):
    score = ms_ssim(ref, test, ctx.ms_ssim_params(ref, test))
    return replace(score, params_fingerprint=merge_fingerprints(
        score.params_fingerprint, _policy_fp(ctx)))


def _eval_dice(ref, test, ctx):
    return dice(mask_from_image(ref), mask_from_image(test))


@dataclass(frozen=True)
class MetricDef:
    metric_id: str
    kind: str  # pointwise | windowed | mask
    fn: Callable[[Image, Image, EvalContext], MetricScore]


_REGISTRY: dict[str, MetricDef] = {}


def register_metric(metric_id: str, fn, kind: str) -> None:
    """Attach a metric under the standard evaluation/masking semantics."""
    if kind not in ("pointwise", "windowed", "mask"):
        raise ConfigError(f"unknown metric kind {kind!r}")
    _REGISTRY[metric_id] = MetricDef(metric_id, kind, fn)


register_metric("mae", lambda r, t, ctx: mae(r, t), "pointwise")
register_metric("mse", lambda r, t, ctx: mse(r, t), "pointwise")
register_metric("psnr", lambda r, t, ctx: psnr(r, t, ctx.range_policy), "pointwise")
register_metric("pcc", lambda r, t, ctx: pcc(r, t), "pointwise")
register_metric("mi", lambda r, t, ctx: mi(r, t, ctx.hist), "pointwise")
register_metric("nmi", lambda r, t, ctx: nmi(r, t, ctx.hist), "pointwise")
register_metric("ssim", _eval_ssim, "windowed")
register_metric("ms_ssim", _eval_ms_ssim, "windowed")
register_metric("cw_ssim", lambda r, t, ctx: cw_ssim(r, t, ctx.cw), "windowed")
register_metric("dice", _eval_dice, "mask")


def registered_metrics() -> tuple[str, ...]:
    return tuple(_REGISTRY)


def metric_kind(metric_id: str) -> str:
    try:
        return _REGISTRY[metric_id].kind
    except KeyError:
        raise ConfigError(f"unknown metric {metric_id!r}") from None


def evaluate(metric_id: str, ref: Image, test: Image,
             ctx: EvalContext | None = None) -> MetricScore:
    """Evaluate one registered metric on a full image pair."""
    ctx = ctx or EvalContext()
    if metric_id not in _REGISTRY:
        raise ConfigError(f"unknown metric {metric_id!r}")
    return _REGISTRY[metric_id].fn(ref, test, ctx)


def _masked_pointwise(metric_id: str, ref_vals: np.ndarray, test_vals: np.ndarray,
                      ctx: EvalContext) -> MetricScore:
    if metric_id == "mae":
        return MetricScore("mae", mae_values(ref_vals, test_vals))
    if metric_id == "mse":
        return MetricScore("mse", mse_values(ref_vals, test_vals))
    if metric_id == "psnr":
        L = resolve_data_range_values(ref_vals, test_vals, ctx.range_policy)
        return MetricScore("psnr", psnr_values(ref_vals, test_vals, L),
                           fingerprint(data_range=L,
                                       range_policy=ctx.range_policy.spec_string()))
    if metric_id == "pcc":
        return MetricScore("pcc", pcc_values(ref_vals, test_vals))
    if metric_id == "mi":
        return MetricScore("mi", mi_values(ref_vals, test_vals, ctx.hist),
                           ctx.hist.fingerprint())
    if metric_id == "nmi":
        return MetricScore("nmi", nmi_values(ref_vals, test_vals, ctx.hist),
                           ctx.hist.fingerprint())
    raise ConfigError(f"metric {metric_id!r} has no masked pointwise form")


def rect_of_mask(m: Mask):
    """The filled Rect a mask represents, or None if it is not rectangular."""
    if not m.data.any():
        return None
    rect = bounding_box(m)
    if m.count() != int(np.prod(rect.extent)):
        return None
    return rect


def masked_evaluate(metric_id: str, ref: Image, test: Image, m: Mask,
                    ctx: EvalContext | None = None) -> MetricScore:
    """Evaluate a metric restricted to masked locations.

    Pointwise metrics use exactly the masked intensity pairs (N = |mask|).
    Windowed metrics require the mask to be a filled rectangle and
    evaluate on the cropped images, bit-identical to cropping explicitly.
    """
    ctx = ctx or EvalContext()
    kind = metric_kind(metric_id)
    require_same_shape(ref, test)
    require_same_shape(ref, m)
    if not m.data.any():
        raise RefmetError("evaluation mask is empty")
    if kind == "mask":
        raise ConfigError(f"metric {metric_id!r} compares masks; "
                          "masked image evaluation does not apply")
    if kind == "pointwise":
        sel = m.data
        return _masked_pointwise(metric_id, ref.data[sel], test.data[sel], ctx)
    rect = rect_of_mask(m)
    if rect is None:
        raise NonRectangularMaskError(
            f"{metric_id} combines neighboring pixels and supports only masks that "
            "are exactly a filled rectangle (evaluated as a crop); "
            "use a pointwise metric or a rectangular mask")
    return _REGISTRY[metric_id].fn(crop(ref, rect), crop(test, rect), ctx)

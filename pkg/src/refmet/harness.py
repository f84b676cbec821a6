"""Five built-in pitfall scenarios, the lint engine, and report assembly.

Each scenario is a list of labeled variants; a variant fixes a distortion
chain, a per-image normalization step (optional binning), masking mode,
data-range policy, and a metric panel. Running a scenario applies every
variant to every phantom, appends one row per metric, and finishes with
mean rows (case_id ``"mean"``) per (variant, metric).

Lint rules (W01..W05) check an evaluation plan against the known pitfall
configurations before any score is trusted. Lints never change scores.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .distort import DistortionSpec, apply_chain, chain_fingerprint, crop_fraction
from .downstream import SegmenterParams, task_similarity
from .errors import ConfigError
from .image import Image, Mask, bounding_box, crop
from .metrics import (EvalContext, HistogramParams, evaluate, masked_evaluate,
                      metric_kind, rect_of_mask, registered_metrics,
                      truncated_weights)
from .metrics.score import MetricScore, fingerprint, merge_fingerprints
from .normalize import DataRangePolicy, NormMethod, bin_quantize, normalize
from .phantom import Phantom, PhantomParams, generate_phantom
from .report import Lint, Report, Row

__all__ = [
    "Variant", "Scenario", "HarnessConfig", "EvalPlan",
    "builtin_scenario", "SCENARIO_IDS",
    "run_scenario", "lint_configuration", "reevaluate_row", "generate_phantoms",
]

SCENARIO_IDS = ("pitfall1", "pitfall2", "pitfall3", "pitfall4", "pitfall5")

PANEL_FULL = ("mae", "mse", "psnr", "ssim", "ms_ssim", "cw_ssim", "pcc", "nmi")
PANEL_WINDOW_SAFE = ("mae", "mse", "psnr", "ssim", "ms_ssim", "pcc", "nmi")
PANEL_POINTWISE = ("mae", "mse", "psnr", "pcc", "nmi")

MASK_MODES = ("none", "crop_fraction", "bbox", "foreground")


@dataclass(frozen=True)
class Variant:
    """One labeled evaluation configuration inside a scenario."""

    label: str
    chain: tuple[DistortionSpec, ...] = ()
    norm: NormMethod = field(default_factory=NormMethod.none)
    prebin: int | None = None
    range_policy: DataRangePolicy = field(default_factory=DataRangePolicy.joint)
    nmi_bins: int = 256
    metrics: tuple[str, ...] = PANEL_FULL
    mask_mode: str = "none"
    crop_frac: float = 0.03
    ms_scales: int = 5

    def __post_init__(self):
        if self.mask_mode not in MASK_MODES:
            raise ConfigError(f"unknown mask mode {self.mask_mode!r}")
        unknown = [m for m in self.metrics if m not in registered_metrics()]
        if unknown:
            raise ConfigError(f"variant {self.label!r} references unknown metrics {unknown}")

    def ctx(self) -> EvalContext:
        return EvalContext(range_policy=self.range_policy,
                           hist=HistogramParams(bins=self.nmi_bins),
                           scales=self.ms_scales,
                           weights=truncated_weights(self.ms_scales))

    def case_chain(self, phantom: Phantom) -> tuple[DistortionSpec, ...]:
        """Chain with per-case seeds so each case draws independent noise."""
        return tuple(replace(s, seed=s.seed + phantom.seed)
                     if s.kind == "gaussian_noise" else s for s in self.chain)

    def pipeline_fingerprint(self, phantom: Phantom) -> str:
        return fingerprint(chain=chain_fingerprint(self.case_chain(phantom)),
                           mask=self.mask_mode
                           if self.mask_mode != "crop_fraction"
                           else f"crop_fraction({self.crop_frac!r})",
                           norm=self.norm.spec_string(),
                           prebin=self.prebin if self.prebin else "none")


@dataclass(frozen=True)
class Scenario:
    scenario_id: str
    variants: tuple[Variant, ...]

    def __post_init__(self):
        labels = [v.label for v in self.variants]
        if len(set(labels)) != len(labels):
            raise ConfigError(f"duplicate variant labels in {self.scenario_id}")


@dataclass(frozen=True)
class HarnessConfig:
    """Run-wide knobs; JSON keys: phantoms{count,seed,dims,tumor_half},
    scenarios, segmenter{...}, output{dir,formats}."""

    phantom_count: int = 20
    phantom_seed: int = 1000
    phantom_params: PhantomParams = field(default_factory=PhantomParams)
    scenarios: tuple[str, ...] = SCENARIO_IDS
    segmenter: SegmenterParams = field(default_factory=SegmenterParams)
    out_dir: str = "audit_out"
    out_formats: tuple[str, ...] = ("csv", "markdown")

    def __post_init__(self):
        if self.phantom_count < 1:
            raise ConfigError("phantom count must be >= 1")
        bad = [s for s in self.scenarios if s not in SCENARIO_IDS]
        if bad:
            raise ConfigError(f"unknown scenario ids {bad}")

    @classmethod
    def from_json(cls, obj: dict) -> "HarnessConfig":
        if not isinstance(obj, dict):
            raise ConfigError("harness config must be a JSON object")
        known = {"phantoms", "scenarios", "segmenter", "output"}
        extra = set(obj) - known
        if extra:
            raise ConfigError(f"unknown harness config keys {sorted(extra)}")
        ph = obj.get("phantoms", {})
        pp = PhantomParams(dims=tuple(ph.get("dims", (192, 192))),
                           tumor_half=ph.get("tumor_half", "lower"))
        seg = obj.get("segmenter", {})
        sp = SegmenterParams(
            threshold_rel=seg.get("threshold_rel", SegmenterParams.threshold_rel),
            min_component_size=seg.get("min_component_size",
                                       SegmenterParams.min_component_size),
            connectivity=seg.get("connectivity", SegmenterParams.connectivity))
        out = obj.get("output", {})
        return cls(
            phantom_count=int(ph.get("count", 20)),
            phantom_seed=int(ph.get("seed", 1000)),
            phantom_params=pp,
            scenarios=tuple(obj.get("scenarios", SCENARIO_IDS)),
            segmenter=sp,
            out_dir=out.get("dir", "audit_out"),
            out_formats=tuple(out.get("formats", ("csv", "markdown"))),
        )

    @classmethod
    def load(cls, path) -> "HarnessConfig":
        try:
            return cls.from_json(json.loads(open(path).read()))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"bad config JSON: {exc}") from None


def generate_phantoms(config: HarnessConfig) -> list[Phantom]:
    return [generate_phantom(config.phantom_seed + i, config.phantom_params)
            for i in range(config.phantom_count)]


# ---------------------------------------------------------------------------
# Built-in scenarios
# ---------------------------------------------------------------------------

def _gamma_linear_chain() -> tuple[DistortionSpec, ...]:
    return (DistortionSpec("gamma", {"gamma": 0.4}),
            DistortionSpec("linear_scale", {"factor": 1.2}))


def builtin_scenario(scenario_id: str) -> Scenario:
    if scenario_id == "pitfall1":
        chain = _gamma_linear_chain()
        variants = [
            Variant("none_joint", chain=chain),
            Variant("none_range_ref", chain=chain,
                    range_policy=DataRangePolicy.ref(), metrics=("ssim", "psnr")),
            Variant("none_range_test", chain=chain,
                    range_policy=DataRangePolicy.test(), metrics=("ssim", "psnr")),
            Variant("minmax", chain=chain, norm=NormMethod.minmax(),
                    metrics=("mae", "mse", "psnr", "ssim", "ms_ssim", "cw_ssim")),
            Variant("zscore", chain=chain, norm=NormMethod.zscore(),
                    metrics=("mae", "mse", "psnr", "ssim", "ms_ssim", "cw_ssim")),
            Variant("binned_256", chain=chain, prebin=256),
            Variant("nmi_bins_128", chain=chain, nmi_bins=128, metrics=("nmi",)),
            Variant("nmi_bins_512", chain=chain, nmi_bins=512, metrics=("nmi",)),
        ]
    elif scenario_id == "pitfall2":
        variants = [
            Variant(f"shift_{k}px",
                    chain=(DistortionSpec("translate", {"shift": (k, 0)}),))
            for k in (1, 2, 3, 4)
        ]
    elif scenario_id == "pitfall3":
        chain = (DistortionSpec("mirror_replace", {"axis": 0}),)
        # 4 scales so ms_ssim fits the bounding-box crops at every scale
        variants = [
            Variant("full", chain=chain, metrics=PANEL_WINDOW_SAFE, ms_scales=4),
            Variant("crop_3pct", chain=chain, metrics=PANEL_WINDOW_SAFE,
                    mask_mode="crop_fraction", crop_frac=0.03, ms_scales=4),
            Variant("bbox_crop", chain=chain, metrics=PANEL_WINDOW_SAFE,
                    mask_mode="bbox", ms_scales=4),
            Variant("foreground_mask", chain=chain, metrics=PANEL_POINTWISE,
                    mask_mode="foreground"),
        ]
    elif scenario_id == "pitfall4":
        bases = {
            "clean": (),
            "stripes": (DistortionSpec("stripes",
                                       {"period": 8, "amplitude_rel": 0.25, "axis": 0}),),
            "noise": (DistortionSpec("gaussian_noise", {"sigma_rel": 0.05}, seed=7),),
            "mirror": (DistortionSpec("mirror_replace", {"axis": 0}),),
        }
        panel = ("mae", "mse", "psnr", "ssim", "ms_ssim", "nmi")
        variants = []
        for name, chain in bases.items():
            variants.append(Variant(name, chain=chain, metrics=panel))
            for sigma in (0.5, 1.0, 2.0):
                blurred = chain + (DistortionSpec("gaussian_blur", {"sigma": sigma}),)
                variants.append(Variant(f"{name}_blur_{sigma}", chain=blurred,
                                        metrics=panel))
    elif scenario_id == "pitfall5":
        chain = (DistortionSpec("mirror_replace", {"axis": 0}),)
        variants = [
            Variant("image_metrics", chain=chain),
            Variant("proxy_task", chain=chain, metrics=("dice",)),
        ]
    else:
        raise ConfigError(f"unknown scenario id {scenario_id!r}")
    return Scenario(scenario_id, tuple(variants))


# ---------------------------------------------------------------------------
# Evaluation pipeline
# ---------------------------------------------------------------------------

def _prepare_pair(phantom: Phantom, variant: Variant) -> tuple[Image, Image]:
    ref = phantom.image
    test = apply_chain(variant.case_chain(phantom), ref)
    if variant.norm.kind != "none":
        ref = normalize(ref, variant.norm)
        test = normalize(test, variant.norm)
    if variant.prebin:
        ref = bin_quantize(ref, variant.prebin)
        test = bin_quantize(test, variant.prebin)
    return ref, test


def _evaluate_one(phantom: Phantom, variant: Variant, metric_id: str,
                  segmenter: SegmenterParams) -> MetricScore:
    ref, test = _prepare_pair(phantom, variant)
    ctx = variant.ctx()
    if metric_id == "dice":
        return task_similarity(ref, test, segmenter)
    if variant.mask_mode == "none":
        return evaluate(metric_id, ref, test, ctx)
    if variant.mask_mode == "crop_fraction":
        return evaluate(metric_id, crop_fraction(ref, variant.crop_frac),
                        crop_fraction(test, variant.crop_frac), ctx)
    if variant.mask_mode == "bbox":
        rect = bounding_box(phantom.foreground_mask)
        return evaluate(metric_id, crop(ref, rect), crop(test, rect), ctx)
    # foreground mask
    return masked_evaluate(metric_id, ref, test, phantom.foreground_mask, ctx)


def _case_id(phantom: Phantom) -> str:
    return f"case_{phantom.seed}"


def run_scenario(scenario: Scenario, phantoms: Sequence[Phantom],
                 config: HarnessConfig | None = None) -> Report:
    """Evaluate every variant of ``scenario`` on every phantom.

    Appends mean rows (case_id ``"mean"``) per (variant, metric). Row order
    is deterministic: sorted by (case_id, variant, metric_id), means last.
    """
    if not phantoms:
        raise ConfigError("run_scenario needs a non-empty phantom list")
    config = config or HarnessConfig()
    report = Report()
    scores: dict[tuple[str, str], list[float]] = {}
    for variant in scenario.variants:
        for phantom in phantoms:
            pipe_fp = variant.pipeline_fingerprint(phantom)
            for metric_id in variant.metrics:
                try:
                    score = _evaluate_one(phantom, variant, metric_id,
                                          config.segmenter)
                except ConfigError as exc:
                    raise ConfigError(
                        f"scenario {scenario.scenario_id}, variant "
                        f"{variant.label!r}: {exc}") from exc
                fp = merge_fingerprints(score.params_fingerprint, pipe_fp)
                report.rows.append(Row(_case_id(phantom), scenario.scenario_id,
                                       variant.label, metric_id, fp, score.value))
                scores.setdefault((variant.label, metric_id), []).append(score.value)
        ref, test = _prepare_pair(phantoms[0], variant)
        plan = EvalPlan(metrics=variant.metrics, norm=variant.norm,
                        range_policy=variant.range_policy, prebin=variant.prebin,
                        nmi_bins=variant.nmi_bins, chain=variant.chain,
                        mask=phantoms[0].foreground_mask
                        if variant.mask_mode == "foreground" else None)
        for lint in lint_configuration(ref, test, plan):
            report.lints.append(replace(
                lint, message=f"[{scenario.scenario_id}/{variant.label}] {lint.message}"))
    report.rows.sort(key=lambda r: (r.case_id, r.variant, r.metric_id))
    mean_rows = []
    for variant in scenario.variants:
        for metric_id in variant.metrics:
            vals = scores[(variant.label, metric_id)]
            fp = fingerprint(aggregate="mean", n=len(vals))
            mean_rows.append(Row("mean", scenario.scenario_id, variant.label,
                                 metric_id, fp, float(np.mean(vals))))
    mean_rows.sort(key=lambda r: (r.variant, r.metric_id))
    report.rows.extend(mean_rows)
    return report


def reevaluate_row(row: Row, config: HarnessConfig | None = None) -> float:
    """Recompute one report row from its coordinates (reproducibility check)."""
    config = config or HarnessConfig()
    scenario = builtin_scenario(row.scenario)
    variant = next((v for v in scenario.variants if v.label == row.variant), None)
    if variant is None:
        raise ConfigError(f"no variant {row.variant!r} in {row.scenario}")
    if not row.case_id.startswith("case_"):
        raise ConfigError(f"cannot re-evaluate aggregate row {row.case_id!r}")
    seed = int(row.case_id[len("case_"):])
    phantom = generate_phantom(seed, config.phantom_params)
    score = _evaluate_one(phantom, variant, row.metric_id, config.segmenter)
    fp = merge_fingerprints(score.params_fingerprint,
                            variant.pipeline_fingerprint(phantom))
    if fp != row.params_fingerprint:
        raise ConfigError(
            f"fingerprint mismatch for {row.case_id}/{row.variant}/{row.metric_id}: "
            f"{fp} != {row.params_fingerprint}")
    return score.value


# ---------------------------------------------------------------------------
# Lint engine
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EvalPlan:
    """What a caller intends to do; linted before scores are trusted."""

    metrics: tuple[str, ...]
    norm: NormMethod = field(default_factory=NormMethod.none)
    range_policy: DataRangePolicy = field(default_factory=DataRangePolicy.joint)
    prebin: int | None = None
    nmi_bins: int = 256
    chain: tuple[DistortionSpec, ...] = ()
    mask: Mask | None = None


_ERROR_METRICS = frozenset({"mae", "mse", "psnr"})
_RANGE_TOL = 0.05


def _ranges_differ(ref: Image, test: Image) -> bool:
    span_r = float(ref.data.max()) - float(ref.data.min())
    span_t = float(test.data.max()) - float(test.data.min())
    scale = max(abs(span_r), abs(span_t))
    return scale > 0 and abs(span_r - span_t) > _RANGE_TOL * scale


def lint_configuration(ref: Image, test: Image, plan: EvalPlan) -> list[Lint]:
    """W01..W05 pitfall checks; lints are data and never change scores."""
    lints: list[Lint] = []
    differ = _ranges_differ(ref, test)
    if differ and plan.norm.kind == "none" and plan.prebin is None:
        lints.append(Lint("warning", "W01",
                          "image intensity ranges differ by more than 5% and no "
                          "normalization is configured; scores will mix range "
                          "effects with content differences"))
    if differ and plan.range_policy.kind in ("ref", "test"):
        lints.append(Lint("warning", "W02",
                          f"per-image data-range policy ({plan.range_policy.kind}) "
                          "while image ranges differ; SSIM/PSNR depend directly "
                          "on the chosen range"))
    if plan.mask is not None and rect_of_mask(plan.mask) is None:
        windowed = [m for m in plan.metrics if m in registered_metrics()
                    and metric_kind(m) == "windowed"]
        if windowed:
            lints.append(Lint("error", "W03",
                              f"non-rectangular mask with windowed metrics "
                              f"{windowed}; windowed metrics support only masks "
                              "that are exactly a filled rectangle (evaluated as "
                              "a crop)"))
    if plan.prebin is not None and "nmi" in plan.metrics \
            and plan.prebin != plan.nmi_bins:
        lints.append(Lint("warning", "W04",
                          f"nmi internal bins ({plan.nmi_bins}) differ from "
                          f"pre-binning bins ({plan.prebin}); non-matching bin "
                          "counts artificially reduce similarity (binned images "
                          "are scored on integer bin indices)"))
    has_blur = any(spec.kind == "gaussian_blur" for spec in plan.chain)
    if has_blur and plan.metrics and set(plan.metrics) <= _ERROR_METRICS:
        lints.append(Lint("warning", "W05",
                          "metric panel contains only error metrics while a blur "
                          "distortion is configured; error metrics favor blurred "
                          "images, add a dependency metric such as nmi"))
    return lints

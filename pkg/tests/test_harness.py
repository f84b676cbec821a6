import math

import numpy as np
import pytest

from refmet.distort import DistortionSpec
from refmet.errors import ConfigError
from refmet.harness import (EvalPlan, HarnessConfig, SCENARIO_IDS, Variant,
                            builtin_scenario, generate_phantoms,
                            lint_configuration, reevaluate_row, run_scenario)
from refmet.image import Image, Mask
from refmet.normalize import DataRangePolicy, NormMethod
from refmet.phantom import PhantomParams, generate_phantom
from refmet.report import (Report, Row, read_report_csv, render_csv,
                           render_markdown, write_report)

CFG = HarnessConfig(phantom_count=3)


@pytest.fixture(scope="module")
def small_phantoms():
    return generate_phantoms(CFG)


@pytest.fixture(scope="module")
def pitfall1_report(small_phantoms):
    return run_scenario(builtin_scenario("pitfall1"), small_phantoms, CFG)


def test_builtin_ids_all_construct():
    for sid in SCENARIO_IDS:
        s = builtin_scenario(sid)
        assert s.variants
    with pytest.raises(ConfigError):
        builtin_scenario("pitfall6")


def test_pitfall1_emits_three_range_policies(small_phantoms, pitfall1_report):
    ssim_rows = [r for r in pitfall1_report.rows
                 if r.metric_id == "ssim" and r.case_id == "case_1000"]
    fps = {r.params_fingerprint for r in ssim_rows
           if r.variant.startswith("none_")}
    assert len(fps) == 3  # joint, ref, test resolve to distinct fingerprints
    policies = {v for fp in fps for v in fp.split(";") if v.startswith("range_policy=")}
    assert policies == {"range_policy=joint", "range_policy=ref",
                        "range_policy=test"}


def test_variant_labels_are_fixed_strings():
    # stable external contract: tooling may key on these labels
    expected = {
        "pitfall1": ["none_joint", "none_range_ref", "none_range_test",
                     "minmax", "zscore", "binned_256",
                     "nmi_bins_128", "nmi_bins_512"],
        "pitfall2": ["shift_1px", "shift_2px", "shift_3px", "shift_4px"],
        "pitfall3": ["full", "crop_3pct", "bbox_crop", "foreground_mask"],
        "pitfall4": ["clean", "clean_blur_0.5", "clean_blur_1.0", "clean_blur_2.0",
                     "stripes", "stripes_blur_0.5", "stripes_blur_1.0",
                     "stripes_blur_2.0",
                     "noise", "noise_blur_0.5", "noise_blur_1.0", "noise_blur_2.0",
                     "mirror", "mirror_blur_0.5", "mirror_blur_1.0",
                     "mirror_blur_2.0"],
        "pitfall5": ["image_metrics", "proxy_task"],
    }
    for sid, labels in expected.items():
        assert [v.label for v in builtin_scenario(sid).variants] == labels


def test_empty_phantom_list_rejected():
    with pytest.raises(ConfigError):
        run_scenario(builtin_scenario("pitfall1"), [], CFG)


def test_run_scenario_deterministic(small_phantoms):
    a = run_scenario(builtin_scenario("pitfall5"), small_phantoms, CFG)
    b = run_scenario(builtin_scenario("pitfall5"), small_phantoms, CFG)
    assert a.rows == b.rows
    assert a.lints == b.lints


def test_rows_sorted_and_means_last(pitfall1_report):
    rows = pitfall1_report.rows
    case_rows = [r for r in rows if r.case_id != "mean"]
    keys = [(r.case_id, r.variant, r.metric_id) for r in case_rows]
    assert keys == sorted(keys)
    tail = rows[len(case_rows):]
    assert tail and all(r.case_id == "mean" for r in tail)


def test_mean_rows_match_case_means(pitfall1_report):
    rows = pitfall1_report.rows
    for mean_row in [r for r in rows if r.case_id == "mean"][:5]:
        vals = [r.score for r in rows
                if r.case_id != "mean" and r.variant == mean_row.variant
                and r.metric_id == mean_row.metric_id]
        assert mean_row.score == pytest.approx(float(np.mean(vals)), abs=1e-15)


def test_rows_reproducible_from_fingerprint(pitfall1_report):
    rows = [r for r in pitfall1_report.rows if r.case_id != "mean"]
    for row in rows[::17]:
        assert reevaluate_row(row, CFG) == pytest.approx(row.score, abs=1e-12)


def test_noise_seeds_vary_per_case(small_phantoms):
    rep = run_scenario(builtin_scenario("pitfall4"), small_phantoms, CFG)
    noise_fps = {r.params_fingerprint for r in rep.rows
                 if r.variant == "noise" and r.metric_id == "mse"
                 and r.case_id != "mean"}
    assert len(noise_fps) == len(small_phantoms)


def test_proxy_task_dice_zero(small_phantoms):
    rep = run_scenario(builtin_scenario("pitfall5"), small_phantoms, CFG)
    dice_rows = [r for r in rep.rows
                 if r.variant == "proxy_task" and r.case_id != "mean"]
    assert dice_rows and all(r.score == 0.0 for r in dice_rows)


def test_harness_config_json_roundtrip():
    cfg = HarnessConfig.from_json({
        "phantoms": {"count": 4, "seed": 9, "dims": [96, 96]},
        "scenarios": ["pitfall2"],
        "segmenter": {"threshold_rel": 0.9},
        "output": {"dir": "out", "formats": ["csv"]},
    })
    assert cfg.phantom_count == 4
    assert cfg.phantom_params.dims == (96, 96)
    assert cfg.segmenter.threshold_rel == 0.9
    assert cfg.scenarios == ("pitfall2",)
    with pytest.raises(ConfigError):
        HarnessConfig.from_json({"unknown_key": 1})


# --- report serialization ---------------------------------------------------

def test_empty_report_is_header_only(tmp_path):
    write_report(Report(), tmp_path / "r.csv", "csv")
    text = (tmp_path / "r.csv").read_text()
    assert text == "case_id,scenario,variant,metric_id,params_fingerprint,score\n"


def test_single_row_report(tmp_path):
    rep = Report(rows=[Row("c", "s", "v", "mae", "", 0.5)])
    write_report(rep, tmp_path / "r.csv", "csv")
    assert len((tmp_path / "r.csv").read_text().splitlines()) == 2


def test_csv_roundtrip(tmp_path, pitfall1_report):
    write_report(pitfall1_report, tmp_path / "r.csv", "csv")
    back = read_report_csv(tmp_path / "r.csv")
    assert back.rows == pitfall1_report.rows


def test_psnr_inf_serialized_as_inf(tmp_path):
    rep = Report(rows=[Row("c", "s", "clean", "psnr", "", math.inf)])
    text = render_csv(rep)
    assert text.splitlines()[1].endswith(",inf")
    write_report(rep, tmp_path / "r.csv", "csv")
    assert read_report_csv(tmp_path / "r.csv").rows[0].score == math.inf


def test_markdown_one_table_per_scenario(small_phantoms):
    rep = Report()
    for sid in ("pitfall2", "pitfall5"):
        rep.extend(run_scenario(builtin_scenario(sid), small_phantoms[:1], CFG))
    md = render_markdown(rep)
    assert "## pitfall2" in md and "## pitfall5" in md
    assert "| metric |" in md


# --- lint engine ------------------------------------------------------------

def _const_pair(span_ref=1.0, span_test=1.0):
    ref = Image(np.linspace(0, span_ref, 64).reshape(8, 8))
    test = Image(np.linspace(0, span_test, 64).reshape(8, 8))
    return ref, test


def _codes(lints):
    return sorted(l.code for l in lints)


def test_lint_clean_config_silent():
    ref, test = _const_pair(1.0, 1.0)
    plan = EvalPlan(metrics=("ssim", "nmi"), norm=NormMethod.minmax())
    assert lint_configuration(ref, test, plan) == []


def test_w01_fires_on_range_mismatch_without_norm():
    ref, test = _const_pair(1.0, 255.0)
    plan = EvalPlan(metrics=("ssim",))
    assert "W01" in _codes(lint_configuration(ref, test, plan))


def test_w01_silent_with_normalization():
    ref, test = _const_pair(1.0, 255.0)
    plan = EvalPlan(metrics=("ssim",), norm=NormMethod.minmax())
    assert "W01" not in _codes(lint_configuration(ref, test, plan))


def test_w02_fires_on_per_image_policy():
    ref, test = _const_pair(1.0, 1.3)
    plan = EvalPlan(metrics=("psnr",), norm=NormMethod.minmax(),
                    range_policy=DataRangePolicy.ref())
    assert _codes(lint_configuration(ref, test, plan)) == ["W02"]


def test_w02_silent_when_ranges_match():
    ref, test = _const_pair(1.0, 1.0)
    plan = EvalPlan(metrics=("psnr",), range_policy=DataRangePolicy.ref())
    assert "W02" not in _codes(lint_configuration(ref, test, plan))


def test_w03_error_grade_on_checkerboard_with_ssim():
    ref, test = _const_pair()
    checker = Mask(np.indices(ref.shape).sum(axis=0) % 2 == 0)
    plan = EvalPlan(metrics=("ssim", "mae"), norm=NormMethod.minmax(), mask=checker)
    lints = lint_configuration(ref, test, plan)
    assert _codes(lints) == ["W03"]
    assert lints[0].severity == "error"


def test_w03_silent_for_rect_mask_or_pointwise():
    ref, test = _const_pair()
    rect = np.zeros(ref.shape, dtype=bool)
    rect[2:6, 2:6] = True
    plan = EvalPlan(metrics=("ssim",), norm=NormMethod.minmax(), mask=Mask(rect))
    assert lint_configuration(ref, test, plan) == []
    checker = Mask(np.indices(ref.shape).sum(axis=0) % 2 == 0)
    plan = EvalPlan(metrics=("mae", "nmi"), norm=NormMethod.minmax(), mask=checker)
    assert lint_configuration(ref, test, plan) == []


def test_w04_fires_on_bin_mismatch():
    ref, test = _const_pair()
    plan = EvalPlan(metrics=("nmi",), prebin=256, nmi_bins=128)
    assert "W04" in _codes(lint_configuration(ref, test, plan))


def test_w04_silent_on_matching_bins():
    ref, test = _const_pair()
    plan = EvalPlan(metrics=("nmi",), prebin=256, nmi_bins=256)
    assert "W04" not in _codes(lint_configuration(ref, test, plan))


def test_w05_fires_on_error_only_panel_with_blur():
    ref, test = _const_pair()
    chain = (DistortionSpec("gaussian_blur", {"sigma": 1.0}),)
    plan = EvalPlan(metrics=("mae", "mse", "psnr"), norm=NormMethod.minmax(),
                    chain=chain)
    assert _codes(lint_configuration(ref, test, plan)) == ["W05"]


def test_w05_silent_with_dependency_metric():
    ref, test = _const_pair()
    chain = (DistortionSpec("gaussian_blur", {"sigma": 1.0}),)
    plan = EvalPlan(metrics=("mae", "nmi"), norm=NormMethod.minmax(), chain=chain)
    assert "W05" not in _codes(lint_configuration(ref, test, plan))

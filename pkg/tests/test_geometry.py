"""Fundamental forms, curvatures and the verification invariants."""

import numpy as np
import pytest

from dpw import geometry
from dpw.factor import GaugeData
from dpw.geometry import (
    DegeneratePoint,
    closed_form_det,
    curvatures,
    fundamental_forms_numeric,
    gauss_codazzi_residual,
    harmonicity_residual,
    invariant_report,
    predicted_forms,
)
from dpw.potential import GridTooSmall
from dpw.sym import SpectralPoint, SurfacePatch


def _form_scale(h, I):
    return max(1e-4, 10.0 * h**2 * float(np.abs(I).max()))


@pytest.mark.parametrize(
    "fixture", ["small_c1_run", "small_c3_run", "small_s2_run", "small_c4_run"]
)
def test_numeric_forms_match_predictions(fixture, request):
    result = request.getfixturevalue(fixture)
    patch = result.patch
    forms = fundamental_forms_numeric(patch)
    I_pred, II_pred = predicted_forms(
        result.config.kind, result.gauge, patch.spectral
    )
    interior = np.s_[1:-1, 1:-1]
    h = patch.x_axis[1] - patch.x_axis[0]
    assert np.abs(forms.I - I_pred[interior].real).max() < _form_scale(h, I_pred)
    assert np.abs(I_pred.imag).max() < 1e-8
    assert np.abs(forms.II - II_pred[interior].real).max() < _form_scale(h, II_pred)


@pytest.mark.parametrize(
    "fixture", ["small_c1_run", "small_c3_run", "small_s2_run", "small_c4_run"]
)
def test_closed_form_det_matches_predicted_form(fixture, request):
    """The closed-form determinant agrees with det of the predicted first form."""
    result = request.getfixturevalue(fixture)
    I_pred, _ = predicted_forms(result.config.kind, result.gauge, result.patch.spectral)
    det_pred = np.linalg.det(I_pred)
    det_closed = closed_form_det(result.config.kind, result.gauge, result.patch.spectral)
    rel = np.abs(det_pred - det_closed) / np.abs(det_closed)
    assert rel.max() < 1e-10


def test_curvature_constant_on_run(small_c3_run):
    forms = fundamental_forms_numeric(small_c3_run.patch)
    curv = curvatures(forms)
    assert curv.sign == 1.0
    assert np.abs(curv.K - 4.0).max() < 1e-4


def test_gauss_codazzi_zero_for_exact_constant_data():
    """Constant data with 2 Q R = H^2 / 2 solves the structure equations exactly."""
    shape = (7, 7)
    H = 1.0
    gauge = GaugeData(
        ell=np.ones(shape, dtype=complex),
        u=np.zeros(shape, dtype=complex),
        Q=np.full(shape, 0.5 * H, dtype=complex),
        R=np.full(shape, 0.5 * H, dtype=complex),
        H=H,
    )
    assert gauss_codazzi_residual("c3", gauge, 0.01, 0.01) == pytest.approx(0.0)
    assert gauss_codazzi_residual("s3", gauge, 0.01, 0.01) == pytest.approx(0.0)


def test_gauss_codazzi_small_on_runs(small_c3_run, small_s2_run, small_c4_run):
    for result in (small_c3_run, small_s2_run, small_c4_run):
        dom = result.config.domain
        resid = gauss_codazzi_residual(result.config.kind, result.gauge, dom.dx, dom.dy)
        assert resid < 1e-4


@pytest.mark.parametrize(
    "fixture", ["small_c3_run", "small_s2_run", "small_c4_run"]
)
def test_harmonicity_residual_small(fixture, request):
    result = request.getfixturevalue(fixture)
    resid, rho = harmonicity_residual(result.patch)
    assert resid < 1e-3
    rho = np.asarray(rho)
    assert np.abs(rho.imag).max() < 1e-3 * (1.0 + np.abs(rho).max())


def test_harmonicity_negative_control(small_c3_run):
    """Tangential noise on the Gauss map must break the proportionality."""
    patch = small_c3_run.patch
    rng = np.random.default_rng(50)
    eps = geometry.AMBIENT_METRIC[patch.model]
    noise = rng.standard_normal(patch.gauss.shape)
    proj = np.sum(noise * patch.gauss * eps, axis=-1) / np.sum(
        patch.gauss**2 * eps, axis=-1
    )
    tangential = noise - proj[..., None] * patch.gauss
    perturbed = SurfacePatch(
        patch.kind,
        patch.model,
        patch.points,
        patch.gauss + 1e-2 * tangential,
        patch.mats,
        patch.gauss_mats,
        patch.x_axis,
        patch.y_axis,
        patch.spectral,
        patch.absH,
    )
    resid, _ = harmonicity_residual(perturbed)
    assert resid > 1e-3


def _flat_patch(n=6):
    return SurfacePatch(
        "c3",
        "su2",
        np.zeros((n, n, 3)),
        np.zeros((n, n, 3)),
        np.zeros((n, n, 2, 2), dtype=complex),
        np.zeros((n, n, 2, 2), dtype=complex),
        np.linspace(0, 1, n),
        np.linspace(0, 1, n),
        SpectralPoint.for_class("c3"),
        1.0,
    )


def test_degenerate_point_detection():
    with pytest.raises(DegeneratePoint) as exc:
        fundamental_forms_numeric(_flat_patch())
    assert len(exc.value.indices) == 16


def test_grid_too_small():
    with pytest.raises(GridTooSmall):
        fundamental_forms_numeric(_flat_patch(4))
    with pytest.raises(GridTooSmall):
        harmonicity_residual(_flat_patch(3))


def test_invariant_report_structure(small_c3_run):
    report = small_c3_run.report
    for key in (
        "class",
        "K_mean",
        "K_std",
        "H_mean",
        "gc_residual",
        "harmonicity_residual",
        "degenerate_points",
        "bigcell_failures",
        "checks",
        "ok",
    ):
        assert key in report
    assert report["class"] == "c3"
    assert report["K_expected"] == pytest.approx(4.0)
    assert report["ok"] is True
    assert all(report["checks"].values())


def test_invariant_report_flags_failures(small_c3_run):
    result = small_c3_run
    report = invariant_report(
        "c3",
        result.patch,
        result.gauge,
        result.patch.spectral,
        bigcell_failures=[(0, 0)],
        tolerances={"gc": 1e-30},
    )
    assert report["checks"]["no_bigcell_failures"] is False
    assert report["checks"]["gc_residual"] is False
    assert report["ok"] is False


def test_invariant_report_c4_checks(small_c4_run):
    report = small_c4_run.report
    assert "H_expected" in report
    assert report["H_expected"] == pytest.approx(np.tanh(-0.2))
    assert abs(report["H_mean"] - np.tanh(-0.2)) < 1e-4
    assert report["ok"] is True

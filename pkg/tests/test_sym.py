"""Immersion formulas, identifications and the parallel surface."""

import numpy as np
import pytest

from dpw import geometry, loopalg, sym
from dpw.realform import ClassMismatch
from dpw.sym import (
    CLASS_MODEL,
    NoParallelSurface,
    SpectralPoint,
    SurfacePatch,
    matrix_from_vector,
    metric_form,
    parallel_surface,
    sym_complex,
    vector_from_matrix,
)

from conftest import random_twisted


def test_spectral_point_values():
    assert SpectralPoint.for_class("c3", t=0.5).lam == pytest.approx(np.exp(0.5j))
    assert SpectralPoint.for_class("c1", t=0.0).lam == pytest.approx(1.0)
    # the radius parameter only enters for the hyperbolic-ambient class
    assert SpectralPoint.for_class("c1", t=0.0, q=0.7).lam == pytest.approx(1.0)
    assert SpectralPoint.for_class("c4", t=0.3, q=0.4).lam == pytest.approx(
        np.exp(0.2 + 0.3j)
    )
    assert SpectralPoint.for_class("s2", t=0.25).lam == pytest.approx(np.exp(0.25))
    assert SpectralPoint.for_class("s1", t=0.25, sign=-1).lam == pytest.approx(
        -np.exp(0.25)
    )


@pytest.mark.parametrize("model", ["su2", "su11", "sl2star", "herm"])
def test_identification_roundtrip(model):
    rng = np.random.default_rng(40)
    dim = 4 if model == "herm" else 3
    vecs = rng.standard_normal((6, dim))
    mats = matrix_from_vector(model, vecs)
    back = vector_from_matrix(model, mats)
    assert np.allclose(back, vecs, atol=1e-12)


@pytest.mark.parametrize("model", ["su2", "su11", "sl2star", "herm"])
def test_metric_form_matches_diagonal_metric(model):
    rng = np.random.default_rng(41)
    dim = 4 if model == "herm" else 3
    eps = geometry.AMBIENT_METRIC[model]
    a = rng.standard_normal(dim)
    b = rng.standard_normal(dim)
    val = metric_form(model, matrix_from_vector(model, a), matrix_from_vector(model, b))
    assert val == pytest.approx(np.sum(eps * a * b), abs=1e-12)


def test_sym_complex_relation_between_immersions():
    rng = np.random.default_rng(42)
    F = loopalg.exp_series(random_twisted(rng, scale=0.3), kcap=12)
    H = 0.8 - 0.3j
    for lam in [1.0, np.exp(0.7j), 1.4]:
        Psi, Phi, N = sym_complex(F, H, lam)
        assert np.abs(Psi - Phi + N / (2.0 * H)).max() < 1e-13
        # the Gauss map is a square root of -(1/4) id
        assert np.allclose(N @ N, -0.25 * np.eye(2), atol=1e-10)


def test_sym_real_rejects_asymmetric_frames():
    rng = np.random.default_rng(43)
    frames = np.empty((1, 1), dtype=object)
    frames[0, 0] = loopalg.exp_series(random_twisted(rng, scale=0.4), kcap=12)
    sp = SpectralPoint.for_class("c3")
    with pytest.raises(ClassMismatch):
        sym.sym_real("c3", frames, np.zeros(1), np.zeros(1), sp, 1.0)


def test_patch_models(small_c3_run, small_c4_run):
    patch3 = small_c3_run.patch
    assert patch3.model == "su2"
    assert patch3.points.shape[-1] == 3
    assert patch3.harmonic_mats is None
    patch4 = small_c4_run.patch
    assert patch4.model == "herm"
    assert patch4.points.shape[-1] == 4
    assert patch4.harmonic_mats is not None
    # hyperboloid constraint <X, X> = -1 in the R^{3,1} identification
    eps = geometry.AMBIENT_METRIC["herm"]
    quad = np.sum(eps * patch4.points**2, axis=-1)
    assert np.abs(quad + 1.0).max() < 1e-8


def test_gauss_map_is_unit(small_c3_run, small_s2_run):
    for result, expected in ((small_c3_run, 1.0), (small_s2_run, -1.0)):
        patch = result.patch
        norms = metric_form(patch.model, patch.gauss_mats, patch.gauss_mats)
        assert np.abs(norms - expected).max() < 1e-8


def test_parallel_surface_mean_curvature(small_c3_run):
    par = parallel_surface(small_c3_run.patch)
    assert par.kind == "c3-parallel"
    forms = geometry.fundamental_forms_numeric(par)
    curv = geometry.curvatures(forms)
    # the shared Gauss map points away from the parallel patch, so the mean
    # curvature comes out with |H| magnitude up to orientation
    assert abs(np.abs(curv.H_mean.mean()) - 1.0) < 2e-4


def test_no_parallel_surface(small_c4_run):
    with pytest.raises(NoParallelSurface):
        parallel_surface(small_c4_run.patch)
    dummy = SurfacePatch(
        "c2",
        "sl2star",
        np.zeros((2, 2, 3)),
        np.zeros((2, 2, 3)),
        np.zeros((2, 2, 2, 2), dtype=complex),
        np.zeros((2, 2, 2, 2), dtype=complex),
        np.zeros(2),
        np.zeros(2),
        SpectralPoint.for_class("c2"),
        1.0,
    )
    with pytest.raises(NoParallelSurface):
        parallel_surface(dummy)


def test_class_model_table_consistency():
    assert set(CLASS_MODEL) == {"c1", "c2", "c3", "c4", "s1", "s2", "s3"}
    for kind, (model, ell) in CLASS_MODEL.items():
        if kind == "c4":
            assert model == "herm" and ell is None
        else:
            assert ell in (1j, 1.0)

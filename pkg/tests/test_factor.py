"""Birkhoff splitting, the two-frame factorization and the diagonal gauge."""

import numpy as np
import pytest

from dpw import factor, loopalg, realform

from conftest import random_twisted

CIRCLE = np.exp(1j * np.linspace(0.0, 2.0 * np.pi, 9, endpoint=False))


def _near_identity_loop(rng, scale=0.2):
    return loopalg.exp_series(random_twisted(rng, scale=scale), kcap=12)


def test_birkhoff_split_structure_and_residual():
    rng = np.random.default_rng(30)
    M = _near_identity_loop(rng)
    Vplus, Vminus, cond = factor.birkhoff_split(M)
    assert Vplus.kmin == 0
    assert Vminus.kmax <= 0
    assert np.allclose(Vminus.coeff(0), np.eye(2), atol=1e-9)
    # V_plus * M = V_minus pointwise on the circle
    for lam in CIRCLE[:4]:
        lhs = loopalg.evaluate(Vplus, lam) @ loopalg.evaluate(M, lam)
        assert np.allclose(lhs, loopalg.evaluate(Vminus, lam), atol=1e-7)
    assert cond < factor.BIGCELL_COND


def test_birkhoff_outside_big_cell():
    bad = loopalg.from_terms(
        {
            -2: np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex),
            2: np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex),
        }
    )
    with pytest.raises(factor.OutsideBigCell):
        factor.birkhoff_split(bad)
    with pytest.raises(factor.OutsideBigCell):
        factor.generalized_iwasawa(loopalg.identity(), bad, kcap=8)


def test_plus_inverse():
    rng = np.random.default_rng(31)
    base = _near_identity_loop(rng)
    V = loopalg.LaurentMatrix(
        0, base.coeffs[-base.kmin :].copy(), twisted=True
    )
    Vi = factor.plus_inverse(V, kcap=10)
    prod = loopalg.mul(V, Vi, kcap=10)
    resid = loopalg.wiener_norm(loopalg.sub(prod, loopalg.identity()))
    assert resid < 1e-10

    with pytest.raises(loopalg.NotInvertible):
        factor.plus_inverse(loopalg.from_terms({-1: np.array([[0, 1], [1, 0]])}))
    singular = loopalg.from_terms({0: np.zeros((2, 2))})
    with pytest.raises(loopalg.NotInvertible):
        factor.plus_inverse(singular)


def test_generalized_iwasawa_reconstruction():
    rng = np.random.default_rng(32)
    C = _near_identity_loop(rng)
    L = realform.involute_group("c3", C, kcap=12)
    sr = factor.generalized_iwasawa(C, L, kcap=12)
    assert sr.residual < 1e-8
    # C = F V_plus^{-1} and L = F V_minus pointwise
    for lam in CIRCLE[:4]:
        Fv = loopalg.evaluate(sr.F, lam)
        assert np.allclose(
            Fv, loopalg.evaluate(C, lam) @ np.linalg.inv(loopalg.evaluate(sr.Vplus, lam)),
            atol=1e-7,
        )
        assert np.allclose(
            loopalg.evaluate(L, lam), Fv @ loopalg.evaluate(sr.Vminus, lam), atol=1e-7
        )


def test_symmetrize_frame_makes_unitary_loop():
    """After absorbing the constant diagonal defect the frame is unitary on
    the circle, certified against the pointwise QR factorization."""
    rng = np.random.default_rng(33)
    C = _near_identity_loop(rng)
    L = realform.involute_group("c3", C, kcap=12)
    sr = factor.generalized_iwasawa(C, L, kcap=12)
    Fsym, defect = factor.symmetrize_frame("c3", sr.F, kcap=12)
    assert defect.shape == (2, 2)
    for lam in CIRCLE:
        Fv = loopalg.evaluate(Fsym, lam)
        Qm, Rm = np.linalg.qr(Fv)
        phases = np.diag(np.diag(Rm) / np.abs(np.diag(Rm)))
        assert np.abs(Fv - Qm @ phases).max() < 1e-9


def test_continuous_log_unwinds_phases():
    angles = np.linspace(0.0, 6.0 * np.pi, 50)
    values = np.exp(1j * angles)
    logs = factor._continuous_log(values, np.log(values[0]))
    assert np.allclose(np.exp(logs), values, atol=1e-12)
    assert np.all(np.abs(np.diff(logs.imag)) < np.pi)
    assert logs[-1].imag == pytest.approx(6.0 * np.pi)


def test_grid_continuous_log_matches_exponential():
    x = np.linspace(-1.0, 1.0, 7)
    phase = 2.5 * (x[None, :] + x[:, None])
    values = 1.3 * np.exp(1j * phase)
    logs = factor._grid_continuous_log(values, (3, 3))
    assert np.allclose(np.exp(logs), values, atol=1e-12)
    assert np.allclose(logs.imag, phase, atol=1e-12)


def test_grid_continuous_log_rejects_zero():
    with pytest.raises(factor.GaugeFailure):
        factor._grid_continuous_log(np.array([1.0, 0.0, 1.0]), (0,))


def test_gauge_fix_reality_conditions(small_c3_run):
    """The normalized data of a c3 run satisfies its reality conditions:
    u real and R the conjugate of Q."""
    gauge = small_c3_run.gauge
    assert np.abs(gauge.u.imag).max() < 1e-8
    assert np.abs(gauge.R - np.conj(gauge.Q)).max() < 1e-8
    assert gauge.H == 1.0


def test_gauge_fix_normalizes_basepoint(small_c3_run):
    """At the basepoint the gauged Maurer-Cartan entry equals -H/2 e^{u/2}."""
    result = small_c3_run
    ny, nx = result.gauge.u.shape
    b = (ny // 2, nx // 2)
    # reconstruct a12 from the splitting data as the pipeline does
    W0 = result.splits[b].Vplus.coeff(0)
    Z = result.config.domain.complex_grid()
    A = W0 @ result.pair.eta.coefficient(-1, Z[b]) @ np.linalg.inv(W0)
    model = -0.5 * result.gauge.H * np.exp(0.5 * result.gauge.u[b])
    actual = A[0, 1] / result.gauge.ell[b] ** 2
    assert actual == pytest.approx(model, rel=1e-8)

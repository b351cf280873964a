"""Loop factorization: Birkhoff splitting, the generalized two-frame
factorization, and the diagonal gauge that normalizes the Maurer-Cartan form.

The Birkhoff splitting of a twisted loop M on a band [-K, K] finds
V_plus (nonnegative degrees) and V_minus (nonpositive degrees, constant
term = id) with V_plus * M = V_minus on the truncated band.  The twisting
condition halves the unknown count and the linear system decouples into two
square solves, one per matrix row.  An ill-conditioned system signals that M
left the big cell of the factorization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import loopalg, realform
from .loopalg import LaurentMatrix, NotInvertible

#: condition-number threshold interpreted as leaving the big cell
BIGCELL_COND = 1e12


class OutsideBigCell(Exception):
    """The loop admits no splitting with the required normalization."""

    def __init__(self, message, cond=None):
        self.cond = cond
        super().__init__(message)


class GaugeFailure(Exception):
    """The diagonal gauge normalization broke down (vanishing pivot entries)."""


@dataclass
class SplitResult:
    """Outcome of the two-sided factorization at one grid point."""

    F: LaurentMatrix
    Vplus: LaurentMatrix
    Vminus: LaurentMatrix
    residual: float
    cond: float


def birkhoff_split(M, tol=1e-9):
    """Split a twisted loop as M = V_plus^{-1} V_minus on its band.

    V_plus has degrees 0..K, V_minus degrees -K..0 with constant term id,
    where K = max(|kmin|, kmax).  Returns (V_plus, V_minus, cond).  Raises
    OutsideBigCell when the defining linear system is singular or has
    condition number above BIGCELL_COND, or when the splitting residual
    (Wiener norm of the positive part of V_plus * M) exceeds ``tol``
    relative to the norm of M.
    """
    K = max(abs(M.kmin), abs(M.kmax), 1)
    ks = np.arange(0, K + 1)

    # Unknowns: entries of X_i = (V_plus)_i allowed by parity.  For matrix row
    # r, the unknown column of X_i is r when i is even and 1-r when i is odd,
    # and equation (V_plus M)_k row r lives in column r (k even) or 1-r (k
    # odd).  Each row r gives a (K+1) x (K+1) system.
    X = np.zeros((K + 1, 2, 2), dtype=complex)
    worst_cond = 0.0
    for r in (0, 1):
        ucols = np.where(ks % 2 == 0, r, 1 - r)
        ecols = ucols  # same parity rule for the equation's column index
        A = np.empty((K + 1, K + 1), dtype=complex)
        for a_idx, k in enumerate(ks):
            for u_idx, i in enumerate(ks):
                A[a_idx, u_idx] = M.coeff(k - i)[ucols[u_idx], ecols[a_idx]]
        rhs = np.zeros(K + 1, dtype=complex)
        # (V_plus M)_0 = id: diagonal entry (r, r) equals 1
        rhs[0] = 1.0
        try:
            cond = np.linalg.cond(A)
        except np.linalg.LinAlgError:
            cond = np.inf
        worst_cond = max(worst_cond, cond)
        if not np.isfinite(cond) or cond > BIGCELL_COND:
            raise OutsideBigCell(
                f"splitting system condition number {cond:.3e} exceeds {BIGCELL_COND:.1e}", cond
            )
        sol = np.linalg.solve(A, rhs)
        for u_idx, i in enumerate(ks):
            X[u_idx, r, ucols[u_idx]] = sol[u_idx]

    Vplus = LaurentMatrix(0, X, twisted=True, tail_norm=M.tail_norm)
    prod = loopalg.mul(Vplus, M)
    # V_minus is the nonpositive part of the product; the positive part is the residual
    pos_start = max(1 - prod.kmin, 0)
    resid = float(np.sum(np.max(np.abs(prod.coeffs[pos_start:]), axis=(1, 2))))
    scale = max(loopalg.wiener_norm(M), 1.0)
    if resid > tol * scale:
        raise OutsideBigCell(f"splitting residual {resid:.3e} exceeds tolerance", worst_cond)
    neg = prod.coeffs[: pos_start if pos_start > 0 else prod.coeffs.shape[0]]
    Vminus = LaurentMatrix(prod.kmin, neg.copy(), twisted=True, tail_norm=prod.tail_norm + resid)
    return Vplus, Vminus, worst_cond


def plus_inverse(V, kcap=None):
    """Inverse of a plus loop (degrees >= 0) by triangular recursion."""
    if V.kmin != 0:
        raise NotInvertible("plus_inverse expects a loop with kmin == 0")
    K = V.kmax if kcap is None else max(V.kmax, kcap)
    X = [V.coeff(k) for k in range(K + 1)]
    X0 = X[0]
    det0 = X0[0, 0] * X0[1, 1] - X0[0, 1] * X0[1, 0]
    if abs(det0) < 1e-14:
        raise NotInvertible("constant term of plus loop is singular")
    X0i = np.array([[X0[1, 1], -X0[0, 1]], [-X0[1, 0], X0[0, 0]]], dtype=complex) / det0
    Y = [X0i]
    for k in range(1, K + 1):
        acc = np.zeros((2, 2), dtype=complex)
        for i in range(1, k + 1):
            if i < len(X):
                acc += X[i] @ Y[k - i]
        Y.append(-X0i @ acc)
    return LaurentMatrix(0, np.array(Y), V.twisted, V.tail_norm)


def generalized_iwasawa(C, L, kcap=None, tol=1e-9):
    """Factor a frame pair (C, L) = (F, F) (id, W) (V_plus, V_minus).

    Solves the Birkhoff problem for M = C^{-1} L and returns the unitary-type
    frame F = C V_plus^{-1} together with the splitting data.
    """
    kc = kcap if kcap is not None else max(abs(C.kmin), C.kmax, abs(L.kmin), L.kmax)
    Ci = loopalg.inv(C, kcap=kc)
    M = loopalg.mul(Ci, L, kcap=kc)
    Vplus, Vminus, cond = birkhoff_split(M, tol=tol)
    F = loopalg.mul(C, plus_inverse(Vplus), kcap=kc)
    # residual of the reconstruction L = F V_minus
    recon = loopalg.mul(F, Vminus, kcap=kc)
    resid = loopalg.wiener_norm(loopalg.sub(recon, L))
    return SplitResult(F, Vplus, Vminus, resid, cond)


def symmetry_defect(cls, F, kcap=None):
    """The constant diagonal k with involution(F) = F k; id for a symmetric frame."""
    image = realform.involute_group(cls, F, kcap=kcap)
    Fi = loopalg.inv(F, kcap=kcap)
    k = loopalg.mul(Fi, image, kcap=kcap)
    return k.coeff(0)


def symmetrize_frame(cls, F, kcap=None):
    """Right-multiply by the square root of the symmetry defect, making the
    frame fixed by the group involution up to sign."""
    k = symmetry_defect(cls, F, kcap=kcap)
    d1, d2 = k[0, 0], k[1, 1]
    if abs(d1) < 1e-14 or abs(d2) < 1e-14:
        raise GaugeFailure("singular symmetry defect")
    root = np.diag([np.sqrt(d1), np.sqrt(d2)]).astype(complex)
    return loopalg.matmul_const(root, F, side="right"), k


@dataclass
class GaugeData:
    """Normalized Maurer-Cartan data over the grid.

    All arrays share the grid shape: the diagonal gauge entry ell (the (0,0)
    entry of the constant diagonal gauge at each point), the metric potential
    u, and the Hopf-type coefficients Q (from the z-side) and R (from the
    w-side).  H is the constant mean-curvature parameter of the run.
    """

    ell: np.ndarray
    u: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    H: complex


def _continuous_log(values, base_log):
    """Branch-continuous logarithm along a 1D array starting from base_log."""
    out = np.empty(values.shape, dtype=complex)
    prev = base_log
    for idx, v in np.ndenumerate(values):
        raw = np.log(v)
        n = np.round((prev.imag - raw.imag) / (2 * np.pi))
        cur = raw + 2j * np.pi * n
        out[idx] = cur
        prev = cur
    return out


def _grid_continuous_log(values, base_index):
    """Branch-continuous log on a grid, swept from the basepoint like the ODE."""
    values = np.asarray(values, dtype=complex)
    if np.any(np.abs(values) < 1e-300):
        raise GaugeFailure("vanishing pivot in gauge normalization")
    if values.ndim == 1:
        b = base_index[0] if isinstance(base_index, tuple) else base_index
        out = np.empty_like(values)
        out[b:] = _continuous_log(values[b:], np.log(values[b]))
        out[: b + 1] = _continuous_log(values[: b + 1][::-1], np.log(values[b]))[::-1]
        return out
    by, bx = base_index
    out = np.empty_like(values)
    row = _grid_continuous_log(values[by], (bx,))
    out[by] = row
    for j in range(values.shape[1]):
        col = _grid_continuous_log(values[:, j], (by,))
        # re-anchor the column to the spine row value
        col += out[by, j] - col[by]
        out[:, j] = col
    return out


def gauge_fix(splits, a12, a21, b12, b21, H, base_index):
    """Diagonal gauge normalization from the first-order Maurer-Cartan data.

    ``a12``/``a21`` are the entries of the conjugated degree -1 coefficient of
    the z-side of the Maurer-Cartan form (V_plus constant term acting on the
    eta coefficient), ``b12``/``b21`` the entries of the degree +1 coefficient
    of the w-side.  The gauge diag(e^{c/2}, e^{-c/2}) is fixed by requiring
    the gauged upper-right z-entry and lower-left w-entry to be opposite,
    after which u, Q, R follow algebraically; branch continuity of the
    logarithms is maintained along the sweep from the basepoint.

    Returns (gauged frame grid values, GaugeData).
    """
    a12 = np.asarray(a12, dtype=complex)
    a21 = np.asarray(a21, dtype=complex)
    b12 = np.asarray(b12, dtype=complex)
    b21 = np.asarray(b21, dtype=complex)
    if np.any(np.abs(a12) < 1e-300) or np.any(np.abs(b21) < 1e-300):
        raise GaugeFailure("vanishing distinguished Maurer-Cartan entries")

    c = 0.5 * _grid_continuous_log(-a12 / b21, base_index)
    u = _grid_continuous_log(-4.0 * a12 * b21 / H**2, base_index)
    # The gauge entry is fixed only modulo i*pi by the opposite-entry
    # condition; pin the branch so that the gauged upper-right entry equals
    # -H/2 * exp(u/2) (rather than its negative) at the basepoint.
    model = -0.5 * H * np.exp(0.5 * u[base_index])
    actual = a12[base_index] * np.exp(-c[base_index])
    if abs(actual - model) > abs(actual + model):
        c = c + 1j * np.pi
    ell = np.exp(0.5 * c)
    eu2 = np.exp(0.5 * u)
    Q = a21 * np.exp(c) * eu2
    R = -b12 * np.exp(-c) * eu2

    gauged = np.empty(splits.shape, dtype=object)
    for idx in np.ndindex(splits.shape):
        l = np.diag([ell[idx], 1.0 / ell[idx]]).astype(complex)
        gauged[idx] = loopalg.matmul_const(l, splits[idx].F, side="right")
    return gauged, GaugeData(ell, u, Q, R, H)

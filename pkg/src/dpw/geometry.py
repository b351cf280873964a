"""Numerical differential geometry of surface patches.

Fundamental forms are assembled from centered finite differences of the
immersion and its Gauss map in the real grid coordinates, using the ambient
inner product of the class's matrix model.  Closed-form predictions of the
same forms (from the normalized Maurer-Cartan data u, Q, R, H) and the
Gauss-Codazzi / harmonicity residuals provide the verification invariants.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .potential import GridTooSmall
from .sym import CLASS_MODEL

#: points with |det I| below this are flagged as degenerate
DEGENERATE_TOL = 1e-12

#: determinant sign in the Gauss curvature per class: -1 for spacelike
#: surfaces in R^{1,2}, +1 for surfaces in R^3 and timelike surfaces
CURVATURE_SIGN = {"c1": -1.0, "c2": 1.0, "c3": 1.0, "s1": -1.0, "s2": 1.0, "s3": 1.0}

#: expected constant Gauss curvature as a multiple of |H|^2
EXPECTED_K_FACTOR = {"c1": -4.0, "c2": -4.0, "c3": 4.0, "s1": 4.0, "s2": 4.0, "s3": -4.0}

#: diagonal ambient metrics of the vector identifications
AMBIENT_METRIC = {
    "su2": np.array([1.0, 1.0, 1.0]),
    "su11": np.array([1.0, -1.0, -1.0]),
    "sl2star": np.array([1.0, -1.0, -1.0]),
    "herm": np.array([1.0, 1.0, 1.0, -1.0]),
}


class DegeneratePoint(Exception):
    """The first fundamental form is singular at some grid points."""

    def __init__(self, indices):
        self.indices = indices
        first = indices[0] if indices else None
        super().__init__(f"{len(indices)} degenerate grid points (first at {first})")


@dataclass
class FundamentalForms:
    """First and second fundamental form coefficient matrices on the interior
    grid (boundary ring trimmed by the centered differences)."""

    I: np.ndarray
    II: np.ndarray
    kind: str

    @property
    def shape(self):
        return self.I.shape[:-2]


@dataclass
class CurvatureField:
    """Pointwise curvatures derived from a pair of fundamental forms."""

    K: np.ndarray
    H_mean: np.ndarray
    sign: float


def _d_x(A, dx):
    return (A[:, 2:] - A[:, :-2])[1:-1] / (2.0 * dx)


def _d_y(A, dy):
    return (A[2:] - A[:-2])[:, 1:-1] / (2.0 * dy)


def _require_interior(shape):
    if shape[0] < 5 or shape[1] < 5:
        raise GridTooSmall(f"need at least a 5x5 grid for centered differences, got {shape}")


def fundamental_forms_numeric(patch, check_degenerate=True):
    """First and second fundamental forms by centered differences.

    The second form uses only first derivatives of the immersion and the
    Gauss map, II = -<dPhi, dN>, symmetrized in the mixed entry.  Raises
    DegeneratePoint when the first form is singular beyond DEGENERATE_TOL
    (scaled by the local magnitude) at any interior point.
    """
    _require_interior(patch.points.shape[:2])
    base_kind = patch.kind.split("-")[0]
    metric = AMBIENT_METRIC[CLASS_MODEL[base_kind][0]]
    dx = patch.x_axis[1] - patch.x_axis[0]
    dy = patch.y_axis[1] - patch.y_axis[0]
    P = patch.points
    N = patch.gauss
    Px, Py = _d_x(P, dx), _d_y(P, dy)
    Nx, Ny = _d_x(N, dx), _d_y(N, dy)

    def dot(u, v):
        return np.sum(u * v * metric, axis=-1)

    shape = Px.shape[:2]
    I = np.empty(shape + (2, 2))
    I[..., 0, 0] = dot(Px, Px)
    I[..., 0, 1] = I[..., 1, 0] = dot(Px, Py)
    I[..., 1, 1] = dot(Py, Py)
    II = np.empty(shape + (2, 2))
    II[..., 0, 0] = -dot(Px, Nx)
    II[..., 0, 1] = II[..., 1, 0] = -0.5 * (dot(Px, Ny) + dot(Py, Nx))
    II[..., 1, 1] = -dot(Py, Ny)
    if check_degenerate:
        det = np.linalg.det(I)
        bad = np.argwhere(np.abs(det) < DEGENERATE_TOL)
        if bad.size:
            raise DegeneratePoint([tuple(int(v) for v in b) for b in bad])
    return FundamentalForms(I, II, patch.kind)


def predicted_forms(kind, gauge, sp):
    """Closed-form fundamental form coefficients from the Maurer-Cartan data.

    Returns (I, II) complex arrays over the full grid, in the same real
    coordinates as the numeric assembly.
    """
    u, Q, R, H = gauge.u, gauge.Q, gauge.R, gauge.H
    absH = abs(H)
    lam = sp.lam
    eu = np.exp(u)
    if kind == "c4":
        q = sp.q
        I = np.zeros(u.shape + (2, 2), dtype=complex)
        diag = -(H**2) * eu * np.cosh(q) ** 2
        I[..., 0, 0] = I[..., 1, 1] = diag
        d_ = H**2 * eu * np.cosh(q) * np.sinh(q)
        e_ = H * Q * np.cosh(q) * np.exp(-2j * sp.t)
        II = np.zeros(u.shape + (2, 2), dtype=complex)
        II[..., 0, 0] = d_ + 2.0 * e_.real
        II[..., 1, 1] = d_ - 2.0 * e_.real
        II[..., 0, 1] = II[..., 1, 0] = -2.0 * e_.imag
        return I, II
    a_ = H**2 * eu / 2.0 + 2.0 * Q * R / eu
    b_ = -(lam**-2) * H * Q
    c_ = -(lam**2) * H * R
    _, ell = CLASS_MODEL[kind]
    w = (0.25 * H**2 * eu - Q * R / eu)
    I = np.zeros(u.shape + (2, 2), dtype=complex)
    II = np.zeros(u.shape + (2, 2), dtype=complex)
    if kind.startswith("c"):
        I[..., 0, 0] = a_ + b_ + c_
        I[..., 1, 1] = a_ - b_ - c_
        I[..., 0, 1] = I[..., 1, 0] = 1j * (b_ - c_)
        I /= 2.0 * absH**2
        II[..., 0, 0] = II[..., 1, 1] = -(2j * ell / absH) * w
    else:
        I[..., 0, 0] = -b_
        I[..., 1, 1] = -c_
        I[..., 0, 1] = I[..., 1, 0] = -0.5 * a_
        I /= 2.0 * absH**2
        II[..., 0, 1] = II[..., 1, 0] = -(ell / absH) * w
    return I, II


def closed_form_det(kind, gauge, sp):
    """Closed-form determinant of the first fundamental form."""
    u, Q, R, H = gauge.u, gauge.Q, gauge.R, gauge.H
    absH = abs(H)
    w = 0.25 * H**2 * np.exp(u) - Q * R * np.exp(-u)
    if kind == "c4":
        return H**4 * np.exp(2.0 * u) * np.cosh(sp.q) ** 4
    if kind.startswith("c"):
        return w**2 / absH**4
    return -(w**2) / (4.0 * absH**4)


def curvatures(forms, kind=None):
    """Gauss curvature (with the class determinant sign) and mean curvature."""
    kind = (kind or forms.kind).split("-")[0]
    sign = CURVATURE_SIGN.get(kind, 1.0)
    S = np.linalg.solve(forms.I, forms.II)
    K = sign * np.linalg.det(S)
    H_mean = 0.5 * np.trace(S, axis1=-2, axis2=-1)
    return CurvatureField(K, H_mean, sign)


def gauss_codazzi_residual(kind, gauge, dx, dy):
    """Max over the interior grid of the summed Gauss-Codazzi defects.

    The Gauss equation u_zw - 2 R Q e^{-u} + H^2 e^u / 2 and the Codazzi
    equations Q_w and R_z (H is constant) are evaluated with centered
    differences: Wirtinger derivatives in (x, y) for the conjugate classes,
    plain partials for the split classes.
    """
    u, Q, R, H = gauge.u, gauge.Q, gauge.R, gauge.H
    _require_interior(u.shape)
    if kind.startswith("c"):
        u_xx = (u[:, 2:] - 2 * u[:, 1:-1] + u[:, :-2])[1:-1] / dx**2
        u_yy = (u[2:] - 2 * u[1:-1] + u[:-2])[:, 1:-1] / dy**2
        u_zw = 0.25 * (u_xx + u_yy)
        Q_w = 0.5 * (_d_x(Q, dx) + 1j * _d_y(Q, dy))
        R_z = 0.5 * (_d_x(R, dx) - 1j * _d_y(R, dy))
    else:
        u_zw = (u[2:, 2:] - u[2:, :-2] - u[:-2, 2:] + u[:-2, :-2]) / (4.0 * dx * dy)
        Q_w = _d_y(Q, dy)
        R_z = _d_x(R, dx)
    interior = np.s_[1:-1, 1:-1]
    gauss = u_zw - 2.0 * R[interior] * Q[interior] * np.exp(-u[interior]) + 0.5 * H**2 * np.exp(u[interior])
    total = np.abs(gauss) + np.abs(Q_w) + np.abs(R_z)
    return float(total.max())


def harmonicity_residual(patch):
    """Relative size of the component of N_zw orthogonal to N.

    The mixed derivative is the quarter-Laplacian for the conjugate classes
    and the mixed difference for the split classes.  The orthogonal component
    is extracted with the ambient metric (<N, N> = +-1), its size measured in
    the Euclidean norm relative to |N_zw| floored at a small fraction of the
    overall second-derivative scale of N: where rho is small, N_zw itself is
    near zero and a pointwise quotient would only compare rounding noise
    against itself.  The max over the interior grid is returned together with
    the proportionality factor field rho.

    Class c4's harmonic map is the matrix lift Ad(F) sigma3 carried in
    ``patch.harmonic_mats`` rather than the ambient Gauss map; the same
    proportionality is checked there with the trace pairing.
    """
    _require_interior(patch.points.shape[:2])
    base_kind = patch.kind.split("-")[0]
    dx = patch.x_axis[1] - patch.x_axis[0]
    dy = patch.y_axis[1] - patch.y_axis[0]
    if base_kind == "c4":
        N = patch.harmonic_mats

        def dot(u, v):
            return np.trace(np.matmul(u, v), axis1=-2, axis2=-1)

        def norm(m):
            return np.sqrt(np.sum(np.abs(m) ** 2, axis=(-2, -1)))

        trailing = (None, None)
    else:
        metric = AMBIENT_METRIC[CLASS_MODEL[base_kind][0]]
        N = patch.gauss

        def dot(u, v):
            return np.sum(u * v * metric, axis=-1)

        def norm(m):
            return np.sqrt(np.sum(np.abs(m) ** 2, axis=-1))

        trailing = (None,)
    N_xx = (N[:, 2:] - 2 * N[:, 1:-1] + N[:, :-2])[1:-1] / dx**2
    N_yy = (N[2:] - 2 * N[1:-1] + N[:-2])[:, 1:-1] / dy**2
    if base_kind.startswith("c"):
        T = 0.25 * (N_xx + N_yy)
    else:
        T = (N[2:, 2:] - N[2:, :-2] - N[:-2, 2:] + N[:-2, :-2]) / (4.0 * dx * dy)
    Ni = N[1:-1, 1:-1]
    rho = dot(T, Ni) / dot(Ni, Ni)
    perp = T - rho[(...,) + trailing] * Ni
    size = norm(T)
    hessian_scale = max(float(size.max()), float(norm(N_xx).max()), float(norm(N_yy).max()))
    scale = np.maximum(size, max(1e-2 * hessian_scale, 1e-300))
    resid = norm(perp) / scale
    return float(resid.max()), rho


def invariant_report(kind, patch, gauge, sp, bigcell_failures=(), tolerances=None):
    """Assemble the verification report for one run.

    Returns a plain dict (JSON-ready) with curvature statistics, the
    Gauss-Codazzi and harmonicity residuals, the lists of degenerate and
    big-cell failure indices, and an overall ``ok`` flag judged against the
    tolerances.
    """
    tol = {
        "k_abs": 1e-4,
        "k_std_rel": 1e-5,
        "h_abs": 1e-4,
        "gc": 1e-5,
        "harmonicity": 1e-3,
    }
    if tolerances:
        tol.update(tolerances)
    dx = patch.x_axis[1] - patch.x_axis[0]
    dy = patch.y_axis[1] - patch.y_axis[0]
    degenerate = []
    try:
        forms = fundamental_forms_numeric(patch)
    except DegeneratePoint as exc:
        degenerate = [list(ix) for ix in exc.indices]
        # recompute without the degeneracy guard so statistics stay available
        forms = fundamental_forms_numeric(patch, check_degenerate=False)
    curv = curvatures(forms, kind)
    gc = gauss_codazzi_residual(kind, gauge, dx, dy)
    harm, _ = harmonicity_residual(patch)

    K = curv.K
    Hm = curv.H_mean
    report = {
        "class": kind,
        "K_mean": float(np.mean(K)),
        "K_std": float(np.std(K)),
        "H_mean": float(np.mean(Hm)),
        "H_std": float(np.std(Hm)),
        "gc_residual": float(gc),
        "harmonicity_residual": float(harm),
        "degenerate_points": degenerate,
        "bigcell_failures": [list(ix) for ix in bigcell_failures],
    }
    checks = {
        "gc_residual": gc <= tol["gc"],
        "harmonicity_residual": harm <= tol["harmonicity"],
        "no_degenerate_points": len(degenerate) == 0,
        "no_bigcell_failures": len(report["bigcell_failures"]) == 0,
    }
    if kind == "c4":
        expected = float(np.tanh(-sp.q))
        checks["H_mean"] = abs(report["H_mean"] - expected) <= tol["h_abs"]
        checks["H_std"] = report["H_std"] <= max(tol["h_abs"], abs(expected) * tol["k_std_rel"])
        report["H_expected"] = expected
    else:
        expected = EXPECTED_K_FACTOR[kind] * abs(gauge.H) ** 2
        checks["K_mean"] = abs(report["K_mean"] - expected) <= tol["k_abs"]
        checks["K_std"] = report["K_std"] <= abs(expected) * tol["k_std_rel"]
        report["K_expected"] = expected
    report["checks"] = {k: bool(v) for k, v in sorted(checks.items())}
    report["ok"] = bool(all(checks.values()))
    return report

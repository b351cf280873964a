"""Sym-type immersion formulas: from gauged frames to surface patches.

Each class evaluates its frame on the appropriate spectral set (unit circle,
circle of radius exp(q/2), or the real line), applies the class's immersion
formula, and identifies the matrix-valued result with points of R^3, R^{1,2}
(metric dx1^2 - dx2^2 - dx3^2) or R^{3,1} via fixed Lie-algebra bases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import loopalg
from .loopalg import SIGMA1, SIGMA2, SIGMA3
from .realform import ClassMismatch, get_class
from . import factor


class NoParallelSurface(Exception):
    """The class admits no parallel constant mean curvature surface."""


#: classes with a parallel CMC surface at distance 1/(2|H|) along the normal
PARALLEL_CLASSES = ("c1", "c3", "s2")

# Identification bases: vector (x1, x2, x3) <-> -(i/2) sum_j x_j E_j, with the
# diagonal metric epsilon giving <a, b> = -2 Tr(a b) componentwise.
_BASES = {
    "su2": ((SIGMA1, SIGMA2, SIGMA3), (1.0, 1.0, 1.0)),
    "su11": ((SIGMA3, 1j * SIGMA1, 1j * SIGMA2), (1.0, -1.0, -1.0)),
    "sl2star": ((SIGMA1, 1j * SIGMA3, 1j * SIGMA2), (1.0, -1.0, -1.0)),
}

#: matrix model and normal-scale factor ell per class
CLASS_MODEL = {
    "c1": ("su11", 1j),
    "c2": ("sl2star", 1.0),
    "c3": ("su2", 1j),
    "c4": ("herm", None),
    "s1": ("su11", 1j),
    "s2": ("sl2star", 1.0),
    "s3": ("su2", 1j),
}


@dataclass(frozen=True)
class SpectralPoint:
    """A point of the spectral set: lam = exp(q/2 + i t) for the conjugate
    classes (q = 0 except class c4) and lam = sign * exp(t) for the split
    classes."""

    family: str  # "circle" or "line"
    t: float = 0.0
    q: float = 0.0
    sign: int = 1

    @property
    def lam(self):
        if self.family == "circle":
            return complex(np.exp(0.5 * self.q + 1j * self.t))
        return complex(self.sign * np.exp(self.t))

    @classmethod
    def for_class(cls, kind, t=0.0, q=0.0, sign=1):
        if kind.startswith("c"):
            return cls("circle", t=t, q=(q if kind == "c4" else 0.0))
        return cls("line", t=t, sign=sign)


@dataclass
class SurfacePatch:
    """A surface patch over the coordinate grid.

    ``mats`` and ``gauss_mats`` are the matrix models of the immersion and its
    Gauss map (complex arrays of shape grid + (2, 2)); ``points`` and
    ``gauss`` the vector identifications (grid + (3,) or grid + (4,) real).
    """

    kind: str
    model: str
    points: np.ndarray
    gauss: np.ndarray
    mats: np.ndarray
    gauss_mats: np.ndarray
    x_axis: np.ndarray
    y_axis: np.ndarray
    spectral: SpectralPoint
    absH: float
    #: for the hyperbolic-ambient class the harmonic map sits in a quotient of
    #: the group rather than in the ambient space; its matrix lift Ad(F) sigma3
    #: is kept separately (None for the other classes, whose Gauss map itself
    #: carries the harmonicity)
    harmonic_mats: np.ndarray | None = None


def vector_from_matrix(model, mats):
    """Identify matrices with vectors; works on stacked arrays."""
    if model == "herm":
        x0 = np.trace(mats, axis1=-2, axis2=-1)
        x3 = mats[..., 0, 0] - mats[..., 1, 1]
        x1 = mats[..., 0, 1] + mats[..., 1, 0]
        x2 = -1j * (mats[..., 0, 1] - mats[..., 1, 0])
        return np.stack([x1.real, x2.real, x3.real, x0.real], axis=-1)
    basis, eps = _BASES[model]
    comps = []
    for E, e in zip(basis, eps):
        comps.append((e * 1j * np.trace(np.matmul(mats, E), axis1=-2, axis2=-1)).real)
    return np.stack(comps, axis=-1)


def matrix_from_vector(model, vecs):
    """Inverse identification (used for tests and exports)."""
    vecs = np.asarray(vecs)
    if model == "herm":
        x1, x2, x3, x0 = np.moveaxis(vecs, -1, 0)
        out = np.empty(vecs.shape[:-1] + (2, 2), dtype=complex)
        out[..., 0, 0] = 0.5 * (x0 + x3)
        out[..., 0, 1] = 0.5 * (x1 + 1j * x2)
        out[..., 1, 0] = 0.5 * (x1 - 1j * x2)
        out[..., 1, 1] = 0.5 * (x0 - x3)
        return out
    basis, _ = _BASES[model]
    out = np.zeros(vecs.shape[:-1] + (2, 2), dtype=complex)
    for j, E in enumerate(basis):
        out = out + (-0.5j) * vecs[..., j, None, None] * E
    return out


def metric_form(model, a, b):
    """The ambient inner product on matrix models; works on stacked arrays."""
    if model == "herm":
        adj_b = np.matmul(np.matmul(SIGMA2, np.swapaxes(b, -1, -2)), SIGMA2)
        return -2.0 * np.trace(np.matmul(a, adj_b), axis1=-2, axis2=-1)
    return -2.0 * np.trace(np.matmul(a, b), axis1=-2, axis2=-1)


def sym_complex(F, H, lam):
    """Complex Sym formula at one spectral value.

    Returns (Psi, Phi, N): the complex CMC immersion, the complex CGC
    immersion and their shared Gauss map.
    """
    Fv = loopalg.evaluate(F, lam)
    dFv = loopalg.evaluate(loopalg.lambda_derivative(F), lam)
    Fi = np.linalg.inv(Fv)
    A = 1j * dFv @ Fi
    N = 0.5j * Fv @ SIGMA3 @ Fi
    Phi = -A / (2.0 * H)
    Psi = -(A + N) / (2.0 * H)
    return Psi, Phi, N


def _check_class_symmetry(kind, frames, tol, sample_count=3):
    """Verify the gauged frames carry the class symmetry (up to global sign)."""
    flat = frames.ravel()
    idxs = np.unique(np.linspace(0, flat.size - 1, sample_count).astype(int))
    for i in idxs:
        F = flat[i]
        k = factor.symmetry_defect(kind, F)
        resid = min(np.abs(k - np.eye(2)).max(), np.abs(k + np.eye(2)).max())
        if resid > tol:
            raise ClassMismatch(
                f"frame symmetry defect {resid:.3e} exceeds {tol:.1e} for class {kind}"
            )


def sym_real(kind, frames, x_axis, y_axis, sp, absH, check_tol=1e-6):
    """Apply the class Sym formula over a grid of gauged frames.

    ``frames`` is an object array of LaurentMatrix (2D grid for the conjugate
    classes; for the split classes it may also be a 2D grid assembled from
    the two one-dimensional frame families).  ``sp`` fixes the spectral value.
    Raises ClassMismatch when sampled frames fail the class symmetry.
    """
    cls = get_class(kind)
    if check_tol is not None:
        _check_class_symmetry(kind, frames, check_tol)
    lam = sp.lam
    model, ell = CLASS_MODEL[kind]
    shape = frames.shape
    mats = np.empty(shape + (2, 2), dtype=complex)
    gmats = np.empty(shape + (2, 2), dtype=complex)
    hmats = np.empty(shape + (2, 2), dtype=complex) if kind == "c4" else None
    for idx in np.ndindex(shape):
        F = frames[idx]
        Fv = loopalg.evaluate(F, lam)
        dFv = loopalg.evaluate(loopalg.lambda_derivative(F), lam)
        if kind == "c4":
            Fs = np.conj(Fv).T
            dq = np.diag([np.exp(0.5 * sp.q), np.exp(-0.5 * sp.q)]).astype(complex)
            dqn = np.diag([np.exp(0.5 * sp.q), -np.exp(-0.5 * sp.q)]).astype(complex)
            mats[idx] = 0.5 * Fv @ dq @ Fs
            gmats[idx] = 0.5 * Fv @ dqn @ Fs
            hmats[idx] = 0.5j * Fv @ SIGMA3 @ np.linalg.inv(Fv)
        else:
            Fi = np.linalg.inv(Fv)
            pref = -1.0 / (2.0 * absH)
            if kind.startswith("c"):
                mats[idx] = pref * 1j * dFv @ Fi
            else:
                mats[idx] = pref * dFv @ Fi
            gmats[idx] = 0.5 * ell * Fv @ SIGMA3 @ Fi
    points = vector_from_matrix(model, mats)
    gauss = vector_from_matrix(model, gmats)
    return SurfacePatch(kind, model, points, gauss, mats, gmats, x_axis, y_axis, sp, absH, hmats)


def parallel_surface(patch):
    """Parallel CMC surface at distance 1/(2|H|) along the Gauss map.

    Only the classes c1, c3 and s2 admit one; the others raise
    NoParallelSurface.
    """
    if patch.kind not in PARALLEL_CLASSES:
        raise NoParallelSurface(f"class {patch.kind} has no parallel CMC surface")
    mats = patch.mats + patch.gauss_mats / (2.0 * patch.absH)
    points = vector_from_matrix(patch.model, mats)
    return SurfacePatch(
        patch.kind + "-parallel",
        patch.model,
        points,
        patch.gauss.copy(),
        mats,
        patch.gauss_mats.copy(),
        patch.x_axis,
        patch.y_axis,
        patch.spectral,
        patch.absH,
    )

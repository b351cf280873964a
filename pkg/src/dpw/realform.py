"""The seven real-form involutions on the twisted loop algebra and group.

Each class is a semi-linear involution built from three ingredients: a
reparametrization of the spectral parameter (which either preserves degrees or
flips their sign, and multiplies coefficient k by a unit phase to the k-th
power), complex conjugation of the coefficients, and a constant matrix
conjugation combined with (negative) transpose.

Classes c1..c4 exchange the two potentials of a pair ("conjugate" type, the
loop parameter substitution involves 1/conj(lam)); classes s1..s3 act on each
potential separately ("split" type, substitution in conj(lam)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import loopalg
from .loopalg import LaurentMatrix, NotInvertible
from .potential import Potential, PotentialPair, MissingTau, ProjectionDegenerate

# Constant conjugating matrix for class c4: diag(1/sqrt(i), sqrt(i)) with the
# branch sqrt(i) = exp(i pi / 4).
_SQRT_I = np.exp(1j * np.pi / 4)
D_C4 = np.array([[1.0 / _SQRT_I, 0.0], [0.0, _SQRT_I]], dtype=complex)
D_C4_INV = np.array([[_SQRT_I, 0.0], [0.0, 1.0 / _SQRT_I]], dtype=complex)


@dataclass(frozen=True)
class RealFormClass:
    """Descriptor for one of the seven surface classes.

    Attributes:
        kind: one of "c1", "c2", "c3", "c4", "s1", "s2", "s3".
        flips_degree: True when the lam-substitution inverts the spectral
            parameter (degree k -> -k on coefficients).
        mu: unit complex number entering the substitution lam -> mu/conj(lam)
            (conjugate type) or lam -> mu*conj(lam) (split type).
        transposes: True when the matrix part is X -> -X^t (algebra) /
            X -> X^{-t} (group); False when it is plain conjugation.
        conjugator: constant matrix B for the similarity X -> B X B^{-1}
            (None means identity).
        target: human-readable ambient space tag.
        spectral: admissible spectral parameter set tag.
    """

    kind: str
    flips_degree: bool
    mu: complex
    transposes: bool
    conjugator: tuple | None
    target: str
    spectral: str

    @property
    def is_conjugate_type(self):
        return self.kind.startswith("c")

    def conjugator_matrices(self):
        if self.conjugator is None:
            return None, None
        B = np.array(self.conjugator, dtype=complex)
        return B, np.linalg.inv(B)


REAL_FORM_CLASSES = {
    "c1": RealFormClass("c1", True, -1.0, True, None, "R^{1,2} spacelike CGC", "unit circle"),
    "c2": RealFormClass("c2", True, -1.0, False, None, "R^{1,2} timelike CGC", "unit circle"),
    "c3": RealFormClass("c3", True, 1.0, True, None, "R^3 CGC", "unit circle"),
    "c4": RealFormClass(
        "c4", True, 1.0j, True, ((1.0 / _SQRT_I, 0.0), (0.0, _SQRT_I)), "H^3 CMC", "circle of radius exp(q/2)"
    ),
    "s1": RealFormClass("s1", False, -1.0, True, None, "R^{1,2} spacelike CGC", "real line"),
    "s2": RealFormClass("s2", False, -1.0, False, None, "R^{1,2} timelike CGC", "real line"),
    "s3": RealFormClass("s3", False, 1.0, True, None, "R^3 CGC", "real line"),
}


class ClassMismatch(Exception):
    """A frame or datum fails the symmetry required by its declared class."""


def get_class(kind):
    try:
        return REAL_FORM_CLASSES[kind]
    except KeyError:
        raise KeyError(f"unknown surface class {kind!r}; expected one of {sorted(REAL_FORM_CLASSES)}")


def _substitute(cls, a):
    """Apply the lam-substitution-plus-conjugation part coefficientwise.

    Returns the loop with coefficients conj(a_{+-k}) * conj(mu)^(target degree
    handling), before any matrix-level operation.
    """
    mu_bar = np.conj(cls.mu)
    if cls.flips_degree:
        # result_m = conj(a_{-m}) * mu_bar^{-m}
        kmin = -a.kmax
        degs = np.arange(kmin, -a.kmin + 1)
        coeffs = np.conj(a.coeffs[::-1]) * (mu_bar ** (-degs))[:, None, None]
    else:
        # result_m = conj(a_m) * mu_bar^m
        kmin = a.kmin
        degs = a.degrees
        coeffs = np.conj(a.coeffs) * (mu_bar**degs)[:, None, None]
    return LaurentMatrix(kmin, coeffs, a.twisted, a.tail_norm)


def involute_algebra(cls, a):
    """Apply the algebra-level involution of ``cls`` to a twisted loop."""
    if isinstance(cls, str):
        cls = get_class(cls)
    sub = _substitute(cls, a)
    if cls.transposes:
        coeffs = -np.transpose(sub.coeffs, (0, 2, 1))
    else:
        coeffs = sub.coeffs
    B, Binv = cls.conjugator_matrices()
    if B is not None:
        coeffs = np.matmul(np.matmul(B, coeffs), Binv)
    return LaurentMatrix(sub.kmin, coeffs, a.twisted, a.tail_norm)


def involute_group(cls, g, kcap=None, tol=1e-8):
    """Apply the group-level involution of ``cls`` to a twisted loop.

    For the transpose-type classes this requires a genuine series inversion;
    a NotInvertible error from the truncated solve propagates to the caller.
    """
    if isinstance(cls, str):
        cls = get_class(cls)
    sub = _substitute(cls, g)
    if cls.transposes:
        out = loopalg.inv(loopalg.transpose(sub), kcap=kcap, tol=tol)
    else:
        out = sub
    B, Binv = cls.conjugator_matrices()
    if B is not None:
        out = LaurentMatrix(
            out.kmin, np.matmul(np.matmul(B, out.coeffs), Binv), out.twisted, out.tail_norm
        )
    return out


def is_fixed(cls, a, level="algebra", tol=1e-9, kcap=None):
    """Check fixedness under the involution; returns (bool, residual)."""
    if level == "algebra":
        image = involute_algebra(cls, a)
    else:
        image = involute_group(cls, a, kcap=kcap)
    resid = loopalg.wiener_norm(loopalg.sub(image, a))
    return resid <= tol, resid


def _involute_potential(cls, pot, out_variable):
    """Image of a potential one-form under the algebra involution.

    Conjugation acts on the coefficient functions as f -> conj(f(conj(.)))
    and on the differential by switching it to the conjugate coordinate.
    """
    terms = []
    for k, fn in pot.terms:
        target = -k if cls.flips_degree else k
        # coefficient of degree m in conj(a(mu / conj(lam))) is conj(a_{-m}) * conj(mu)^{-m}
        power = -target if cls.flips_degree else target

        def transformed(coord, fn=fn, k=k, power=power):
            val = np.conj(fn(np.conj(coord))) * np.conj(cls.mu) ** power
            if cls.transposes:
                val = -np.swapaxes(val, -1, -2)
            B, Binv = cls.conjugator_matrices()
            if B is not None:
                val = B @ val @ Binv
            return val

        terms.append((target, transformed))
    terms.sort(key=lambda item: item[0])
    return Potential(out_variable, terms)


def symmetrize_pair(cls, eta, tau=None, probe=0.0, tol=1e-12):
    """Produce a class-symmetric potential pair.

    Conjugate-type classes generate the second potential from the first by the
    involution; supplying ``tau`` is an error for them only if inconsistent,
    so it is simply ignored.  Split-type classes require both potentials and
    project each onto the fixed set by averaging with its involution image.
    """
    if isinstance(cls, str):
        cls = get_class(cls)
    if cls.is_conjugate_type:
        tau_out = _involute_potential(cls, eta, "w")
        pair = PotentialPair(eta, tau_out, cls.kind)
    else:
        if tau is None:
            raise MissingTau(f"class {cls.kind} requires an explicit second potential")
        eta_sym = _average_with_involution(cls, eta)
        tau_sym = _average_with_involution(cls, tau)
        pair = PotentialPair(eta_sym, tau_sym, cls.kind)
    _check_projection(pair, probe, tol)
    return pair


def _average_with_involution(cls, pot):
    image = _involute_potential(cls, pot, pot.variable)
    fns = {k: fn for k, fn in pot.terms}
    img_fns = {k: fn for k, fn in image.terms}
    terms = []
    for k in sorted(set(fns) | set(img_fns)):
        f = fns.get(k)
        g = img_fns.get(k)

        def averaged(coord, f=f, g=g):
            if f is None:
                return 0.5 * g(coord)
            if g is None:
                return 0.5 * f(coord)
            return 0.5 * (f(coord) + g(coord))

        terms.append((k, averaged))
    return Potential(pot.variable, terms)


def _check_projection(pair, probe, tol):
    """The construction degenerates when the distinguished entries vanish."""
    eta_m1 = pair.eta.coefficient(-1, probe)
    tau_p1 = pair.tau.coefficient(1, probe)
    if abs(eta_m1[0, 1]) <= tol:
        raise ProjectionDegenerate(
            f"upper-right entry of the degree -1 coefficient vanishes at probe {probe}"
        )
    if abs(tau_p1[1, 0]) <= tol:
        raise ProjectionDegenerate(
            f"lower-left entry of the degree +1 coefficient vanishes at probe {probe}"
        )


def untwist_map(a):
    """Isomorphism from untwisted to twisted loops.

    Conjugation by diag(sqrt(lam), 1/sqrt(lam)) composed with lam -> lam^2:
    diagonal entries of degree k land at degree 2k, the upper-right entry at
    2k+1 and the lower-left entry at 2k-1.
    """
    terms = {}
    for i, k in enumerate(range(a.kmin, a.kmax + 1)):
        mat = a.coeffs[i]
        for (r, c), shift in (((0, 0), 0), ((1, 1), 0), ((0, 1), 1), ((1, 0), -1)):
            val = mat[r, c]
            if val != 0:
                deg = 2 * k + shift
                terms.setdefault(deg, np.zeros((2, 2), dtype=complex))
                terms[deg][r, c] += val
    if not terms:
        return loopalg.zero(twisted=True)
    return loopalg.from_terms(terms, twisted=True)

"""Truncated matrix Laurent series and twisted loop algebra arithmetic.

A loop is represented by a finite band of 2x2 complex matrix coefficients

    g(lam) = sum_{k=kmin}^{kmax} g_k lam^k.

The twisting condition g(-lam) = sigma3 g(lam) sigma3 forces even-degree
coefficients to be diagonal and odd-degree coefficients to be off-diagonal;
``twisted_from_coeffs`` enforces this structurally.  All operations track the
Wiener norm (sum of entrywise max-moduli over all degrees) of whatever gets
dropped when a product or inverse is clipped to a degree cap, so truncation
error is observable rather than silent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Pauli matrices and identity, used throughout the package.
SIGMA1 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA2 = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA3 = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY2 = np.eye(2, dtype=complex)

#: default degree cap for pipeline arithmetic
DEFAULT_KCAP = 12
#: default structural tolerance for twist / determinant checks
TOL_STRUCT = 1e-9


class LoopError(Exception):
    """Base class for loop arithmetic failures."""


class TwistViolation(LoopError):
    """A coefficient has nonzero entries forbidden by the twisting condition."""

    def __init__(self, degree, entry, magnitude):
        self.degree = degree
        self.entry = entry
        self.magnitude = magnitude
        super().__init__(
            f"twist violation at degree {degree}, entry {entry}: |value| = {magnitude:.3e}"
        )


class NotInvertible(LoopError):
    """Series inversion failed (singular system or large residual)."""


class DomainError(LoopError):
    """Evaluation requested at a spectral parameter outside the valid domain."""


def _as_coeff_array(coeffs):
    arr = np.asarray(coeffs, dtype=complex)
    if arr.ndim != 3 or arr.shape[1:] != (2, 2):
        raise ValueError(f"coefficient array must have shape (n, 2, 2), got {arr.shape}")
    return arr


@dataclass
class LaurentMatrix:
    """A 2x2 matrix Laurent polynomial on the band [kmin, kmin + len(coeffs) - 1].

    Attributes:
        kmin: lowest represented degree.
        coeffs: array of shape (ndeg, 2, 2); ``coeffs[i]`` is the coefficient
            of ``lam**(kmin + i)``.
        twisted: whether the twisting condition is asserted for this loop.
        tail_norm: accumulated Wiener norm of coefficients dropped by
            truncation in the operations that produced this loop.
    """

    kmin: int
    coeffs: np.ndarray
    twisted: bool = True
    tail_norm: float = 0.0

    def __post_init__(self):
        self.coeffs = _as_coeff_array(self.coeffs)

    @property
    def kmax(self):
        return self.kmin + self.coeffs.shape[0] - 1

    @property
    def degrees(self):
        return np.arange(self.kmin, self.kmax + 1)

    def coeff(self, k):
        """Coefficient matrix of lam**k (zero matrix outside the band)."""
        if self.kmin <= k <= self.kmax:
            return self.coeffs[k - self.kmin]
        return np.zeros((2, 2), dtype=complex)

    def copy(self):
        return LaurentMatrix(self.kmin, self.coeffs.copy(), self.twisted, self.tail_norm)

    def to_json(self):
        """Serialize to the interchange dict: coefficients row-major as [re, im] pairs."""
        coeff_list = []
        for mat in self.coeffs:
            flat = mat.reshape(4)
            coeff_list.append([[float(v.real), float(v.imag)] for v in flat])
        return {"kmin": int(self.kmin), "coeffs": coeff_list, "twisted": bool(self.twisted)}

    @classmethod
    def from_json(cls, data):
        coeffs = np.array(
            [[complex(re, im) for re, im in row] for row in data["coeffs"]],
            dtype=complex,
        ).reshape(-1, 2, 2)
        return cls(int(data["kmin"]), coeffs, bool(data["twisted"]))


def zero(twisted=True):
    return LaurentMatrix(0, np.zeros((1, 2, 2), dtype=complex), twisted)


def identity(twisted=True):
    return LaurentMatrix(0, IDENTITY2[np.newaxis].copy(), twisted)


def from_terms(terms, twisted=True):
    """Build a loop from a {degree: 2x2 matrix} mapping."""
    if not terms:
        return zero(twisted)
    kmin = min(terms)
    kmax = max(terms)
    coeffs = np.zeros((kmax - kmin + 1, 2, 2), dtype=complex)
    for k, mat in terms.items():
        coeffs[k - kmin] = np.asarray(mat, dtype=complex)
    out = LaurentMatrix(kmin, coeffs, twisted)
    if twisted:
        check_twist(out)
    return out


def check_twist(a, tol=TOL_STRUCT):
    """Raise TwistViolation if any coefficient breaks the parity structure."""
    for i, k in enumerate(range(a.kmin, a.kmax + 1)):
        mat = a.coeffs[i]
        if k % 2 == 0:
            forbidden = [(0, 1), (1, 0)]
        else:
            forbidden = [(0, 0), (1, 1)]
        for entry in forbidden:
            mag = abs(mat[entry])
            if mag > tol:
                raise TwistViolation(k, entry, mag)


def twisted_from_coeffs(kmin, coeffs, tol=TOL_STRUCT):
    """Construct a twisted loop, validating the parity structure of every coefficient."""
    out = LaurentMatrix(kmin, _as_coeff_array(coeffs), twisted=True)
    check_twist(out, tol)
    return out


def trim(a, tol=0.0):
    """Drop identically-small leading/trailing coefficients (band shrink, no tail cost)."""
    mags = np.max(np.abs(a.coeffs), axis=(1, 2))
    nz = np.nonzero(mags > tol)[0]
    if nz.size == 0:
        out = zero(a.twisted)
        out.tail_norm = a.tail_norm
        return out
    lo, hi = nz[0], nz[-1]
    return LaurentMatrix(a.kmin + lo, a.coeffs[lo : hi + 1].copy(), a.twisted, a.tail_norm)


def wiener_norm(a):
    """Sum over degrees of the entrywise max modulus of each coefficient."""
    if a.coeffs.shape[0] == 0:
        return 0.0
    return float(np.sum(np.max(np.abs(a.coeffs), axis=(1, 2))))


def _clip(kmin, coeffs, kcap, twisted, tail_norm):
    """Clip a coefficient stack to [-kcap, kcap], accounting dropped norm."""
    if kcap is None:
        return LaurentMatrix(kmin, coeffs, twisted, tail_norm)
    kmax = kmin + coeffs.shape[0] - 1
    lo = max(kmin, -kcap)
    hi = min(kmax, kcap)
    if lo > hi:
        out = zero(twisted)
        out.tail_norm = tail_norm + float(np.sum(np.max(np.abs(coeffs), axis=(1, 2))))
        return out
    dropped = 0.0
    if lo > kmin:
        dropped += float(np.sum(np.max(np.abs(coeffs[: lo - kmin]), axis=(1, 2))))
    if hi < kmax:
        dropped += float(np.sum(np.max(np.abs(coeffs[hi - kmin + 1 :]), axis=(1, 2))))
    return LaurentMatrix(lo, coeffs[lo - kmin : hi - kmin + 1], twisted, tail_norm + dropped)


def add(a, b):
    kmin = min(a.kmin, b.kmin)
    kmax = max(a.kmax, b.kmax)
    coeffs = np.zeros((kmax - kmin + 1, 2, 2), dtype=complex)
    coeffs[a.kmin - kmin : a.kmax - kmin + 1] += a.coeffs
    coeffs[b.kmin - kmin : b.kmax - kmin + 1] += b.coeffs
    return LaurentMatrix(kmin, coeffs, a.twisted and b.twisted, a.tail_norm + b.tail_norm)


def sub(a, b):
    return add(a, scale(-1.0, b))


def scale(c, a):
    return LaurentMatrix(a.kmin, c * a.coeffs, a.twisted, abs(c) * a.tail_norm)


def mul(a, b, kcap=None):
    """Product of two loops, optionally clipped to the band [-kcap, kcap].

    The dropped Wiener norm (plus the operands' accumulated tails) is recorded
    on the result's ``tail_norm``.
    """
    na = a.coeffs.shape[0]
    nb = b.coeffs.shape[0]
    kmin = a.kmin + b.kmin
    out = np.zeros((na + nb - 1, 2, 2), dtype=complex)
    # iterate over the shorter operand's degrees; each step is a batched matmul
    if na <= nb:
        for i in range(na):
            out[i : i + nb] += np.matmul(a.coeffs[i], b.coeffs)
    else:
        for j in range(nb):
            out[j : j + na] += np.matmul(a.coeffs, b.coeffs[j])
    tail = a.tail_norm + b.tail_norm
    return _clip(kmin, out, kcap, a.twisted and b.twisted, tail)


def matmul_const(m, a, side="left"):
    """Multiply every coefficient by a constant 2x2 matrix (degree-preserving)."""
    m = np.asarray(m, dtype=complex)
    if side == "left":
        coeffs = np.matmul(m, a.coeffs)
    else:
        coeffs = np.matmul(a.coeffs, m)
    return LaurentMatrix(a.kmin, coeffs, False, a.tail_norm)


def transpose(a):
    return LaurentMatrix(a.kmin, np.transpose(a.coeffs, (0, 2, 1)).copy(), a.twisted, a.tail_norm)


def inv(a, kcap=None, tol=1e-8):
    """Series inverse on a symmetric band.

    The inverse is sought on the band [-K, K] with K = max(|kmin|, |kmax|, kcap)
    by solving the truncated convolution system (a * y)_k = delta_{k0} I for
    each column of y.  Raises NotInvertible when the system is singular or the
    residual of the recovered identity exceeds ``tol``.
    """
    band = max(abs(a.kmin), abs(a.kmax))
    if kcap is not None:
        band = max(band, kcap)
    degs = np.arange(-band, band + 1)
    ndeg = degs.size

    # T[(k,r),(m,c)] = a_{k-m}[r,c]; columns of the inverse decouple.
    diff = degs[:, None] - degs[None, :]
    # lookup table indexed by degree difference, offset so negatives are valid
    lo = int(diff.min())
    hi = int(diff.max())
    table = np.zeros((hi - lo + 1, 2, 2), dtype=complex)
    for i, k in enumerate(range(a.kmin, a.kmax + 1)):
        if lo <= k <= hi:
            table[k - lo] = a.coeffs[i]
    blocks = table[diff - lo]  # (ndeg, ndeg, 2, 2)
    T = blocks.transpose(0, 2, 1, 3).reshape(2 * ndeg, 2 * ndeg)

    rhs = np.zeros((2 * ndeg, 2), dtype=complex)
    i0 = band  # index of degree 0
    rhs[2 * i0 + 0, 0] = 1.0
    rhs[2 * i0 + 1, 1] = 1.0
    try:
        sol = np.linalg.solve(T, rhs)
    except np.linalg.LinAlgError as exc:
        raise NotInvertible(f"singular truncated system: {exc}") from exc

    coeffs = sol.reshape(ndeg, 2, 2)
    result = LaurentMatrix(-band, coeffs, a.twisted, a.tail_norm)
    check = mul(a, result, kcap=band)
    resid = wiener_norm(sub(check, identity(a.twisted)))
    if not np.isfinite(resid) or resid > tol:
        raise NotInvertible(f"inverse residual {resid:.3e} exceeds tolerance {tol:.1e}")
    result.tail_norm += resid
    return result


def evaluate(a, lam):
    """Evaluate the loop at a spectral parameter (scalar or array)."""
    lam = np.asarray(lam, dtype=complex)
    if a.kmin < 0 and np.any(lam == 0):
        raise DomainError("evaluation at lam = 0 with negative-degree terms present")
    powers = lam[..., None] ** a.degrees if lam.ndim else lam ** a.degrees
    return np.tensordot(powers, a.coeffs, axes=([-1], [0]))


def lambda_derivative(a):
    """The loop lam * d/dlam applied coefficientwise: coefficient k scales by k."""
    degs = a.degrees.astype(complex)
    return LaurentMatrix(a.kmin, degs[:, None, None] * a.coeffs, a.twisted, a.tail_norm)


def det_series(a):
    """Determinant of the loop as a scalar Laurent polynomial, returned as
    a diagonal LaurentMatrix d(lam) * I."""
    c11 = a.coeffs[:, 0, 0]
    c12 = a.coeffs[:, 0, 1]
    c21 = a.coeffs[:, 1, 0]
    c22 = a.coeffs[:, 1, 1]
    d = np.convolve(c11, c22) - np.convolve(c12, c21)
    coeffs = np.zeros((d.size, 2, 2), dtype=complex)
    coeffs[:, 0, 0] = d
    coeffs[:, 1, 1] = d
    return LaurentMatrix(2 * a.kmin, coeffs, a.twisted, 2.0 * a.tail_norm)


def scalar_inv_sqrt(d, kcap=None, iterations=30, tol=1e-13):
    """Inverse square root of a scalar loop d(lam) * I near the identity.

    Newton iteration y <- y (3 - d y^2) / 2, used for determinant renormalization.
    """
    y = identity(d.twisted)
    for _ in range(iterations):
        y2 = mul(y, y, kcap=kcap)
        dy2 = mul(d, y2, kcap=kcap)
        update = scale(0.5, sub(scale(3.0, y), mul(dy2, y, kcap=kcap)))
        delta = wiener_norm(sub(update, y))
        y = update
        if delta < tol:
            break
    return y


def exp_series(a, kcap=None, tol=1e-16, max_terms=60):
    """Exponential of a loop by scaling and squaring with a Taylor core.

    Exact up to the requested band; used both in tests as an oracle and for
    building closed-form frames of constant potentials.
    """
    norm = wiener_norm(a)
    squarings = 0
    while norm > 0.5:
        norm *= 0.5
        squarings += 1
    b = scale(0.5**squarings, a)
    result = identity(a.twisted)
    term = identity(a.twisted)
    for n in range(1, max_terms + 1):
        term = scale(1.0 / n, mul(term, b, kcap=kcap))
        result = add(result, term)
        if wiener_norm(term) < tol:
            break
    for _ in range(squarings):
        result = mul(result, result, kcap=kcap)
    return result

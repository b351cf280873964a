"""Holomorphic potential pairs: the input data of the construction.

A potential is a one-form A(v) dv whose value is a twisted loop with finitely
many Laurent terms; coefficient matrices are holomorphic functions of the
coordinate given either directly as callables or through a small expression
language (standard Python arithmetic on the coordinate variable plus the
usual analytic functions).
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field

import numpy as np

from . import loopalg
from .loopalg import LaurentMatrix


class PotentialError(Exception):
    """Base class for potential construction/validation failures."""


class MissingTau(PotentialError):
    """A split-type class needs a second potential and none was supplied."""


class ProjectionDegenerate(PotentialError):
    """Symmetrization produced a pair violating the nonvanishing conditions."""


class GridTooSmall(Exception):
    """A grid axis has fewer points than the operation requires."""


_ALLOWED_CALLS = {
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
    "conj": np.conj,
}

_ALLOWED_NODES = (
    ast.Expression,
    ast.BinOp,
    ast.UnaryOp,
    ast.Add,
    ast.Sub,
    ast.Mult,
    ast.Div,
    ast.Pow,
    ast.USub,
    ast.UAdd,
    ast.Constant,
    ast.Name,
    ast.Call,
    ast.Load,
)


def compile_expr(src, variable):
    """Compile a scalar expression in one variable into a numpy-aware callable.

    Only arithmetic, numeric literals (including complex 'j' literals), the
    coordinate variable, 'pi', and a whitelist of analytic functions are
    accepted.
    """
    tree = ast.parse(src, mode="eval")
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED_NODES):
            raise PotentialError(f"disallowed syntax {type(node).__name__!r} in expression {src!r}")
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _ALLOWED_CALLS:
                raise PotentialError(f"disallowed function call in expression {src!r}")
        if isinstance(node, ast.Name):
            if node.id != variable and node.id != "pi" and node.id not in _ALLOWED_CALLS:
                raise PotentialError(f"unknown name {node.id!r} in expression {src!r}")
        if isinstance(node, ast.Constant) and not isinstance(node.value, (int, float, complex)):
            raise PotentialError(f"non-numeric constant in expression {src!r}")
    code = compile(tree, "<potential-expr>", "eval")
    namespace = dict(_ALLOWED_CALLS, pi=np.pi)

    def fn(coord):
        return eval(code, {"__builtins__": {}}, dict(namespace, **{variable: coord}))

    fn.source = src
    return fn


def matrix_fn(exprs, variable):
    """Build a callable returning a 2x2 matrix from a 2x2 nest of expressions."""
    compiled = [[compile_expr(str(e), variable) for e in row] for row in exprs]

    def fn(coord):
        return np.array(
            [[complex(compiled[r][c](coord)) for c in range(2)] for r in range(2)],
            dtype=complex,
        )

    fn.sources = [[str(e) for e in row] for row in exprs]
    return fn


@dataclass
class Domain:
    """Rectangular coordinate patch with grid resolution."""

    re: tuple
    im: tuple
    nx: int
    ny: int

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise GridTooSmall(f"grid must be at least 2x2, got {self.nx}x{self.ny}")

    @property
    def x_axis(self):
        return np.linspace(self.re[0], self.re[1], self.nx)

    @property
    def y_axis(self):
        return np.linspace(self.im[0], self.im[1], self.ny)

    @property
    def dx(self):
        return (self.re[1] - self.re[0]) / (self.nx - 1)

    @property
    def dy(self):
        return (self.im[1] - self.im[0]) / (self.ny - 1)

    def complex_grid(self):
        """z = x + i y with shape (ny, nx)."""
        x = self.x_axis
        y = self.y_axis
        return x[None, :] + 1j * y[:, None]

    @classmethod
    def from_config(cls, data):
        return cls(
            re=tuple(data["re"]),
            im=tuple(data["im"]),
            nx=int(data["nx"]),
            ny=int(data["ny"]),
        )


@dataclass
class Potential:
    """A loop-valued one-form sum_k A_k(v) lam^k dv.

    ``terms`` is a sorted list of (degree, callable) pairs; each callable maps
    a coordinate value to a 2x2 complex matrix.
    """

    variable: str
    terms: list

    @property
    def kmin(self):
        return min((k for k, _ in self.terms), default=0)

    @property
    def kmax(self):
        return max((k for k, _ in self.terms), default=0)

    def coefficient(self, k, coord):
        for deg, fn in self.terms:
            if deg == k:
                return np.asarray(fn(coord), dtype=complex)
        return np.zeros((2, 2), dtype=complex)

    def eval_at(self, coord):
        """Value at one coordinate as a twisted loop."""
        return loopalg.from_terms(
            {k: np.asarray(fn(coord), dtype=complex) for k, fn in self.terms},
            twisted=True,
        )

    @classmethod
    def from_config(cls, entries, variable):
        terms = [(int(e["k"]), matrix_fn(e["expr"], variable)) for e in entries]
        terms.sort(key=lambda item: item[0])
        return cls(variable, terms)


@dataclass
class PotentialPair:
    """The two potentials driving the construction, tagged with their class."""

    eta: Potential
    tau: Potential
    class_kind: str | None = None


@dataclass
class ValidationReport:
    """Outcome of structural validation of a potential pair on a domain."""

    parity_violations: list = field(default_factory=list)
    degree_violations: list = field(default_factory=list)
    vanishing_points: list = field(default_factory=list)
    min_upper_right: float = np.inf
    min_lower_left: float = np.inf

    @property
    def ok(self):
        return not (self.parity_violations or self.degree_violations or self.vanishing_points)


def _check_parity(report, pot, label, samples):
    for k, fn in pot.terms:
        for s in samples:
            mat = np.asarray(fn(s), dtype=complex)
            if k % 2 == 0:
                bad = max(abs(mat[0, 1]), abs(mat[1, 0]))
            else:
                bad = max(abs(mat[0, 0]), abs(mat[1, 1]))
            if bad > loopalg.TOL_STRUCT:
                report.parity_violations.append((label, k, s, bad))
                break


def validate_pair(pair, domain, tol=1e-12, samples_per_axis=7):
    """Structural validation of a potential pair over a domain.

    Checks the degree bounds (eta has terms of degree >= -1, tau of degree
    <= +1), the twisted parity of every coefficient, and the nonvanishing of
    the distinguished entries (upper-right of eta at degree -1, lower-left of
    tau at degree +1) on a coarse sample of the domain.
    """
    report = ValidationReport()
    if pair.eta.terms and pair.eta.kmin < -1:
        report.degree_violations.append(("eta", pair.eta.kmin))
    if pair.tau.terms and pair.tau.kmax > 1:
        report.degree_violations.append(("tau", pair.tau.kmax))
    if not any(k == -1 for k, _ in pair.eta.terms):
        report.degree_violations.append(("eta", "missing degree -1 term"))
    if not any(k == 1 for k, _ in pair.tau.terms):
        report.degree_violations.append(("tau", "missing degree +1 term"))

    z_samples = np.linspace(domain.re[0], domain.re[1], samples_per_axis)[None, :] + 1j * np.linspace(
        domain.im[0], domain.im[1], samples_per_axis
    )[:, None]
    z_samples = z_samples.ravel()
    if pair.class_kind is not None and pair.class_kind.startswith("s"):
        eta_samples = np.linspace(domain.re[0], domain.re[1], samples_per_axis**2)
        tau_samples = np.linspace(domain.im[0], domain.im[1], samples_per_axis**2)
    else:
        eta_samples = z_samples
        tau_samples = np.conj(z_samples)

    _check_parity(report, pair.eta, "eta", eta_samples)
    _check_parity(report, pair.tau, "tau", tau_samples)

    for s in eta_samples:
        val = abs(pair.eta.coefficient(-1, s)[0, 1])
        report.min_upper_right = min(report.min_upper_right, val)
        if val <= tol:
            report.vanishing_points.append(("eta", s))
    for s in tau_samples:
        val = abs(pair.tau.coefficient(1, s)[1, 0])
        report.min_lower_left = min(report.min_lower_left, val)
        if val <= tol:
            report.vanishing_points.append(("tau", s))
    return report

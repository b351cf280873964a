"""End-to-end runs: config -> potentials -> frames -> splitting -> surface -> report.

The conjugate classes integrate one holomorphic frame over the z-grid and
obtain the second frame pointwise through the class involution, which makes
the pair symmetric by construction.  The split classes integrate two
one-dimensional frame families (one per real coordinate) and combine them
pointwise.  Every grid point is then factored, gauge-fixed, mapped through
the Sym formula and finally verified by the geometry invariants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import factor, geometry, loopalg, ode, realform, sym
from .factor import OutsideBigCell
from .potential import Domain, Potential, PotentialPair, validate_pair
from .realform import get_class
from .sym import SpectralPoint


class ConfigError(Exception):
    """The run configuration is structurally or semantically invalid."""


class PipelineError(Exception):
    """A pipeline stage failed; carries the stage name and grid index."""

    def __init__(self, stage, cause, index=None):
        self.stage = stage
        self.index = index
        where = f" at grid index {index}" if index is not None else ""
        super().__init__(f"stage {stage!r} failed{where}: {cause}")


#: admissible reality of the mean-curvature parameter per class
_H_REALITY = {
    "c1": "imaginary",
    "c2": "any",
    "c3": "real",
    "c4": "imaginary",
    "s1": "any",
    "s2": "imaginary",
    "s3": "any",
}


def check_H(kind, H, tol=1e-12):
    """Validate the reality class of H; raises ConfigError on violation."""
    H = complex(H)
    if abs(H) <= tol:
        raise ConfigError(f"H must be nonzero for class {kind}")
    reality = _H_REALITY[kind]
    if reality == "real" and abs(H.imag) > tol * abs(H):
        raise ConfigError(f"class {kind} requires a real H, got {H}")
    if reality == "imaginary" and abs(H.real) > tol * abs(H):
        raise ConfigError(f"class {kind} requires a purely imaginary H, got {H}")
    return H


def _parse_H(value):
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, complex):
        return value
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        return complex(value.replace(" ", ""))
    raise ConfigError(f"cannot parse H from {value!r}")


@dataclass
class RunConfig:
    """Validated configuration of a single run."""

    kind: str
    domain: Domain
    eta: Potential
    tau: Potential | None
    H: complex
    t: float = 0.0
    q: float = 0.0
    sign: int = 1
    kcap: int = loopalg.DEFAULT_KCAP
    steps_per_cell: int = 8
    tolerances: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data, kind=None, t=None, q=None, kcap=None, grid=None):
        """Build a config from the JSON dict, with optional CLI overrides."""
        data = dict(data)
        kind = kind or data.get("class")
        if kind not in realform.REAL_FORM_CLASSES:
            raise ConfigError(f"unknown or missing class {kind!r}")
        try:
            domain = Domain.from_config(data["domain"])
        except KeyError as exc:
            raise ConfigError(f"missing domain field {exc}")
        if grid is not None:
            domain = Domain(domain.re, domain.im, grid, grid)
        split_type = kind.startswith("s")
        eta_var = "x" if split_type else "z"
        tau_var = "y" if split_type else "w"
        if "eta" not in data:
            raise ConfigError("missing potential terms 'eta'")
        eta = Potential.from_config(data["eta"], eta_var)
        tau = Potential.from_config(data["tau"], tau_var) if "tau" in data else None
        H = check_H(kind, _parse_H(data.get("H", 1.0)))
        cfg = cls(
            kind=kind,
            domain=domain,
            eta=eta,
            tau=tau,
            H=H,
            t=float(data.get("t", 0.0) if t is None else t),
            q=float(data.get("q", 0.0) if q is None else q),
            sign=int(data.get("sign", 1)),
            kcap=int(data.get("kcap", loopalg.DEFAULT_KCAP) if kcap is None else kcap),
            steps_per_cell=int(data.get("steps_per_cell", 8)),
            tolerances=dict(data.get("tolerances", {})),
        )
        if cfg.kind != "c4" and cfg.q not in (0.0,):
            raise ConfigError("the circle-radius parameter q only applies to class c4")
        if cfg.sign not in (1, -1):
            raise ConfigError("sign must be +1 or -1")
        return cfg


@dataclass
class RunResult:
    """Everything produced by one run."""

    config: RunConfig
    pair: PotentialPair
    gauge: factor.GaugeData
    patch: sym.SurfacePatch
    parallel: sym.SurfacePatch | None
    report: dict
    splits: np.ndarray
    bigcell_failures: list


def build_pair(cfg):
    """Symmetrize the configured potentials for the class."""
    try:
        pair = realform.symmetrize_pair(cfg.kind, cfg.eta, cfg.tau)
    except Exception as exc:
        raise PipelineError("symmetrize", exc)
    report = validate_pair(pair, cfg.domain)
    if not report.ok:
        raise PipelineError(
            "validate",
            f"potential pair invalid: parity={report.parity_violations} "
            f"degrees={report.degree_violations} vanishing={report.vanishing_points}",
        )
    return pair


def _factor_grid(cfg, pair, M_frames):
    """Pointwise factorization and Maurer-Cartan extraction.

    ``M_frames`` yields (index, C, L, eta_coord, tau_coord) per grid point.
    Returns (splits, a12, a21, b12, b21, bigcell_failures).
    """
    shape = (cfg.domain.ny, cfg.domain.nx)
    splits = np.empty(shape, dtype=object)
    a12 = np.empty(shape, dtype=complex)
    a21 = np.empty(shape, dtype=complex)
    b12 = np.empty(shape, dtype=complex)
    b21 = np.empty(shape, dtype=complex)
    failures = []
    last_good = None
    for index, C, L, ec, tc in M_frames:
        try:
            sr = factor.generalized_iwasawa(C, L, kcap=cfg.kcap)
            last_good = sr
        except OutsideBigCell:
            failures.append(index)
            if last_good is None:
                raise PipelineError("factorize", "no big-cell point found on the grid", index)
            sr = last_good
        except Exception as exc:
            raise PipelineError("factorize", exc, index)
        splits[index] = sr
        W0 = sr.Vplus.coeff(0)
        A = W0 @ pair.eta.coefficient(-1, ec) @ np.linalg.inv(W0)
        a12[index], a21[index] = A[0, 1], A[1, 0]
        B = pair.tau.coefficient(1, tc)
        b12[index], b21[index] = B[0, 1], B[1, 0]
    return splits, a12, a21, b12, b21, failures


def run_pipeline(cfg):
    """Execute the full construction and verification for one configuration."""
    pair = build_pair(cfg)
    dom = cfg.domain
    kind = cfg.kind
    if kind.startswith("c"):
        Z = dom.complex_grid()
        try:
            frames = ode.integrate_frame(
                pair.eta, Z, steps_per_cell=cfg.steps_per_cell, kcap=cfg.kcap
            )
        except Exception as exc:
            raise PipelineError("integrate", exc)
        base_index = frames.base_index

        def points():
            for idx in np.ndindex(Z.shape):
                C = frames.values[idx]
                L = realform.involute_group(kind, C, kcap=cfg.kcap)
                yield idx, C, L, Z[idx], np.conj(Z[idx])

    else:
        xs, ys = dom.x_axis, dom.y_axis
        try:
            fC = ode.integrate_frame(pair.eta, xs, steps_per_cell=cfg.steps_per_cell, kcap=cfg.kcap)
            fL = ode.integrate_frame(pair.tau, ys, steps_per_cell=cfg.steps_per_cell, kcap=cfg.kcap)
        except Exception as exc:
            raise PipelineError("integrate", exc)
        base_index = (fL.base_index[0], fC.base_index[0])

        def points():
            for j in range(dom.ny):
                for i in range(dom.nx):
                    yield (j, i), fC.values[i], fL.values[j], xs[i], ys[j]

    splits, a12, a21, b12, b21, failures = _factor_grid(cfg, pair, points())
    try:
        gauged, gauge = factor.gauge_fix(splits, a12, a21, b12, b21, cfg.H, base_index)
    except Exception as exc:
        raise PipelineError("gauge", exc)
    sp = SpectralPoint.for_class(kind, t=cfg.t, q=cfg.q, sign=cfg.sign)
    try:
        patch = sym.sym_real(kind, gauged, dom.x_axis, dom.y_axis, sp, abs(cfg.H))
    except Exception as exc:
        raise PipelineError("sym", exc)
    parallel = sym.parallel_surface(patch) if kind in sym.PARALLEL_CLASSES else None
    try:
        report = geometry.invariant_report(
            kind, patch, gauge, sp, bigcell_failures=failures, tolerances=cfg.tolerances
        )
    except Exception as exc:
        raise PipelineError("verify", exc)
    return RunResult(cfg, pair, gauge, patch, parallel, report, splits, failures)

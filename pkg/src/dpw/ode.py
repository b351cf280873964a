"""Frame integration: solve dC = C * A(v) dv over a grid of coordinates.

The frame is propagated cell by cell with classical RK4 (several substeps per
cell); on a two-dimensional grid the integration first sweeps the basepoint's
row and then each column (or the transposed order), which is path independent
for holomorphic potentials up to integration error.  The determinant of the
frame is monitored and renormalized by the inverse square root of its
determinant series whenever the drift exceeds a threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import loopalg
from .loopalg import LaurentMatrix

#: renormalize the determinant when its Wiener-norm drift exceeds this
DET_DRIFT_TOL = 1e-10
#: a single cell moving the determinant by more than this is an integration failure
DET_STEP_TOL = 1e-6


class StepFailure(Exception):
    """The integrator lost the unit-determinant constraint inside one cell."""

    def __init__(self, index, drift):
        self.index = index
        self.drift = drift
        super().__init__(f"determinant drift {drift:.3e} in cell ending at index {index}")


@dataclass
class FrameGrid:
    """Integrated frames over a coordinate grid.

    ``values`` is an object array of LaurentMatrix with the same shape as
    ``coords`` (1D for the split-type classes, 2D (ny, nx) for z-grids).
    """

    coords: np.ndarray
    values: np.ndarray
    base_index: tuple

    @property
    def shape(self):
        return self.values.shape


def _det_drift(frame):
    d = loopalg.det_series(frame)
    return loopalg.wiener_norm(loopalg.sub(d, loopalg.identity(frame.twisted))), d


def _renormalize(frame, kcap):
    drift, d = _det_drift(frame)
    if drift > DET_DRIFT_TOL:
        s = loopalg.scalar_inv_sqrt(d, kcap=kcap)
        frame = loopalg.mul(frame, s, kcap=kcap)
    return frame


def _advance(frame, pot, v0, v1, steps, kcap):
    """Propagate the frame from coordinate v0 to v1 with RK4 substeps."""
    h = (v1 - v0) / steps
    # potential values on the half-step lattice shared by the RK4 stages
    A_vals = [pot.eval_at(v0 + 0.5 * j * h) for j in range(2 * steps + 1)]
    for n in range(steps):

        def rhs(C, j):
            return loopalg.scale(h, loopalg.mul(C, A_vals[j], kcap=kcap))

        k1 = rhs(frame, 2 * n)
        k2 = rhs(loopalg.add(frame, loopalg.scale(0.5, k1)), 2 * n + 1)
        k3 = rhs(loopalg.add(frame, loopalg.scale(0.5, k2)), 2 * n + 1)
        k4 = rhs(loopalg.add(frame, k3), 2 * n + 2)
        increment = loopalg.scale(
            1.0 / 6.0,
            loopalg.add(loopalg.add(k1, loopalg.scale(2.0, k2)), loopalg.add(loopalg.scale(2.0, k3), k4)),
        )
        frame = loopalg.add(frame, increment)
    return frame


def integrate_frame(pot, coords, base_index=None, steps_per_cell=8, kcap=loopalg.DEFAULT_KCAP, order="row-major"):
    """Integrate dC = C A dv with C(basepoint) = id over a 1D or 2D grid.

    For 2D grids ``order`` selects row-then-columns ("row-major") or
    columns-then-row ("col-major") sweeps; both must agree up to integration
    error for holomorphic coefficient functions.
    """
    coords = np.asarray(coords)
    if coords.ndim == 1:
        return _integrate_1d(pot, coords, base_index, steps_per_cell, kcap)
    if coords.ndim != 2:
        raise ValueError("coords must be a 1D axis or a 2D grid")
    if base_index is None:
        base_index = (coords.shape[0] // 2, coords.shape[1] // 2)
    if order == "col-major":
        transposed = integrate_frame(
            pot, coords.T, (base_index[1], base_index[0]), steps_per_cell, kcap, order="row-major"
        )
        return FrameGrid(coords, transposed.values.T, tuple(base_index))

    ny, nx = coords.shape
    by, bx = base_index
    values = np.empty((ny, nx), dtype=object)
    values[by, bx] = loopalg.identity()

    def step(frame, v0, v1, index):
        before, _ = _det_drift(frame)
        frame = _advance(frame, pot, v0, v1, steps_per_cell, kcap)
        after, _ = _det_drift(frame)
        if after - before > DET_STEP_TOL:
            raise StepFailure(index, after - before)
        return _renormalize(frame, kcap)

    # spine row through the basepoint
    for j in range(bx + 1, nx):
        values[by, j] = step(values[by, j - 1], coords[by, j - 1], coords[by, j], (by, j))
    for j in range(bx - 1, -1, -1):
        values[by, j] = step(values[by, j + 1], coords[by, j + 1], coords[by, j], (by, j))
    # columns
    for j in range(nx):
        for i in range(by + 1, ny):
            values[i, j] = step(values[i - 1, j], coords[i - 1, j], coords[i, j], (i, j))
        for i in range(by - 1, -1, -1):
            values[i, j] = step(values[i + 1, j], coords[i + 1, j], coords[i, j], (i, j))
    return FrameGrid(coords, values, tuple(base_index))


def _integrate_1d(pot, axis, base_index, steps_per_cell, kcap):
    n = axis.size
    if base_index is None:
        base_index = n // 2
    if isinstance(base_index, tuple):
        base_index = base_index[0]
    values = np.empty(n, dtype=object)
    values[base_index] = loopalg.identity()

    def step(frame, v0, v1, index):
        before, _ = _det_drift(frame)
        frame = _advance(frame, pot, v0, v1, steps_per_cell, kcap)
        after, _ = _det_drift(frame)
        if after - before > DET_STEP_TOL:
            raise StepFailure(index, after - before)
        return _renormalize(frame, kcap)

    for i in range(base_index + 1, n):
        values[i] = step(values[i - 1], axis[i - 1], axis[i], (i,))
    for i in range(base_index - 1, -1, -1):
        values[i] = step(values[i + 1], axis[i + 1], axis[i], (i,))
    return FrameGrid(axis, values, (base_index,))

"""Writers for run artifacts: mesh, delimited points, report and figures."""

from __future__ import annotations

import json
import os

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from . import geometry  # noqa: E402


def chart_coordinates(patch):
    """Three real coordinates for rendering a patch.

    R^3 and R^{1,2} points are written as-is (x1, x2, x3); hyperbolic points
    are mapped to the Poincare unit ball, (x1, x2, x3) / (1 + x0).
    """
    P = patch.points
    if P.shape[-1] == 3:
        return P.copy()
    # points satisfy x0^2 - x1^2 - x2^2 - x3^2 = 1 in the Herm(2)
    # identification (x0 the trace component), so this is the standard chart
    return P[..., :3] / (1.0 + P[..., 3:4])


def write_obj(path, patch):
    """Wavefront OBJ: vertices in row-major grid order, 1-based triangle faces."""
    coords = chart_coordinates(patch)
    ny, nx = coords.shape[:2]
    lines = []
    for i in range(ny):
        for j in range(nx):
            x, y, z = coords[i, j]
            lines.append(f"v {x:.12g} {y:.12g} {z:.12g}")
    for i in range(ny - 1):
        for j in range(nx - 1):
            a = i * nx + j + 1
            b = a + 1
            c = a + nx
            d = c + 1
            lines.append(f"f {a} {b} {d}")
            lines.append(f"f {a} {d} {c}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_points_csv(path, patch):
    """Delimited per-vertex table: grid coordinates and ambient components."""
    P = patch.points
    ncomp = P.shape[-1]
    header = ["x", "y"] + [f"p{k+1}" for k in range(ncomp)]
    rows = [",".join(header)]
    for i in range(P.shape[0]):
        for j in range(P.shape[1]):
            vals = [patch.x_axis[j], patch.y_axis[i], *P[i, j]]
            rows.append(",".join(f"{v:.12g}" for v in vals))
    with open(path, "w") as fh:
        fh.write("\n".join(rows) + "\n")


def write_raw_points(path, patch):
    """Raw ambient data for four-component patches: the (x1, x2, x3, x0)
    vectors together with the 2x2 hermitian matrix entries per grid point."""
    P = patch.points
    M = patch.mats
    payload = {
        "model": patch.model,
        "shape": list(P.shape[:2]),
        "vectors": P.tolist(),
        "matrices_re": M.real.tolist(),
        "matrices_im": M.imag.tolist(),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")


def write_report(path, report):
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_splits(path, splits):
    """Dump the splitting factors for every grid point."""
    payload = []
    for idx in np.ndindex(splits.shape):
        sr = splits[idx]
        payload.append(
            {
                "index": list(idx),
                "Vplus": sr.Vplus.to_json(),
                "Vminus": sr.Vminus.to_json(),
                "residual": sr.residual,
                "cond": sr.cond,
            }
        )
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")


def render_figures(outdir, result):
    """Render the surface and the curvature field to PNG files."""
    patch = result.patch
    coords = chart_coordinates(patch)
    fig = plt.figure(figsize=(6, 5))
    ax = fig.add_subplot(1, 1, 1, projection="3d")
    ax.plot_surface(
        coords[..., 0], coords[..., 1], coords[..., 2], cmap="viridis", linewidth=0, antialiased=True
    )
    ax.set_title(f"class {patch.kind} surface")
    surface_path = os.path.join(outdir, "surface.png")
    fig.savefig(surface_path, dpi=120, bbox_inches="tight")
    plt.close(fig)

    try:
        forms = geometry.fundamental_forms_numeric(patch, check_degenerate=False)
        curv = geometry.curvatures(forms, patch.kind)
        field = curv.H_mean.real if patch.kind == "c4" else curv.K.real
        label = "mean curvature" if patch.kind == "c4" else "Gauss curvature"
    except Exception:
        field = None
    fig, ax = plt.subplots(figsize=(6, 5))
    if field is not None:
        im = ax.imshow(
            field,
            origin="lower",
            extent=(patch.x_axis[1], patch.x_axis[-2], patch.y_axis[1], patch.y_axis[-2]),
            cmap="coolwarm",
        )
        fig.colorbar(im, ax=ax, label=label)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(f"class {patch.kind} curvature field")
    curv_path = os.path.join(outdir, "curvature.png")
    fig.savefig(curv_path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return [surface_path, curv_path]


def export_run(outdir, result, dump_splits=False, figures=True):
    """Write all artifacts of a run into ``outdir``; returns written paths."""
    os.makedirs(outdir, exist_ok=True)
    paths = []

    obj_path = os.path.join(outdir, "surface.obj")
    write_obj(obj_path, result.patch)
    paths.append(obj_path)

    csv_path = os.path.join(outdir, "points.csv")
    write_points_csv(csv_path, result.patch)
    paths.append(csv_path)

    if result.patch.points.shape[-1] == 4:
        raw_path = os.path.join(outdir, "points_raw.json")
        write_raw_points(raw_path, result.patch)
        paths.append(raw_path)

    if result.parallel is not None:
        par_path = os.path.join(outdir, "parallel.obj")
        write_obj(par_path, result.parallel)
        paths.append(par_path)

    report_path = os.path.join(outdir, "report.json")
    write_report(report_path, result.report)
    paths.append(report_path)

    if dump_splits:
        splits_path = os.path.join(outdir, "splits.json")
        write_splits(splits_path, result.splits)
        paths.append(splits_path)

    if figures:
        paths.extend(render_figures(outdir, result))
    return paths

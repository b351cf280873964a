"""Command line entry point."""

from __future__ import annotations

import json
import sys

import click

from . import export
from .pipeline import ConfigError, PipelineError, RunConfig, run_pipeline


@click.group()
def main():
    """Construct and verify constant-curvature surfaces from loop potentials."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--class", "kind", default=None, help="Override the surface class (c1..c4, s1..s3).")
@click.option("--lambda-t", "t", default=None, type=float, help="Angle/log of the spectral value.")
@click.option("--q", default=None, type=float, help="Circle radius parameter (class c4 only).")
@click.option("--kcap", default=None, type=int, help="Laurent degree cap.")
@click.option("--grid", default=None, type=int, help="Override the grid to N x N points.")
@click.option("--out", "outdir", default="out", type=click.Path(file_okay=False))
@click.option("--dump-splits", is_flag=True, help="Also dump the splitting factors per grid point.")
@click.option("--no-figures", is_flag=True, help="Skip rendering the PNG figures.")
def run(config_path, kind, t, q, kcap, grid, outdir, dump_splits, no_figures):
    """Run the construction for a config file and write all artifacts.

    Exits 0 when every verification invariant is within tolerance, 1 when the
    report flags a violation, 2 on configuration or pipeline errors.
    """
    try:
        with open(config_path) as fh:
            data = json.load(fh)
        cfg = RunConfig.from_dict(data, kind=kind, t=t, q=q, kcap=kcap, grid=grid)
        result = run_pipeline(cfg)
    except (ConfigError, PipelineError, json.JSONDecodeError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    paths = export.export_run(outdir, result, dump_splits=dump_splits, figures=not no_figures)
    for path in paths:
        click.echo(path)
    report = result.report
    for name, passed in report["checks"].items():
        click.echo(f"{'PASS' if passed else 'FAIL'} {name}")
    sys.exit(0 if report["ok"] else 1)


if __name__ == "__main__":
    main()

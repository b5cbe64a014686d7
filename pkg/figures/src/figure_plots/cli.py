"""Standalone rendering command: figure-plots --spec spec.yaml --out base.png

The spec file is YAML:

    trajectory: outputs/car_static_trajectory.csv
    scenario: car_static.yaml        # optional, draws obstacles + endpoints
    summary: outputs/car_static_summary.yaml   # optional, decomposed balls
    view: planar                     # planar | 3d | 3d+projection
    frames: [0, 4, 8]                # physical times, one image each

Relative paths inside the spec resolve against the spec file's directory.
"""
from __future__ import annotations

import sys
from pathlib import Path

import click
import yaml

from .io import FormatError
from .render import PlotSpec, render

EXIT_OK = 0
EXIT_ERROR = 1


def load_spec(path) -> PlotSpec:
    path = Path(path)
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if not isinstance(data, dict):
        raise FormatError(f"{path}: spec file must be a mapping")
    if "trajectory" not in data:
        raise FormatError(f"{path}: missing required field 'trajectory'")

    def resolve(key):
        if data.get(key) is None:
            return None
        ref = Path(data[key])
        return ref if ref.is_absolute() else path.parent / ref

    frames = data.get("frames", [0.0])
    try:
        frames = [float(t) for t in frames]
    except (TypeError, ValueError):
        raise FormatError(f"{path}: frames must be a list of numbers") from None
    return PlotSpec(
        trajectory=resolve("trajectory"),
        scenario=resolve("scenario"),
        summary=resolve("summary"),
        view=str(data.get("view", "planar")),
        frames=frames,
    )


@click.command()
@click.option("--spec", "spec_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="YAML plot spec file.")
@click.option("--out", "out_path", required=True, type=click.Path(),
              help="Base output path; frame i lands in <base>_frame<i>.png.")
@click.option("--quiet", is_flag=True)
def main(spec_path, out_path, quiet):
    """Render planner trajectory files into per-frame images."""
    try:
        spec = load_spec(spec_path)
        written = render(spec, out_path)
    except (FormatError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_ERROR)
    if not quiet:
        for target in written:
            click.echo(f"wrote {target}")
    sys.exit(EXIT_OK)


if __name__ == "__main__":
    main()

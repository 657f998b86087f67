"""Deterministic artifact writers: CSV at full precision, sorted-key JSON.

Numeric CSVs use 17 significant digits so repeated runs of one configuration
diff byte-identically and regressions stay meaningful.  Timings never enter
numeric artifacts; they live in the run manifest only.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .fields import Field, FieldKind


def fmt(x) -> str:
    return f"{float(x):.17g}"


def write_csv(path: str, header: list, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(v if isinstance(v, str) else fmt(v) for v in row) + "\n")


def write_json(path: str, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _coord_header(dim: int, with_z3: bool) -> list:
    names = ["z1", "z2"][:dim]
    return names + (["z3"] if with_z3 else [])


def velocity_rows(field: Field):
    grid = field.grid
    dim = grid.dim
    for m in range(dim + 1):
        name = "u3" if m == dim else f"u{m + 1}"
        if name not in field.data:
            continue
        sites = grid.component_sites(m).reshape(-1, dim + 1)
        vals = field.data[name].ravel()
        for coords, v in zip(sites, vals):
            yield [name, *coords, v]
    for m in range(dim):
        name = f"b{m + 1}"
        if name not in field.data:
            continue
        sites = grid.component_sites(m)[..., 0, :].reshape(-1, dim + 1)
        sites = sites.copy()
        sites[:, -1] = 0.0
        vals = field.data[name].ravel()
        for coords, v in zip(sites, vals):
            yield [name, *coords, v]


def write_velocity_csv(path: str, field: Field) -> None:
    dim = field.grid.dim
    write_csv(path, ["component", *_coord_header(dim, True), "value"], velocity_rows(field))


def write_pressure_csv(path: str, field: Field) -> None:
    grid = field.grid
    dim = grid.dim
    if field.kind is FieldKind.PRESSURE_REDUCED:
        sites = grid.domain.cell_points().reshape(-1, dim)
        header = [*_coord_header(dim, False), "value"]
    else:
        sites = grid.pressure_sites().reshape(-1, dim + 1)
        header = [*_coord_header(dim, True), "value"]
    rows = ([*coords, v] for coords, v in zip(sites, field.data.ravel()))
    write_csv(path, header, rows)


def write_flux_csv(path: str, flux_field: dict, domain) -> None:
    dim = domain.dim
    rows = []
    for axis in sorted(flux_field):
        pts = domain.face_points(axis).reshape(-1, dim)
        q = flux_field[axis].reshape(-1, dim)
        for comp in range(dim):
            for coords, v in zip(pts, q[:, comp]):
                rows.append([f"axis{axis + 1}_q{comp + 1}", *coords, v])
    write_csv(path, ["face_component", *_coord_header(dim, False), "value"], rows)


def write_metrics_csv(path: str, records: list) -> None:
    """Flat (eps, metric, value) rows, metric names sorted per eps."""
    rows = []
    for rec in records:
        eps = rec["eps"]
        for key in sorted(rec):
            if key == "eps":
                continue
            rows.append([fmt(eps), key, rec[key]])
    write_csv(path, ["eps", "metric", "value"], rows)


def write_manifest(outdir: str, command: str, version: str, cfg: dict,
                   overrides: dict, timings: dict, artifacts: list) -> None:
    write_json(os.path.join(outdir, "manifest.json"), {
        "command": command,
        "version": version,
        "config": cfg,
        "overrides": {k: v for k, v in overrides.items() if v is not None},
        "timings": timings,
        "artifacts": sorted(artifacts),
    })

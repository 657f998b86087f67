"""Declarative run configuration: one JSON file, validated before any solve.

Every module-level precondition is re-checked at load time so that a bad
configuration is rejected with a field-path error message instead of a
mid-solve failure.  Schema (see README for the full description):

    {
      "geometry": {"dim": 1, "extent": [[0.0, 1.0]], "n_cells": [128],
                   "n_z3": 64, "periodic": true,
                   "height": {"preset": "constant", "coeffs": [1.0]}},
      "physics":  {"nu": 1.0, "s": 1.5, "gamma": 0.0, "K": 1.0,
                   "delta_reg": null},
      "forcing":  {"preset": "rotational", "coeffs": [1.0, 1.0]},
      "eps": 0.05, "eps_list": [0.2, 0.1, 0.05],
      "convection": false, "workers": 1, "seed": 0,
      "solver": {"outer_tol": 1e-10, "picard_tol": 1e-10},
      "profile": {"G": 1.0, "h": 1.0},
      "output_dir": "runs"
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ParameterError
from .geometry import Domain, Grid3, HeightField
from .params import FluidParams
from .presets import FORCING_PRESETS, HEIGHT_PRESETS, make_forcing

_REQUIRED = object()

SOLVER_DEFAULTS = {
    "outer_tol": 1e-10,
    "outer_max_iters": 200,
    "picard_tol": 1e-10,
    "picard_max_iters": 500,
}


def _get(d: dict, path: str, default=_REQUIRED):
    node = d
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            if default is _REQUIRED:
                raise ConfigError(path, "missing required field")
            return default
        node = node[part]
    return node


def _number(d, path, default=_REQUIRED):
    v = _get(d, path, default)
    if v is None or isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(path, f"expected a number, got {v!r}")
    return float(v)


def _int(d, path, default=_REQUIRED):
    v = _get(d, path, default)
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(path, f"expected an integer, got {v!r}")
    return v


@dataclass
class RunConfig:
    raw: dict
    domain: Domain
    height: HeightField
    grid: Grid3
    params: FluidParams
    forcing: object
    forcing_name: str
    eps: float | None
    eps_list: list
    gamma_list: list | None
    convection: bool
    workers: int
    seed: int
    solver: dict
    output_dir: str | None
    profile_G: object = None
    profile_h: float = 1.0
    extras: dict = field(default_factory=dict)


def load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError("config", f"file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"not valid JSON: {exc}")


def build_run(cfg: dict, overrides: dict | None = None) -> RunConfig:
    """Validate a config dict (plus flag overrides) into typed run inputs."""
    cfg = json.loads(json.dumps(cfg))  # deep copy, JSON-typed
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        node = cfg
        parts = key.split(".")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
        node[parts[-1]] = value

    dim = _int(cfg, "geometry.dim", 1)
    if dim not in (1, 2):
        raise ConfigError("geometry.dim", f"must be 1 or 2, got {dim}")
    extent = _get(cfg, "geometry.extent")
    if (not isinstance(extent, list) or len(extent) != dim
            or any(not isinstance(e, list) or len(e) != 2 for e in extent)):
        raise ConfigError("geometry.extent", f"expected {dim} [lo, hi] pairs")
    n_cells = _get(cfg, "geometry.n_cells")
    if not isinstance(n_cells, list) or len(n_cells) != dim:
        raise ConfigError("geometry.n_cells", f"expected {dim} cell counts")
    n_z3 = _int(cfg, "geometry.n_z3")
    periodic = bool(_get(cfg, "geometry.periodic", False))
    try:
        domain = Domain(lo=tuple(float(e[0]) for e in extent),
                        hi=tuple(float(e[1]) for e in extent),
                        n=tuple(int(m) for m in n_cells),
                        periodic=periodic)
    except ParameterError as exc:
        raise ConfigError("geometry", str(exc))

    h_preset = _get(cfg, "geometry.height.preset", "constant")
    if h_preset not in HEIGHT_PRESETS:
        raise ConfigError("geometry.height.preset", f"unknown preset {h_preset!r}")
    h_coeffs = _get(cfg, "geometry.height.coeffs", [1.0])
    try:
        height = HeightField.from_preset(domain, h_preset, h_coeffs)
        grid = Grid3(height, n_z3)
    except ParameterError as exc:
        raise ConfigError("geometry.height", str(exc))

    nu = _number(cfg, "physics.nu")
    s = _number(cfg, "physics.s")
    gamma = _number(cfg, "physics.gamma")
    K = _get(cfg, "physics.K", 1.0)
    delta_reg = _get(cfg, "physics.delta_reg", None)
    if delta_reg is not None:
        delta_reg = _number(cfg, "physics.delta_reg")
    if dim == 2:
        arr = np.asarray(K, dtype=float) if isinstance(K, list) else None
        if arr is None or arr.shape != (2, 2):
            raise ConfigError("physics.K", "expected a 2x2 matrix for dim 2")
    try:
        params = FluidParams(nu=nu, s=s, gamma=gamma, K=K, delta_reg=delta_reg, dim=dim)
    except ParameterError as exc:
        raise ConfigError("physics.K" if "tensor" in str(exc) else "physics", str(exc))

    f_preset = _get(cfg, "forcing.preset", "zero")
    if f_preset not in FORCING_PRESETS:
        raise ConfigError("forcing.preset", f"unknown preset {f_preset!r}")
    forcing = make_forcing(f_preset, _get(cfg, "forcing.coeffs", []), domain.lo, domain.hi)

    eps = _get(cfg, "eps", None)
    if eps is not None:
        eps = _number(cfg, "eps")
        if eps <= 0:
            raise ConfigError("eps", "must be positive")
    eps_list = _get(cfg, "eps_list", [])
    if not isinstance(eps_list, list) or any(
            isinstance(e, bool) or not isinstance(e, (int, float)) or e <= 0 for e in eps_list):
        raise ConfigError("eps_list", "expected a list of positive numbers")
    eps_list = sorted((float(e) for e in eps_list), reverse=True)

    gamma_list = _get(cfg, "gamma_list", None)
    if gamma_list is not None:
        if not isinstance(gamma_list, list) or any(
                isinstance(g, bool) or not isinstance(g, (int, float)) for g in gamma_list):
            raise ConfigError("gamma_list", "expected a list of numbers")
        gamma_list = [float(g) for g in gamma_list]

    solver = dict(SOLVER_DEFAULTS)
    solver.update({k: _number(cfg, f"solver.{k}") for k in _get(cfg, "solver", {})
                   if k in SOLVER_DEFAULTS})

    workers = _int(cfg, "workers", 1)
    if workers < 1:
        raise ConfigError("workers", "must be >= 1")

    profile_G = _get(cfg, "profile.G", 1.0)
    profile_h = _number(cfg, "profile.h", 1.0)
    if profile_h <= 0:
        raise ConfigError("profile.h", "must be positive")

    return RunConfig(
        raw=cfg, domain=domain, height=height, grid=grid, params=params,
        forcing=forcing, forcing_name=f_preset, eps=eps, eps_list=eps_list,
        gamma_list=gamma_list, convection=bool(_get(cfg, "convection", False)),
        workers=workers, seed=_int(cfg, "seed", 0), solver=solver,
        output_dir=_get(cfg, "output_dir", None),
        profile_G=profile_G, profile_h=profile_h)

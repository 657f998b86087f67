"""Discrete fields on the staggered grid, quadrature norms, zero-mean projection.

Velocity fields store one array per component under the keys ``u1``, (``u2``,)
``u3`` plus the bottom-wall slip layers ``b1`` (, ``b2``).  Constrained wall
entries are stored as zeros so arrays always carry the full staggered shape.
Pressure fields store a single cell-centered array.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import UsageError
from .geometry import Grid3


class FieldKind(enum.Enum):
    VELOCITY_FULL = "velocity_full"
    PRESSURE_FULL = "pressure_full"
    VELOCITY_REDUCED = "velocity_reduced"
    PRESSURE_REDUCED = "pressure_reduced"


VELOCITY_KINDS = (FieldKind.VELOCITY_FULL, FieldKind.VELOCITY_REDUCED)
PRESSURE_KINDS = (FieldKind.PRESSURE_FULL, FieldKind.PRESSURE_REDUCED)


def component_names(dim: int) -> list[str]:
    return ["u1", "u2", "u3", "b1", "b2"] if dim == 2 else ["u1", "u3", "b1"]


@dataclass
class Field:
    kind: FieldKind
    grid: Grid3
    data: dict | np.ndarray
    zero_mean: bool = False

    def __post_init__(self):
        if self.kind in VELOCITY_KINDS:
            if not isinstance(self.data, dict):
                raise UsageError("velocity fields store a component dict")
            for arr in self.data.values():
                arr.setflags(write=False)
        else:
            self.data = np.asarray(self.data, dtype=float)
            self.data.setflags(write=False)

    @property
    def values(self) -> np.ndarray:
        """All samples as one flat array (fixed component order)."""
        if self.kind in PRESSURE_KINDS:
            return self.data.ravel()
        names = component_names(self.grid.dim)
        return np.concatenate([self.data[n].ravel() for n in names if n in self.data])


def zero_mean_project(values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Subtract the weighted mean; idempotent up to roundoff."""
    values = np.asarray(values, dtype=float)
    mean = float(np.sum(values * weights) / np.sum(weights))
    return values - mean


def make_velocity(grid: Grid3, kind: FieldKind, data: dict) -> Field:
    return Field(kind, grid, {k: np.array(v, dtype=float) for k, v in data.items()})


def make_pressure(grid: Grid3, kind: FieldKind, values, zero_mean=False) -> Field:
    return Field(kind, grid, np.array(values, dtype=float), zero_mean=zero_mean)


def zero_velocity(grid: Grid3, kind: FieldKind = FieldKind.VELOCITY_FULL) -> Field:
    dim = grid.dim
    data = {}
    for m in range(dim):
        data[f"u{m + 1}"] = np.zeros(grid.velocity_shape(m))
        data[f"b{m + 1}"] = np.zeros(grid.wall_shape(m))
    data["u3"] = np.zeros(grid.velocity_shape(dim))
    return make_velocity(grid, kind, data)


# ---------------------------------------------------------------------------
# quadrature weights

def _axis_weights(n_sites: int, spacing: float, nodal: bool, periodic: bool) -> np.ndarray:
    w = np.full(n_sites, spacing)
    if nodal and not periodic:
        w[0] = w[-1] = 0.5 * spacing
    return w


def component_weights(grid: Grid3, comp: int) -> np.ndarray:
    """Quadrature weight per site of one velocity component (trapezoid along
    its own axis, midpoint elsewhere)."""
    dom = grid.domain
    shape = grid.velocity_shape(comp)
    axes = []
    for a in range(grid.dim):
        nodal = a == comp
        axes.append(_axis_weights(shape[a], dom.dx[a], nodal, dom.periodic))
    if comp < grid.dim:
        if not grid.height.is_constant:
            # column-scaled vertical spacing h(face)/n_z3 over a varying gap
            h_face = grid.height.faces(comp)
            w = np.ones(shape)
            for a, wa in enumerate(axes):
                w *= wa.reshape([-1 if i == a else 1 for i in range(len(shape))])
            w *= (h_face / grid.n_z3)[..., None]
            return w
        axes.append(np.full(shape[-1], grid.dz))
    else:
        axes.append(_axis_weights(shape[-1], grid.dz, True, False))
    w = np.ones(shape)
    for a, wa in enumerate(axes):
        w *= wa.reshape([-1 if i == a else 1 for i in range(len(shape))])
    return w


def pressure_weights(grid: Grid3, reduced: bool) -> np.ndarray:
    dom = grid.domain
    if reduced:
        return np.full(tuple(dom.n), dom.cell_volume)
    return np.full(grid.pressure_shape(), dom.cell_volume * grid.dz)


def bottom_trace(field: Field) -> tuple[np.ndarray, np.ndarray]:
    """Collocated bottom-wall trace of the horizontal velocity.

    Returns ``(trace, weights)`` where ``trace`` has shape ``sites x dim``:
    in dim 1 the slip samples sit at the wall nodes, in dim 2 the two face
    layers are averaged to cell-bottom centers.
    """
    grid = field.grid
    dom = grid.domain
    if field.kind not in VELOCITY_KINDS:
        raise UsageError("bottom trace is defined for velocity fields only")
    if grid.dim == 1:
        b = field.data["b1"]
        w = _axis_weights(b.shape[0], dom.dx[0], True, dom.periodic)
        return b.reshape(-1, 1), w
    b1, b2 = field.data["b1"], field.data["b2"]
    c1 = 0.5 * (b1[:-1, :] + b1[1:, :])
    c2 = 0.5 * (b2[:, :-1] + b2[:, 1:])
    trace = np.stack([c1.ravel(), c2.ravel()], axis=-1)
    w = np.full(trace.shape[0], dom.cell_volume)
    return trace, w


def norms(field: Field, p: float = 2.0, restriction: str = "Omega") -> float:
    """Quadrature L^p norm of a field over the flow domain or the bottom wall.

    The bottom-wall restriction uses the flat-wall surface measure (plain
    in-plane quadrature) and is defined for velocity fields only.
    """
    if restriction == "Omega":
        if field.kind in PRESSURE_KINDS:
            w = pressure_weights(field.grid, field.kind is FieldKind.PRESSURE_REDUCED)
            return float(np.sum(w * np.abs(field.data) ** p) ** (1.0 / p))
        if p != 2.0:
            raise UsageError("volume norms of staggered velocity fields support p=2 only")
        total = 0.0
        for comp in range(field.grid.dim + 1):
            name = "u3" if comp == field.grid.dim else f"u{comp + 1}"
            if name not in field.data:
                continue
            w = component_weights(field.grid, comp)
            total += float(np.sum(w * field.data[name] ** 2))
        return float(np.sqrt(total))
    if restriction == "Gamma0":
        if field.kind not in VELOCITY_KINDS:
            raise UsageError("bottom-wall norms are defined for velocity fields only")
        trace, w = bottom_trace(field)
        mag = np.sqrt(np.sum(trace**2, axis=-1))
        return float(np.sum(w * mag**p) ** (1.0 / p))
    raise UsageError(f"unknown restriction {restriction!r}")

"""Reduced-domain geometry: the gap field over omega and the staggered 3D grid.

The reduced domain omega is an interval (dim 1) or an axis-aligned rectangle
(dim 2); the flow domain is the dilated box ``omega x (0, h(z'))``.  The
interval case optionally wraps around (periodic ends), which models an
annular film; the rectangle is always wall-bounded.

Staggering: pressure lives at cell centers, each velocity component on the
faces normal to its own axis.  Tangential velocity on the bottom wall is a
free unknown (the slip trace); every other wall value is constrained to zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, UsageError
from .presets import make_height


@dataclass(frozen=True)
class Domain:
    """Extent and cell counts of the reduced domain."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    n: tuple[int, ...]
    periodic: bool = False

    def __post_init__(self):
        dim = len(self.n)
        if dim not in (1, 2) or len(self.lo) != dim or len(self.hi) != dim:
            raise ParameterError("domain must be a 1D interval or 2D rectangle")
        for a, b, m in zip(self.lo, self.hi, self.n):
            if b <= a:
                raise ParameterError("domain extents must have hi > lo")
            if m < 2:
                raise ParameterError("need at least 2 cells per axis")
        if self.periodic and dim != 1:
            raise ParameterError("periodic ends are only supported on an interval domain")

    @property
    def dim(self) -> int:
        return len(self.n)

    @property
    def dx(self) -> tuple[float, ...]:
        return tuple((b - a) / m for a, b, m in zip(self.lo, self.hi, self.n))

    def centers(self, axis: int) -> np.ndarray:
        d = self.dx[axis]
        return self.lo[axis] + (np.arange(self.n[axis]) + 0.5) * d

    def nodes(self, axis: int) -> np.ndarray:
        d = self.dx[axis]
        count = self.n[axis] if self.periodic else self.n[axis] + 1
        return self.lo[axis] + np.arange(count) * d

    def cell_points(self) -> np.ndarray:
        """Cell-center coordinates, shape ``n + (dim,)``."""
        axes = [self.centers(a) for a in range(self.dim)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def face_points(self, axis: int) -> np.ndarray:
        """Coordinates of faces normal to ``axis`` (nodes along it, centers elsewhere)."""
        axes = [self.nodes(a) if a == axis else self.centers(a) for a in range(self.dim)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.dx))


class HeightField:
    """Cell-sampled gap function h over the reduced domain.

    Values are sampled from a closed-form preset at cell centers; face values
    are the arithmetic mean of the two adjacent cells (boundary faces copy
    the single adjacent cell).  The gap must be strictly positive.
    """

    def __init__(self, domain: Domain, h_values: np.ndarray):
        h_values = np.asarray(h_values, dtype=float)
        if h_values.shape != tuple(domain.n):
            raise ParameterError(f"h_values shape {h_values.shape} != cells {tuple(domain.n)}")
        if h_values.min() <= 0.0:
            raise ParameterError("gap function must be strictly positive")
        self.domain = domain
        self.h_values = h_values
        self.h_values.setflags(write=False)

    @classmethod
    def from_preset(cls, domain: Domain, preset: str, coeffs) -> "HeightField":
        h = make_height(preset, coeffs, domain.lo, domain.hi)
        return cls(domain, h(domain.cell_points()))

    def faces(self, axis: int) -> np.ndarray:
        """Face-averaged gap values along ``axis`` (periodic wrap or boundary copy).

        Faces are indexed by node: face i sits between cells i-1 and i."""
        h = self.h_values
        if self.domain.periodic:
            return 0.5 * (np.roll(h, 1, axis=axis) + h)
        pad_lo = np.take(h, [0], axis=axis)
        pad_hi = np.take(h, [-1], axis=axis)
        padded = np.concatenate([pad_lo, h, pad_hi], axis=axis)
        idx_lo = [slice(None)] * h.ndim
        idx_hi = [slice(None)] * h.ndim
        idx_lo[axis] = slice(0, -1)
        idx_hi[axis] = slice(1, None)
        return 0.5 * (padded[tuple(idx_lo)] + padded[tuple(idx_hi)])

    @property
    def is_constant(self) -> bool:
        return bool(np.all(self.h_values == self.h_values.flat[0]))

    @property
    def h0(self) -> float:
        if not self.is_constant:
            raise UsageError("operation requires a constant gap")
        return float(self.h_values.flat[0])

    @property
    def max(self) -> float:
        return float(self.h_values.max())


@dataclass(frozen=True)
class Grid3:
    """Reduced grid x ``n_z3`` vertical cells on the dilated box.

    The full-order staggering requires a constant gap: the vertical spacing
    is the uniform ``h / n_z3``.  Component layouts (``dim`` horizontal axes
    plus the vertical):

    ==========  =========================================  ==================
    component   sites                                      constrained
    ==========  =========================================  ==================
    u1, (u2)    own-axis nodes x other centers x z-mids    side-wall columns
    b1, (b2)    same horizontal sites, z = 0               side-wall columns
    u3          centers x z-nodes                          z = 0 and z = h
    p           cell centers                               (zero mean)
    ==========  =========================================  ==================
    """

    height: HeightField
    n_z3: int
    _dz: float = field(init=False, repr=False)

    def __post_init__(self):
        if self.n_z3 < 2:
            raise ParameterError("need at least 2 vertical cells")
        dz = self.height.h0 / self.n_z3 if self.height.is_constant else float("nan")
        object.__setattr__(self, "_dz", dz)

    @property
    def domain(self) -> Domain:
        return self.height.domain

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def dz(self) -> float:
        if not self.height.is_constant:
            raise UsageError("uniform vertical spacing requires a constant gap")
        return self._dz

    def z_mids(self) -> np.ndarray:
        return (np.arange(self.n_z3) + 0.5) * self.dz

    def z_nodes(self) -> np.ndarray:
        return np.arange(self.n_z3 + 1) * self.dz

    def velocity_shape(self, comp: int) -> tuple[int, ...]:
        """Full array shape of horizontal component ``comp`` or the vertical (comp == dim)."""
        dom = self.domain
        if comp < self.dim:
            horiz = list(dom.n)
            horiz[comp] = dom.n[comp] if dom.periodic else dom.n[comp] + 1
            return tuple(horiz) + (self.n_z3,)
        return tuple(dom.n) + (self.n_z3 + 1,)

    def wall_shape(self, comp: int) -> tuple[int, ...]:
        return self.velocity_shape(comp)[:-1]

    def pressure_shape(self) -> tuple[int, ...]:
        return tuple(self.domain.n) + (self.n_z3,)

    def component_sites(self, comp: int) -> np.ndarray:
        """Physical coordinates of the component's sites, shape ``shape + (dim+1,)``."""
        dom = self.domain
        if comp < self.dim:
            axes = [dom.nodes(a) if a == comp else dom.centers(a) for a in range(self.dim)]
            axes.append(self.z_mids())
        else:
            axes = [dom.centers(a) for a in range(self.dim)]
            axes.append(self.z_nodes())
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def pressure_sites(self) -> np.ndarray:
        axes = [self.domain.centers(a) for a in range(self.dim)] + [self.z_mids()]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def same_layout(self, other: "Grid3") -> bool:
        a, b = self.domain, other.domain
        return (a.n == b.n and a.lo == b.lo and a.hi == b.hi
                and a.periodic == b.periodic and self.n_z3 == other.n_z3
                and np.array_equal(self.height.h_values, other.height.h_values))

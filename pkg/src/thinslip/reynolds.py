"""Reduced pressure problem: divergence-free column flux over omega.

Finds the zero-mean reduced pressure p such that the column flux

    q(z') = integral of the horizontal profile over the gap
          = G h^3 / (12 nu) + B(G) h / 2,      G = f' - grad p,

is discretely divergence free with zero normal flux on the boundary of
omega, then reconstructs the horizontal velocity from the per-column
profiles (the vertical component of the reduced field is identically zero).

Finite volumes on cell-centered pressure: face fluxes use face-averaged gaps
and face-normal pressure differences.  The sticking / perfectly-slipping
wall laws give linear fluxes (mobilities h^3/(12 nu) and h^3/(3 nu)); the
power-law wall is handled by a frozen-coefficient Picard loop: each step
solves the wall closure per face, freezes the resulting Navier-like
coefficient chi = |K B|_d^{s-2}, rebuilds the (symmetric) linear system, and
relaxes the pressure update.  Boundary faces carry zero mobility, which is
the exact discrete no-flux condition.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import SolverError, UsageError
from .fields import Field, FieldKind, make_pressure, make_velocity, zero_mean_project
from .geometry import Grid3, HeightField
from .params import FluidParams, Regime
from .profile import solve_profile_batch

PICARD_TOL = 1e-10
PICARD_MAX_ITERS = 500
PICARD_RELAX = 0.7


@dataclass
class LimitSolution:
    pressure: Field
    velocity: Field
    flux_field: dict
    picard_iters: int
    flux_div_residual: float
    update_history: list = field(default_factory=list)
    regime: Regime = Regime.CRITICAL
    delta: float = 0.0
    grid: Grid3 | None = None
    params: FluidParams | None = None

    @property
    def p_values(self) -> np.ndarray:
        return self.pressure.data


def _take(arr, index, axis):
    sl = [slice(None)] * arr.ndim
    sl[axis] = index
    return arr[tuple(sl)]


def _cell_gradient(p: np.ndarray, dx, axis: int, periodic: bool) -> np.ndarray:
    """Cell-centered derivative of p along ``axis`` (central, one-sided ends)."""
    if periodic:
        return (np.roll(p, -1, axis=axis) - np.roll(p, 1, axis=axis)) / (2.0 * dx[axis])
    g = np.empty_like(p)
    inner = (_take(p, slice(2, None), axis) - _take(p, slice(None, -2), axis)) / (2.0 * dx[axis])
    sl = [slice(None)] * p.ndim
    sl[axis] = slice(1, -1)
    g[tuple(sl)] = inner
    sl[axis] = 0
    g[tuple(sl)] = (_take(p, 1, axis) - _take(p, 0, axis)) / dx[axis]
    sl[axis] = -1
    g[tuple(sl)] = (_take(p, -1, axis) - _take(p, -2, axis)) / dx[axis]
    return g


def _face_driving(p: np.ndarray, f_face: np.ndarray, dom, axis: int) -> np.ndarray:
    """Driving vector G = f - grad p at the interior faces normal to ``axis``.

    Shape: interior-face shape + (dim,).  The normal component uses the
    two-cell difference; tangential components average the adjacent
    cell-centered gradients.
    """
    dim = dom.dim
    dx = dom.dx
    if dom.periodic:
        dpn = (p - np.roll(p, 1, axis=axis)) / dx[axis]
        G = np.array(f_face, copy=True)
        G[..., axis] -= dpn
        return G
    dpn = np.diff(p, axis=axis) / dx[axis]
    G = np.array(_take(f_face, slice(1, -1), axis), copy=True)
    G[..., axis] -= dpn
    for t in range(dim):
        if t == axis:
            continue
        gt = _cell_gradient(p, dx, t, dom.periodic)
        gt_face = 0.5 * (_take(gt, slice(None, -1), axis) + _take(gt, slice(1, None), axis))
        G[..., t] -= gt_face
    return G


def _face_closure(G_face: np.ndarray, h_face: np.ndarray, params: FluidParams,
                  regime: Regime, delta: float):
    """Profile closure per face: returns (B, flux vector, chi)."""
    shape = G_face.shape[:-1]
    dim = G_face.shape[-1]
    Gf = G_face.reshape(-1, dim)
    hf = h_face.reshape(-1)
    _, B, flux, _, _ = solve_profile_batch(Gf, hf, params, regime, delta)
    Kb = B @ params.K_mat.T
    chi = (np.sum(Kb**2, axis=-1) + delta**2) ** ((params.s - 2.0) / 2.0)
    return (B.reshape(shape + (dim,)), flux.reshape(shape + (dim,)), chi.reshape(shape))


def _frozen_mobility(h_face: np.ndarray, chi: np.ndarray, params: FluidParams) -> np.ndarray:
    """Frozen-coefficient flux mobility matrix per face.

    With the Navier-like coefficient chi frozen, the wall closure is linear:
    B = (I + (h/nu) chi K^2)^{-1} G h^2/(2 nu), so the flux is M G with
    M = h^3/(12 nu) I + (h^3/(4 nu)) (I + (h/nu) chi K^2)^{-1}.
    """
    nu = params.nu
    dim = params.K_mat.shape[0]
    K2 = params.K_mat @ params.K_mat
    A = np.eye(dim) + (h_face[..., None, None] / nu) * chi[..., None, None] * K2
    if dim == 1:
        Ainv = 1.0 / A
    else:
        det = A[..., 0, 0] * A[..., 1, 1] - A[..., 0, 1] * A[..., 1, 0]
        Ainv = np.empty_like(A)
        Ainv[..., 0, 0] = A[..., 1, 1] / det
        Ainv[..., 1, 1] = A[..., 0, 0] / det
        Ainv[..., 0, 1] = -A[..., 0, 1] / det
        Ainv[..., 1, 0] = -A[..., 1, 0] / det
    eye = np.broadcast_to(np.eye(dim), A.shape)
    return (h_face**3 / (12.0 * nu))[..., None, None] * eye \
        + (h_face**3 / (4.0 * nu))[..., None, None] * Ainv


class _ReducedAssembler:
    """Shared finite-volume assembly for the reduced pressure equation."""

    def __init__(self, hf: HeightField, forcing, params: FluidParams):
        self.hf = hf
        self.dom = hf.domain
        self.params = params
        self.dim = self.dom.dim
        self.ncells = int(np.prod(self.dom.n))
        self.cell_ids = np.arange(self.ncells).reshape(tuple(self.dom.n))
        self.h_face = [hf.faces(a) for a in range(self.dim)]
        self.f_face = [np.asarray(forcing(self.dom.face_points(a))) for a in range(self.dim)]
        self.area = self.dom.cell_volume

    def interior(self, arr_face: np.ndarray, axis: int) -> np.ndarray:
        if self.dom.periodic:
            return arr_face
        return _take(arr_face, slice(1, -1), axis)

    def lo_hi_cells(self, axis: int):
        P = self.cell_ids
        if self.dom.periodic:
            return np.roll(P, 1, axis=axis), P
        return _take(P, slice(None, -1), axis), _take(P, slice(1, None), axis)

    def system(self, m_face: list, q0_face: list):
        """Assemble A p = rhs from interior-face normal mobilities and flux
        offsets (both indexed like interior faces)."""
        rows, cols, vals = [], [], []
        rhs = np.zeros(self.ncells)
        for a in range(self.dim):
            T = self.area / self.dom.dx[a]
            lo, hi = self.lo_hi_cells(a)
            lo, hi = lo.ravel(), hi.ravel()
            c = (m_face[a] * T / self.dom.dx[a]).ravel()
            rows += [lo, lo, hi, hi]
            cols += [lo, hi, hi, lo]
            vals += [c, -c, c, -c]
            q0T = (q0_face[a] * T).ravel()
            np.add.at(rhs, lo, -q0T)
            np.add.at(rhs, hi, q0T)
        A = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                          shape=(self.ncells, self.ncells)).tocsr()
        return A, rhs

    def solve_pinned(self, A: sp.csr_matrix, rhs: np.ndarray) -> np.ndarray:
        A = A.tolil()
        A[0, :] = 0.0
        A[0, 0] = 1.0
        rhs = rhs.copy()
        rhs[0] = 0.0
        p = spla.splu(A.tocsc()).solve(rhs)
        return p.reshape(tuple(self.dom.n))


def solve_limit(hf: HeightField, forcing, params: FluidParams, n_z3: int = 16,
                picard_tol: float = PICARD_TOL, picard_max_iters: int = PICARD_MAX_ITERS,
                relax: float = PICARD_RELAX) -> LimitSolution:
    """Solve the reduced pressure problem and reconstruct the limit velocity.

    ``forcing`` is a vectorized in-plane force density evaluated at point
    arrays of shape (..., dim).  The wall regime is derived from
    ``(params.s, params.gamma)``.
    """
    if params.dim != hf.domain.dim:
        raise UsageError(f"parameter dimension {params.dim} != domain dimension {hf.domain.dim}")
    regime, _ = params.regime()
    asm = _ReducedAssembler(hf, forcing, params)
    dom = asm.dom
    nu = params.nu

    f_scale = float(np.max(np.abs(asm.f_face[0]))) if asm.f_face else 0.0
    delta = params.resolve_delta(f_scale, hf.max)

    history: list[float] = []
    if regime is not Regime.CRITICAL:
        mob = 12.0 if regime is Regime.SUBCRITICAL else 3.0
        m_face = [asm.interior(asm.h_face[a] ** 3, a) / (mob * nu) for a in range(asm.dim)]
        q0 = [m_face[a] * asm.interior(asm.f_face[a][..., a], a) for a in range(asm.dim)]
        A, rhs = asm.system(m_face, q0)
        p = asm.solve_pinned(A, rhs)
        iters = 0
    else:
        p = np.zeros(tuple(dom.n))
        iters = 0
        while True:
            m_face, q0 = _critical_coefficients(asm, p, delta)
            A, rhs = asm.system(m_face, q0)
            p_solve = asm.solve_pinned(A, rhs)
            p_new = relax * p_solve + (1.0 - relax) * p
            upd = float(np.linalg.norm(p_new - p) / max(np.linalg.norm(p_new), 1e-300))
            history.append(upd)
            p = p_new
            iters += 1
            if upd < picard_tol:
                break
            if iters >= picard_max_iters:
                raise SolverError(
                    f"reduced-pressure Picard stalled after {iters} iterations",
                    history=history, residual=upd)
        # one unrelaxed solve with the converged coefficients puts the
        # linearized fluxes exactly in balance
        m_face, q0 = _critical_coefficients(asm, p, delta)
        A, rhs = asm.system(m_face, q0)
        p = asm.solve_pinned(A, rhs)

    p = zero_mean_project(p, np.full(p.shape, asm.area))

    flux_field, div_max = _final_fluxes(asm, p, regime, delta)
    grid = Grid3(hf, n_z3)
    velocity = _reconstruct(asm, grid, p, regime, delta)
    pressure = make_pressure(grid, FieldKind.PRESSURE_REDUCED, p, zero_mean=True)
    return LimitSolution(pressure=pressure, velocity=velocity, flux_field=flux_field,
                         picard_iters=iters, flux_div_residual=div_max,
                         update_history=history, regime=regime, delta=delta,
                         grid=grid, params=params)


def _critical_coefficients(asm: _ReducedAssembler, p: np.ndarray, delta: float):
    m_face, q0 = [], []
    for a in range(asm.dim):
        G = _face_driving(p, asm.f_face[a], asm.dom, a)
        h = asm.interior(asm.h_face[a], a)
        _, _, chi = _face_closure(G, h, asm.params, Regime.CRITICAL, delta)
        M = _frozen_mobility(h, chi, asm.params)
        mn = M[..., a, a]
        off = mn * asm.interior(asm.f_face[a][..., a], a)
        for t in range(asm.dim):
            if t != a:
                off = off + M[..., a, t] * G[..., t]
        m_face.append(mn)
        q0.append(off)
    return m_face, q0


def _final_fluxes(asm: _ReducedAssembler, p: np.ndarray, regime: Regime, delta: float):
    """Nonlinear face fluxes at the converged pressure plus the cell-wise
    divergence residual (boundary faces carry exactly zero flux)."""
    flux_field = {}
    div = np.zeros(tuple(asm.dom.n))
    for a in range(asm.dim):
        G = _face_driving(p, asm.f_face[a], asm.dom, a)
        h = asm.interior(asm.h_face[a], a)
        _, q_int, _ = _face_closure(G, h, asm.params, regime, delta)
        if asm.dom.periodic:
            q_full = q_int
        else:
            shape = list(q_int.shape)
            shape[a] += 2
            q_full = np.zeros(shape)
            sl = [slice(None)] * (len(shape) - 1)
            sl[a] = slice(1, -1)
            q_full[tuple(sl)] = q_int
        flux_field[a] = q_full
        qn = q_full[..., a]
        if asm.dom.periodic:
            div += (np.roll(qn, -1, axis=a) - qn) / asm.dom.dx[a]
        else:
            div += np.diff(qn, axis=a) / asm.dom.dx[a]
    return flux_field, float(np.max(np.abs(div)))


def _reconstruct(asm: _ReducedAssembler, grid: Grid3, p: np.ndarray,
                 regime: Regime, delta: float) -> Field:
    """Sample the per-column profiles on the staggered layout of ``grid``.

    Horizontal component m is evaluated at its own faces with the face
    driving vector; boundary faces (side walls) stay zero, matching both the
    full-order side condition and the vanishing no-flux profile.  The
    vertical component of the reduced field is identically zero.
    """
    dom = asm.dom
    nz = grid.n_z3
    data = {}
    for m in range(asm.dim):
        shape = grid.velocity_shape(m)
        u = np.zeros(shape)
        b = np.zeros(shape[:-1])
        G = _face_driving(p, asm.f_face[m], dom, m)
        h = asm.interior(asm.h_face[m], m)
        A, B, _, _, _ = solve_profile_batch(G.reshape(-1, asm.dim), h.reshape(-1),
                                            asm.params, regime, delta)
        zfrac = (np.arange(nz) + 0.5) / nz
        z = h.reshape(-1, 1) * zfrac
        prof = (-G.reshape(-1, asm.dim)[:, None, m] * z**2 / (2.0 * asm.params.nu)
                + A[:, None, m] * z + B[:, None, m])
        if dom.periodic:
            u[...] = prof.reshape(h.shape + (nz,))
            b[...] = B[:, m].reshape(h.shape)
        else:
            sl = [slice(None)] * len(shape)
            sl[m] = slice(1, -1)
            u[tuple(sl)] = prof.reshape(h.shape + (nz,))
            b[tuple(sl[:-1])] = B[:, m].reshape(h.shape)
        data[f"u{m + 1}"] = u
        data[f"b{m + 1}"] = b
    data["u3"] = np.zeros(grid.velocity_shape(asm.dim))
    return make_velocity(grid, FieldKind.VELOCITY_REDUCED, data)


def reconstruct_velocity(pressure, hf: HeightField, forcing, params: FluidParams,
                         n_z3: int, delta: float | None = None) -> Field:
    """Rebuild the reduced velocity field from a solved reduced pressure."""
    p = pressure.data if isinstance(pressure, Field) else np.asarray(pressure, dtype=float)
    regime, _ = params.regime()
    asm = _ReducedAssembler(hf, forcing, params)
    if delta is None:
        f_scale = float(np.max(np.abs(asm.f_face[0]))) if asm.f_face else 0.0
        delta = params.resolve_delta(f_scale, hf.max)
    return _reconstruct(asm, Grid3(hf, n_z3), p, regime, delta)

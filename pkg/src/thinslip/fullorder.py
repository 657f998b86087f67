"""Finite-thickness solver on the dilated box with the power-law wall.

Staggered (MAC-type) saddle-point discretization of the thickness-scaled
Stokes operator with the nonlinear slip condition on the bottom wall.  An
outer Picard loop freezes (a) the convective velocity, when enabled, and
(b) the wall Robin coefficient ``eps**(gamma-1) * |K u'|_d^{s-2}`` per wall
site; the inner problem is a linear saddle-point system (viscous block in
the scaled metric + frozen wall rows + pressure gradient / divergence
blocks) solved by sparse LU with deterministic ordering.

The viscous block is the exact gradient of the discrete dissipation, so at
a converged fixed point the discrete energy balance

    nu ||D_eps u||^2 + eps**(gamma-1) * sum |K u'|_d^{s-2} |K u'|^2 dA = (f, u')

holds to the outer tolerance (see :func:`boundary_term_energy`).

Regularization: the wall velocities of the finite-thickness problem scale
like eps**2, so the shared limit-scale regularization length ``delta`` enters
here as ``eps**2 * delta``, making the full-order and reduced solvers
approximations of one and the same regularized problem.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ParameterError, SolverError
from .fields import Field, FieldKind, make_pressure, make_velocity, zero_mean_project
from .geometry import Grid3
from .operators import StaggeredOps
from .params import FluidParams

OUTER_TOL = 1e-10
OUTER_MAX_ITERS = 200
REFINE_TOL = 1e-13
REFINE_MAX = 20


class _SaddleSolver:
    """Sparse direct solve of the velocity-pressure saddle system.

    The continuity rows are sign-flipped so the system is symmetric (up to
    the pin row), and the factorization is taken of a copy whose empty
    pressure diagonal carries a tiny penalty: with static pivoting this keeps
    the elimination fill near the fill-reducing ordering's prediction instead
    of the blowup that threshold pivoting causes on the zero block.  A few
    steps of iterative refinement against the exact matrix remove both the
    penalty perturbation and any pivot-growth error; a default factorization
    of the exact matrix is the fallback."""

    def __init__(self, M: sp.spmatrix, nvel: int, ncells: int, row_scale: float):
        self.M = M.tocsr()
        theta = 1e-8 * row_scale
        pen = sp.block_diag(
            [sp.csr_matrix((nvel, nvel)), -theta * sp.eye(ncells)], format="csc")
        try:
            self.lu = spla.splu((self.M + pen).tocsc(), permc_spec="MMD_AT_PLUS_A",
                                diag_pivot_thresh=0.0, options=dict(SymmetricMode=True))
            self.exact = False
        except RuntimeError:
            self.lu = spla.splu(self.M.tocsc())
            self.exact = True

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        nrm = float(np.max(np.abs(rhs)))
        if nrm == 0.0:
            return np.zeros_like(rhs)
        x = self.lu.solve(rhs)
        if self.exact:
            return x
        for _ in range(REFINE_MAX):
            r = rhs - self.M @ x
            rel = float(np.max(np.abs(r))) / nrm
            if rel < REFINE_TOL:
                return x
            x = x + self.lu.solve(r)
        # refinement stalled: redo with an exact (if slow) factorization
        self.lu = spla.splu(self.M.tocsc())
        self.exact = True
        return self.lu.solve(rhs)


@dataclass
class FullOrderSolution:
    velocity: Field
    pressure: Field
    eps: float
    outer_iters: int
    saddle_residual: float
    div_max: float
    boundary_coeff_field: np.ndarray
    chi: np.ndarray
    delta_limit: float
    delta_full: float
    update_history: list = field(default_factory=list)
    convection: bool = False
    params: FluidParams | None = None
    grid: Grid3 | None = None
    ops: StaggeredOps | None = None
    load: np.ndarray | None = None

    @property
    def u_vec(self) -> np.ndarray:
        return self.ops.gather(self.velocity.data)


def _wall_chi(ops: StaggeredOps, u: np.ndarray, K: np.ndarray, s: float, delta_full: float):
    bbar = ops.wall_values(u)
    Kb = bbar @ K.T
    return (np.sum(Kb**2, axis=-1) + delta_full**2) ** ((s - 2.0) / 2.0)


def solve_full(grid: Grid3, forcing, params: FluidParams, convection: bool = False,
               outer_tol: float = OUTER_TOL, outer_max_iters: int = OUTER_MAX_ITERS,
               delta: float | None = None) -> FullOrderSolution:
    """Solve the finite-thickness problem for ``params.eps``.

    ``forcing`` is the in-plane force density (vectorized, thickness
    independent).  ``delta`` is the limit-scale regularization length; by
    default it follows the parameter override or the characteristic-velocity
    rule evaluated on the forcing amplitude.
    """
    if params.eps is None:
        raise ParameterError("full-order solve requires params.eps")
    if params.dim != grid.dim:
        raise ParameterError(f"parameter dimension {params.dim} != domain dimension {grid.dim}")
    eps = params.eps
    ops = StaggeredOps(grid, eps)
    dom = grid.domain

    f_scale = float(np.max(np.abs(forcing(dom.cell_points()))))
    delta_limit = delta if delta is not None else params.resolve_delta(f_scale, grid.height.h0)
    delta_full = eps**2 * delta_limit

    K = params.K_mat
    K2 = K @ K
    coeff = eps ** (params.gamma - 1.0)
    nu = params.nu

    F = ops.forcing_load(forcing)
    Gblk = sp.diags(ops.vol) @ ops.grad
    Dblk = (ops.cellvol * ops.div).tolil()
    Dblk[0, :] = 0.0
    Dblk = Dblk.tocsr()
    pin = sp.coo_matrix(([1.0], ([0], [0])), shape=(ops.ncells, ops.ncells)).tocsr()
    rhs = np.concatenate([F, np.zeros(ops.ncells)])
    row_scale = ops.cellvol / (eps * grid.dz)

    u = np.zeros(ops.nvel)
    history = []
    iters = 0
    while True:
        chi = _wall_chi(ops, u, K, params.s, delta_full)
        A = nu * ops.BtWB + ops.wall_traction_matrix(chi, K2, coeff)
        if convection:
            A = A + ops.convection_matrix(ops.scatter(u))
        M = sp.bmat([[A, Gblk], [-Dblk, -pin]], format="csr")
        solver = _SaddleSolver(M, ops.nvel, ops.ncells, row_scale)
        x = solver.solve(rhs)
        u_new, p = x[: ops.nvel], x[ops.nvel:]
        iters += 1
        rel = float(np.linalg.norm(u_new - u) / max(np.linalg.norm(u_new), 1e-300))
        history.append(rel)
        chi_new = _wall_chi(ops, u_new, K, params.s, delta_full)
        chi_rel = float(np.linalg.norm(chi_new - chi) / max(np.linalg.norm(chi_new), 1e-300))
        u = u_new
        if rel < outer_tol or (not convection and chi_rel < 1e-14):
            break
        if iters >= outer_max_iters:
            raise SolverError(
                f"outer wall-coefficient loop stalled after {iters} iterations",
                history=history, residual=rel)

    resid = M @ x - rhs
    saddle_residual = float(np.max(np.abs(resid)) / max(1.0, np.max(np.abs(rhs))))
    div_max = float(np.max(np.abs(ops.div @ u)))
    p = zero_mean_project(p, np.full(ops.ncells, ops.cellvol))

    vel = make_velocity(grid, FieldKind.VELOCITY_FULL, ops.scatter(u))
    pres = make_pressure(grid, FieldKind.PRESSURE_FULL, p.reshape(grid.pressure_shape()),
                         zero_mean=True)
    return FullOrderSolution(
        velocity=vel, pressure=pres, eps=eps, outer_iters=iters,
        saddle_residual=saddle_residual, div_max=div_max,
        boundary_coeff_field=coeff * chi_new, chi=chi_new,
        delta_limit=delta_limit, delta_full=delta_full,
        update_history=history, convection=convection,
        params=params, grid=grid, ops=ops, load=F)


def boundary_term_energy(sol: FullOrderSolution, params: FluidParams | None = None) -> dict:
    """Evaluate every term of the discrete energy balance and the mismatch.

    Returns the scaled-metric dissipation, the wall dissipation, the work of
    the forcing, the convective contribution (zero with convection off), and
    the relative mismatch of the balance.  For converged convection-off
    solves the mismatch is limited by the outer tolerance.
    """
    params = params or sol.params
    ops = sol.ops
    u = sol.u_vec
    viscous = params.nu * float(np.sum(ops.w * (ops.B @ u) ** 2))
    bbar = ops.wall_values(u)
    Kb = bbar @ params.K_mat.T
    mag2 = np.sum(Kb**2, axis=-1)
    chi = (mag2 + sol.delta_full**2) ** ((params.s - 2.0) / 2.0)
    coeff = sol.eps ** (params.gamma - 1.0)
    boundary = coeff * float(np.sum(ops.wall_site_weights * chi * mag2))
    work = float(sol.load @ u)
    convective = 0.0
    if sol.convection:
        convective = float(u @ (ops.convection_matrix(ops.scatter(u)) @ u))
    scale = max(abs(viscous), abs(boundary), abs(work), 1e-300)
    mismatch = abs(viscous + boundary + convective - work) / scale
    return {
        "viscous": viscous,
        "boundary": boundary,
        "work": work,
        "convective": convective,
        "mismatch_rel": mismatch,
    }


def assembled_wall_operator(ops: StaggeredOps, K, s: float, delta: float,
                            nu: float = 1.0, coeff: float = 1.0):
    """The viscous + wall operator as a nonlinear map on DOF vectors.

    Used by monotonicity checks: the viscous block is symmetric positive
    semidefinite and the wall traction is the gradient of a convex wall
    potential, so (A(v) - A(w)) . (v - w) >= 0 for any pair of fields.
    """
    K = np.asarray(K, dtype=float)
    if K.ndim == 0:
        K = K.reshape(1, 1)

    def apply(u: np.ndarray) -> np.ndarray:
        return nu * (ops.BtWB @ u) + ops.wall_traction_force(u, K, s, delta, coeff)

    return apply

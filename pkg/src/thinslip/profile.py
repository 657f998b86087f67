"""Per-column vertical velocity profiles under the three wall laws.

Each column solves ``-nu * u'' = G`` on ``(0, h)`` with no-slip at the top
and a regime-dependent bottom condition.  The solution is the quadratic

    u(z) = -G z^2 / (2 nu) + A z + B,      A = G h / (2 nu) - B / h,

so everything reduces to the slip velocity ``B``:

* subcritical (sticking wall):      B = 0
* supercritical (perfectly slips):  A = 0, i.e. B = G h^2 / (2 nu)
* critical (power-law wall):        B + (h/nu) |K B|_d^{s-2} K^2 B = G h^2 / (2 nu)

with the regularized magnitude ``|x|_d = sqrt(|x|^2 + delta^2)``.  The
critical closure is solved by damped Newton with Armijo backtracking; the
closure map is strictly monotone, so non-convergence signals a bug or
pathological parameters rather than non-existence.

The column flux is ``G h^3 / (12 nu) + B h / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NewtonError, ParameterError
from .params import FluidParams, Regime

NEWTON_MAX_ITERS = 100
ARMIJO_FACTOR = 0.5
ARMIJO_DECREASE = 1e-4


def power_traction(B, K, s: float, delta: float) -> np.ndarray:
    """Regularized power-law wall traction ``|K B|_d^{s-2} K^2 B``.

    ``B`` may carry leading batch dimensions; ``K`` is a (d, d) tensor.
    At ``s=2`` (any delta) this reduces to the linear map ``K^2 B``.
    """
    B = np.asarray(B, dtype=float)
    K = np.asarray(K, dtype=float)
    Kb = B @ K.T
    mag2 = np.sum(Kb**2, axis=-1) + delta**2
    chi = mag2 ** ((s - 2.0) / 2.0)
    return chi[..., None] * (Kb @ K.T)


def traction_jacobian(B, K, s: float, delta: float) -> np.ndarray:
    """Derivative of :func:`power_traction` with respect to ``B`` (batched)."""
    B = np.asarray(B, dtype=float)
    K = np.asarray(K, dtype=float)
    Kb = B @ K.T
    mag2 = np.sum(Kb**2, axis=-1) + delta**2
    chi = mag2 ** ((s - 2.0) / 2.0)
    K2 = K @ K
    outer = np.einsum("...a,...b->...ab", Kb @ K.T, Kb @ K)
    return chi[..., None, None] * K2 + (s - 2.0) * (mag2 ** ((s - 4.0) / 2.0))[..., None, None] * outer


def slip_traction(B, params: FluidParams) -> np.ndarray:
    """Wall traction for given parameters (delta_reg override, else exact law)."""
    delta = params.delta_reg if params.delta_reg is not None else 0.0
    return power_traction(B, params.K_mat, params.s, delta)


@dataclass
class ProfileSolution:
    """Quadratic profile coefficients and flux for one column."""

    A: np.ndarray
    B: np.ndarray
    G: np.ndarray
    h: float
    nu: float
    flux: np.ndarray
    newton_iters: int = 0
    residual: float = 0.0

    def velocity(self, z3) -> np.ndarray:
        """Profile samples, shape ``z3.shape + (d,)``."""
        z = np.asarray(z3, dtype=float)[..., None]
        return -self.G * z**2 / (2.0 * self.nu) + self.A * z + self.B


def _closure_residual(B, G, h, nu, K, s, delta):
    return B + (h[..., None] / nu) * power_traction(B, K, s, delta) - G * (h**2)[..., None] / (2.0 * nu)


def _solve_2x2(J, r):
    """Solve J x = r for stacked (..., d, d) with d in (1, 2)."""
    d = J.shape[-1]
    if d == 1:
        return r / J[..., 0, 0][..., None]
    det = J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]
    x0 = (J[..., 1, 1] * r[..., 0] - J[..., 0, 1] * r[..., 1]) / det
    x1 = (-J[..., 1, 0] * r[..., 0] + J[..., 0, 0] * r[..., 1]) / det
    return np.stack([x0, x1], axis=-1)


def solve_profile_batch(G: np.ndarray, h: np.ndarray, params: FluidParams,
                        regime: Regime, delta: float,
                        max_iters: int = NEWTON_MAX_ITERS):
    """Vectorized profile solve over a batch of columns.

    Parameters
    ----------
    G : (n, d) array of driving force densities f' - grad p.
    h : (n,) array of local gaps.
    regime : which bottom wall law to close with.
    delta : regularization length shared across the batch.

    Returns
    -------
    (A, B, flux, iters, residual) with batched arrays.
    """
    G = np.atleast_2d(np.asarray(G, dtype=float))
    h = np.asarray(h, dtype=float).ravel()
    if np.any(h <= 0.0):
        raise ParameterError("gap must be positive")
    nu = params.nu
    K = params.K_mat
    if G.shape[-1] != K.shape[0]:
        raise ParameterError(f"driving vector dimension {G.shape[-1]} != tensor dimension {K.shape[0]}")

    b_super = G * (h**2)[..., None] / (2.0 * nu)
    if regime is Regime.SUBCRITICAL:
        B = np.zeros_like(G)
        iters, res = 0, 0.0
    elif regime is Regime.SUPERCRITICAL:
        B = b_super.copy()
        iters, res = 0, 0.0
    else:
        B = b_super.copy()
        gnorm = np.sqrt(np.sum(G**2, axis=-1))
        tol = 1e-12 * np.maximum(1.0, gnorm * h**2 / (2.0 * nu))
        F = _closure_residual(B, G, h, nu, K, params.s, delta)
        fnorm = np.sqrt(np.sum(F**2, axis=-1))
        iters = 0
        while np.any(fnorm > tol):
            if iters >= max_iters:
                raise NewtonError(
                    f"wall-law Newton stalled after {max_iters} iterations",
                    residual=float(fnorm.max()))
            active = fnorm > tol
            J = np.eye(K.shape[0]) + (h[..., None, None] / nu) * traction_jacobian(B, K, params.s, delta)
            step = -_solve_2x2(J, F)
            t = np.where(active, 1.0, 0.0)
            for _ in range(60):
                trial = B + t[..., None] * step
                Ft = _closure_residual(trial, G, h, nu, K, params.s, delta)
                ftnorm = np.sqrt(np.sum(Ft**2, axis=-1))
                bad = active & (ftnorm > (1.0 - ARMIJO_DECREASE * t) * fnorm)
                if not np.any(bad):
                    break
                t = np.where(bad, ARMIJO_FACTOR * t, t)
            B = B + t[..., None] * step
            F = _closure_residual(B, G, h, nu, K, params.s, delta)
            fnorm = np.sqrt(np.sum(F**2, axis=-1))
            iters += 1
        res = float(fnorm.max())

    A = G * h[..., None] / (2.0 * nu) - B / h[..., None]
    flux = G * (h**3)[..., None] / (12.0 * nu) + B * h[..., None] / 2.0
    return A, B, flux, iters, res


def solve_profile(G, h: float, params: FluidParams, regime: Regime | None = None,
                  delta: float | None = None) -> ProfileSolution:
    """Solve one column profile for driving vector ``G`` and gap ``h``.

    ``regime`` defaults to the classification of ``(params.s, params.gamma)``;
    ``delta`` defaults to the parameter override or the scaled default rule.
    """
    if regime is None:
        regime, _ = params.regime()
    G = np.atleast_1d(np.asarray(G, dtype=float))
    gscale = float(np.sqrt(np.sum(G**2)))
    if delta is None:
        delta = params.resolve_delta(gscale, h)
    A, B, flux, iters, res = solve_profile_batch(G[None, :], np.array([h]), params, regime, delta)
    return ProfileSolution(A=A[0], B=B[0], G=G, h=float(h), nu=params.nu,
                           flux=flux[0], newton_iters=iters, residual=res)

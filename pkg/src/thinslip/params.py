"""Physical parameters, the slip-scaling regime classification, and validation.

The wall law couples the tangential shear to a power ``s - 1`` of the
tangential velocity through an anisotropy tensor ``K`` whose magnitude is
scaled by ``eps**(gamma/s)``.  The exponent ``gamma`` is compared against the
critical value ``3 - 2*s``: above it the wall becomes perfectly slipping in
the thin-film limit, below it the wall sticks, and exactly at it a finite
power-law slip condition survives.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError

# Newton on the wall-law closure is only guaranteed to converge for flow
# indices bounded away from 1, where the traction stays single-valued.
S_MIN = 1.05


class Regime(enum.Enum):
    SUBCRITICAL = "subcritical"
    CRITICAL = "critical"
    SUPERCRITICAL = "supercritical"


def critical_exponent(s: float) -> float:
    """Critical slip-scaling exponent ``3 - 2*s`` (exact in binary float)."""
    return 3.0 - 2.0 * s


def classify_regime(s: float, gamma: float) -> tuple[Regime, float]:
    """Classify the slip-scaling exponent against the critical value.

    Parameters
    ----------
    s : float
        Flow-behavior index, must satisfy ``1 < s <= 2``.
    gamma : float
        Slip-scaling exponent.

    Returns
    -------
    (Regime, float)
        The regime tag and the critical exponent ``3 - 2*s``.  The
        comparison is exact (no tolerance): ties classify as critical.
    """
    if not (1.0 < s <= 2.0):
        raise ParameterError(f"flow index s={s} outside (1, 2]")
    gamma_star = critical_exponent(s)
    if gamma == gamma_star:
        return Regime.CRITICAL, gamma_star
    if gamma > gamma_star:
        return Regime.SUPERCRITICAL, gamma_star
    return Regime.SUBCRITICAL, gamma_star


def as_tensor(K, dim: int) -> np.ndarray:
    """Normalize an anisotropy tensor to a ``(dim, dim)`` array.

    Scalars are accepted for ``dim == 1``; square nested lists or arrays for
    ``dim == 2``.  Symmetry and positive definiteness are enforced.
    """
    arr = np.asarray(K, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1 and arr.size == 1:
        arr = arr.reshape(1, 1)
    if arr.shape != (dim, dim):
        raise ParameterError(f"anisotropy tensor has shape {arr.shape}, expected ({dim}, {dim})")
    if not np.array_equal(arr, arr.T):
        raise ParameterError("anisotropy tensor must be symmetric")
    if dim == 1:
        if arr[0, 0] <= 0.0:
            raise ParameterError("anisotropy tensor must be positive")
    else:
        # 2x2 positive definiteness: positive trace and determinant.
        if np.trace(arr) <= 0.0 or np.linalg.det(arr) <= 0.0:
            raise ParameterError("anisotropy tensor must be positive definite")
    return arr


def default_delta(g_scale: float, h: float, nu: float) -> float:
    """Default regularization length for the power-law traction.

    Scaled to 1e-6 times the characteristic slip velocity ``|G| h^2 / (2 nu)``
    of a column driven by force density ``G``; falls back to 1e-6 when the
    driving vanishes.
    """
    char_vel = abs(g_scale) * h * h / (2.0 * nu)
    if char_vel == 0.0:
        char_vel = 1.0
    return 1e-6 * char_vel


@dataclass(frozen=True)
class FluidParams:
    """Viscosity, wall-law exponents, anisotropy tensor, and film thickness.

    Attributes
    ----------
    nu : float
        Viscosity, > 0.
    s : float
        Flow-behavior index in ``[1.05, 2]``; ``s == 2`` is the linear
        (Navier) compatibility mode.
    gamma : float
        Slip-scaling exponent.
    K : array
        Anisotropy tensor: positive scalar in reduced dimension 1, symmetric
        positive definite 2x2 in reduced dimension 2.
    eps : float or None
        Film thickness parameter; consumed only by full-order solves.
    delta_reg : float or None
        Regularization length for the power-law traction.  ``None`` selects
        the solver default (see :func:`default_delta`); 0 is only admissible
        for ``s == 2`` where the traction is linear.
    """

    nu: float
    s: float
    gamma: float
    K: object = 1.0
    eps: float | None = None
    delta_reg: float | None = None
    dim: int = 1
    K_mat: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.nu <= 0.0:
            raise ParameterError(f"viscosity nu={self.nu} must be positive")
        if not (S_MIN <= self.s <= 2.0):
            raise ParameterError(f"flow index s={self.s} outside [{S_MIN}, 2]")
        if self.dim not in (1, 2):
            raise ParameterError(f"reduced dimension {self.dim} not in (1, 2)")
        if self.eps is not None and self.eps <= 0.0:
            raise ParameterError(f"thickness eps={self.eps} must be positive")
        if self.delta_reg is not None:
            if self.delta_reg < 0.0:
                raise ParameterError("delta_reg must be >= 0")
            if self.delta_reg == 0.0 and self.s != 2.0:
                raise ParameterError("delta_reg=0 requires s=2 (linear wall law)")
        object.__setattr__(self, "K_mat", as_tensor(self.K, self.dim))

    def regime(self) -> tuple[Regime, float]:
        return classify_regime(self.s, self.gamma)

    def resolve_delta(self, g_scale: float, h: float) -> float:
        """Regularization length: the explicit override, else the default rule."""
        if self.delta_reg is not None:
            return self.delta_reg
        return default_delta(g_scale, h, self.nu)

    def with_eps(self, eps: float) -> "FluidParams":
        return FluidParams(nu=self.nu, s=self.s, gamma=self.gamma, K=self.K,
                           eps=eps, delta_reg=self.delta_reg, dim=self.dim)

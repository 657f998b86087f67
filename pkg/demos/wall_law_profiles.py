"""Per-column velocity profiles under the three effective wall laws.

A film column of gap h driven by a constant in-plane force density G obeys
-nu u'' = G with no-slip at the top.  Depending on how the slip tensor scales
with the film thickness, the bottom wall either sticks (B = 0), slips
perfectly (zero wall shear), or follows the nonlinear power law.  This script
prints the closed-form coefficients and fluxes, plus the linear (Navier)
special case s = 2, K = sqrt(lam) I.
"""

import numpy as np

from thinslip import FluidParams, Regime, solve_profile

G, h, nu = 1.0, 1.0, 1.0
params = FluidParams(nu=nu, s=1.5, gamma=0.0)

print(f"column: G = {G}, h = {h}, nu = {nu}, s = {params.s}")
print(f"{'wall law':<16} {'slip B':>10} {'shear A':>10} {'flux':>12} {'newton':>7}")
for regime in (Regime.SUBCRITICAL, Regime.CRITICAL, Regime.SUPERCRITICAL):
    sol = solve_profile(G, h, params, regime=regime)
    print(f"{regime.value:<16} {sol.B[0]:>10.6f} {sol.A[0]:>10.6f} "
          f"{sol.flux[0]:>12.8f} {sol.newton_iters:>7d}")

print()
print("sticking flux   = G h^3 / (12 nu) =", G * h**3 / (12 * nu))
print("free-slip flux  = G h^3 / (3 nu)  =", G * h**3 / (3 * nu))

print()
print("linear wall (s = 2, K = sqrt(lam) I): slip B = (G h^2 / 2 nu) / (1 + lam h / nu)")
for lam in (0.1, 1.0, 10.0):
    p2 = FluidParams(nu=nu, s=2.0, gamma=-1.0, K=np.sqrt(lam), delta_reg=0.0)
    sol = solve_profile(G, h, p2, regime=Regime.CRITICAL)
    b_exact = (G * h**2 / (2 * nu)) / (1 + lam * h / nu)
    print(f"  lam = {lam:<5g} B = {sol.B[0]:.10f}  (closed form {b_exact:.10f})")

print()
print("profile samples for the power-law wall (z3 from wall to top):")
sol = solve_profile(G, h, params, regime=Regime.CRITICAL)
z = np.linspace(0.0, h, 6)
for zi, ui in zip(z, sol.velocity(z)[:, 0]):
    print(f"  z3 = {zi:4.2f}   u = {ui: .6f}")

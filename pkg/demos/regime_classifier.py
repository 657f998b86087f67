"""Identify the effective wall law from finite-thickness solves alone.

Sweeping eps at three slip-scaling exponents around the critical value
3 - 2s shows the trichotomy directly in the wall data: below the critical
exponent the rescaled slip trace dies out (the wall sticks), above it the
rescaled wall shear dies out (the wall slips freely), and exactly at it the
shear tracks the power-law traction of the slip.
"""

from thinslip import FluidParams, critical_exponent, regime_identify, run_eps_sweep
from thinslip.geometry import Domain, Grid3, HeightField
from thinslip.presets import make_forcing

dom = Domain(lo=(0.0,), hi=(1.0,), n=(48,), periodic=True)
height = HeightField.from_preset(dom, "constant", [1.0])
grid = Grid3(height, 24)
forcing = make_forcing("rotational", [1.0, 1.0], dom.lo, dom.hi)

s = 1.5
eps_list = [0.2, 0.1, 0.05]
print(f"s = {s}: critical exponent = {critical_exponent(s)}")
for gamma in (-1.0, 0.0, 1.0):
    params = FluidParams(nu=1.0, s=s, gamma=gamma)
    sols, limit, _ = run_eps_sweep(grid, forcing, params, eps_list)
    verdict, diag = regime_identify(sols, limit, params)
    print(f"\ngamma = {gamma:+.0f}  ->  verdict: {verdict}")
    print(f"  slip ratio      {[f'{v:.3g}' for v in diag['slip_ratio']]}")
    print(f"  shear ratio     {[f'{v:.3g}' for v in diag['shear_ratio']]}")
    print(f"  power-law resid {[f'{v:.3g}' for v in diag['critical_residual']]}")

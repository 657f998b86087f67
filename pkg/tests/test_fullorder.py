import numpy as np
import pytest

from conftest import I2, interval_grid, ring_forcing, square_grid, vortex_forcing
from thinslip.analysis import compare_limit, velocity_distance
from thinslip.errors import ParameterError, UsageError
from thinslip.fields import norms
from thinslip.fullorder import (assembled_wall_operator, boundary_term_energy,
                                solve_full)
from thinslip.geometry import Domain, Grid3, HeightField
from thinslip.operators import StaggeredOps
from thinslip.params import FluidParams
from thinslip.presets import make_forcing
from thinslip.profile import solve_profile
from thinslip.params import Regime
from thinslip.reynolds import solve_limit


def test_zero_forcing_zero_fields():
    grid = interval_grid(16, 8)
    f = make_forcing("zero", [], (0.0,), (1.0,))
    p = FluidParams(nu=1.0, s=1.5, gamma=0.0, eps=0.1)
    sol = solve_full(grid, f, p)
    assert np.all(sol.u_vec == 0.0)
    assert np.all(sol.pressure.data == 0.0)
    assert sol.outer_iters == 1


def test_requires_eps_and_matching_dim():
    grid = interval_grid(8, 4)
    f = make_forcing("zero", [], (0.0,), (1.0,))
    with pytest.raises(ParameterError):
        solve_full(grid, f, FluidParams(nu=1.0, s=1.5, gamma=0.0))
    with pytest.raises(ParameterError):
        solve_full(grid, f, FluidParams(nu=1.0, s=1.5, gamma=0.0, K=I2, dim=2, eps=0.1))


def test_requires_constant_gap():
    dom = Domain(lo=(0.0,), hi=(1.0,), n=(8,), periodic=True)
    hf = HeightField(dom, 1.0 + 0.2 * np.cos(2 * np.pi * dom.centers(0)))
    with pytest.raises(UsageError):
        StaggeredOps(Grid3(hf, 4), 0.1)


def test_linear_wall_single_outer_iteration():
    # s=2: the wall coefficient is velocity independent, one solve suffices
    grid = interval_grid(24, 12)
    f = ring_forcing()
    p = FluidParams(nu=1.0, s=2.0, gamma=-1.0, K=1.0, eps=0.1)
    sol = solve_full(grid, f, p)
    assert sol.outer_iters == 1
    assert sol.div_max <= 1e-10
    e = boundary_term_energy(sol)
    assert e["mismatch_rel"] <= 1e-10


def test_columnar_ring_matches_wall_closure():
    # periodic interval + constant gap: the solve reduces to one column whose
    # slip satisfies the thickness-scaled wall law exactly
    grid = interval_grid(24, 16)
    f = ring_forcing(1.0, 1.0)
    p = FluidParams(nu=1.0, s=1.5, gamma=0.0, eps=0.1)
    sol = solve_full(grid, f, p)
    b_hat = sol.velocity.data["b1"] / sol.eps**2
    ref = solve_profile(1.0, 1.0, p, regime=Regime.CRITICAL, delta=sol.delta_limit)
    np.testing.assert_allclose(b_hat, ref.B[0], rtol=1e-8)
    assert np.abs(sol.velocity.data["u3"]).max() <= 1e-12
    # pressure absorbs the harmonic part of the ring forcing
    pts = grid.pressure_sites()[..., 0]
    expected = np.sin(2 * np.pi * pts) / (2 * np.pi)
    expected -= expected.mean()
    dx = grid.domain.dx[0]
    np.testing.assert_allclose(sol.pressure.data, expected, atol=dx**2)


def test_energy_identity_nonlinear_wall():
    grid = interval_grid(24, 12)
    sol = solve_full(grid, ring_forcing(), FluidParams(nu=1.0, s=1.5, gamma=0.0, eps=0.1))
    e = boundary_term_energy(sol)
    assert e["mismatch_rel"] <= 1e-8
    assert e["viscous"] > 0 and e["boundary"] > 0 and e["work"] > 0


def test_divergence_free_per_cell():
    grid = interval_grid(24, 12)
    sol = solve_full(grid, ring_forcing(), FluidParams(nu=1.0, s=1.5, gamma=0.5, eps=0.2))
    assert sol.div_max <= 1e-10


def test_rotational_symmetry_square():
    grid = square_grid(10, 10, 6)
    f = vortex_forcing()
    p = FluidParams(nu=1.0, s=2.0, gamma=-1.0, K=I2, dim=2, eps=0.1)
    sol = solve_full(grid, f, p)
    u1, u2, u3 = (sol.velocity.data[k] for k in ("u1", "u2", "u3"))
    pr = sol.pressure.data
    scale = np.abs(u1).max()
    assert np.abs(u1 + u1[::-1, ::-1, :]).max() <= 1e-10 * scale
    assert np.abs(u2 + u2[::-1, ::-1, :]).max() <= 1e-10 * scale
    assert np.abs(u3 - u3[::-1, ::-1, :]).max() <= 1e-10 * scale
    assert np.abs(pr - pr[::-1, ::-1, :]).max() <= 1e-10 * np.abs(pr).max()


def test_wall_operator_monotone(rng):
    grid = interval_grid(16, 6)
    ops = StaggeredOps(grid, 0.1)
    for s, delta in ((1.1, 1e-6), (1.5, 0.0), (1.9, 1e-6)):
        wall_op = assembled_wall_operator(ops, 1.0, s, delta)
        for _ in range(50):
            v = rng.normal(size=ops.nvel)
            w = rng.normal(size=ops.nvel)
            if delta == 0.0:
                # keep wall traces away from the power-law singularity
                v[-ops.n_wall_sites:] = np.sign(v[-ops.n_wall_sites:]) + v[-ops.n_wall_sites:]
                w[-ops.n_wall_sites:] = np.sign(w[-ops.n_wall_sites:]) + w[-ops.n_wall_sites:]
            gap = float((wall_op(v) - wall_op(w)) @ (v - w))
            assert gap >= -1e-12


def test_convective_term_smallness():
    # switching convection on perturbs the solution by O(eps^3): halving eps
    # shrinks the relative difference by at least 6x (8x ideal)
    grid = square_grid(12, 12, 8)
    f = vortex_forcing()
    rel = {}
    for eps in (0.1, 0.05):
        p = FluidParams(nu=1.0, s=1.5, gamma=0.0, K=I2, dim=2, eps=eps)
        s_off = solve_full(grid, f, p, convection=False)
        s_on = solve_full(grid, f, p, convection=True)
        d = velocity_distance(s_on.velocity, s_off.velocity)["l2"]
        rel[eps] = d / norms(s_off.velocity, 2.0, "Omega")
    assert rel[0.1] / rel[0.05] >= 6.0


def test_compare_limit_identical_and_shifted():
    grid = interval_grid(16, 8)
    f = ring_forcing()
    p = FluidParams(nu=1.0, s=1.5, gamma=0.0, eps=0.1)
    sol = solve_full(grid, f, p)
    limit = solve_limit(grid.height, f, p, n_z3=grid.n_z3)
    same = velocity_distance(limit.velocity, limit.velocity)
    assert same["l2"] == 0.0 and same["vz3"] == 0.0
    cmp = compare_limit(sol, limit)
    assert cmp["l2"] >= 0.0 and cmp["vz3"] >= cmp["l2"]

import numpy as np
import pytest

from conftest import interval_grid, ring_forcing
from thinslip.analysis import (check_apriori_metrics, fit_slope, regime_identify,
                               run_eps_sweep, velocity_distance, verify_apriori)
from thinslip.errors import DataError, UsageError
from thinslip.fields import FieldKind, make_pressure, make_velocity
from thinslip.fullorder import FullOrderSolution
from thinslip.operators import StaggeredOps
from thinslip.params import FluidParams, Regime
from thinslip.profile import solve_profile


def test_fit_slope_examples():
    slope, res = fit_slope([(0.1, 0.01), (0.05, 0.0025)])
    assert slope == pytest.approx(2.0, abs=1e-12)
    assert res <= 1e-12
    slope, _ = fit_slope([(0.1, 0.7), (0.05, 0.7)])
    assert slope == pytest.approx(0.0, abs=1e-12)
    slope, res = fit_slope([(0.2, 0.2), (0.1, 0.1), (0.05, 0.05)])
    assert slope == pytest.approx(1.0, abs=1e-12)
    assert res <= 1e-12


def test_fit_slope_exact_powers():
    eps = [0.3, 0.17, 0.09, 0.04]
    for p in np.linspace(-3.0, 3.0, 13):
        slope, res = fit_slope([(e, 2.0 * e**p) for e in eps])
        assert slope == pytest.approx(p, abs=1e-9)
        assert res <= 1e-9


def test_fit_slope_errors():
    with pytest.raises(UsageError):
        fit_slope([(0.1, 1.0)])
    with pytest.raises(DataError):
        fit_slope([(0.1, 1.0), (0.05, 0.0)])


def test_synthetic_apriori_passes():
    params = FluidParams(nu=1.0, s=1.5, gamma=0.0)
    eps = [0.2, 0.1, 0.05]
    expo = (3.0 - params.gamma) / params.s
    metrics = {
        "l2_velocity": [e**2 for e in eps],
        "deps_seminorm": [e for e in eps],
        "boundary_ls": [e**expo for e in eps],
        "l2_pressure": [1.0 for _ in eps],
    }
    report = check_apriori_metrics(eps, metrics, params)
    assert report.passed
    assert report.slopes["l2_velocity"][0] == pytest.approx(2.0, abs=1e-10)


def test_synthetic_apriori_flags_bad_velocity():
    params = FluidParams(nu=1.0, s=1.5, gamma=0.0)
    eps = [0.2, 0.1, 0.05]
    metrics = {
        "l2_velocity": [e for e in eps],  # violates the eps^2 law
        "deps_seminorm": [e for e in eps],
        "boundary_ls": [e**2 for e in eps],
        "l2_pressure": [1.0 for _ in eps],
    }
    report = check_apriori_metrics(eps, metrics, params)
    assert not report.passed
    assert not report.checks["velocity_slope"]
    assert report.checks["gradient_slope"]


def test_verify_apriori_needs_three_points():
    with pytest.raises(UsageError):
        verify_apriori([], FluidParams(nu=1.0, s=1.5, gamma=0.0))


# -- classifier on synthetic columnar fields -----------------------------------

def synthetic_solution(grid, params, regime, eps, G=1.0, delta=1e-6):
    """Columnar field built from the closed-form profile, scaled by eps^2."""
    prof = solve_profile(G, grid.height.h0, params, regime=regime, delta=delta)
    z = grid.z_mids()
    column = prof.velocity(z)[:, 0]
    data = {
        "u1": np.broadcast_to(eps**2 * column, grid.velocity_shape(0)).copy(),
        "b1": np.full(grid.wall_shape(0), eps**2 * prof.B[0]),
        "u3": np.zeros(grid.velocity_shape(1)),
    }
    vel = make_velocity(grid, FieldKind.VELOCITY_FULL, data)
    pres = make_pressure(grid, FieldKind.PRESSURE_FULL,
                         np.zeros(grid.pressure_shape()), zero_mean=True)
    ops = StaggeredOps(grid, eps)
    return FullOrderSolution(
        velocity=vel, pressure=pres, eps=eps, outer_iters=0, saddle_residual=0.0,
        div_max=0.0, boundary_coeff_field=np.zeros(ops.n_wall_sites),
        chi=np.zeros(ops.n_wall_sites), delta_limit=delta, delta_full=eps**2 * delta,
        params=params, grid=grid, ops=ops)


@pytest.mark.parametrize("regime,expected", [
    (Regime.SUBCRITICAL, "subcritical"),
    (Regime.CRITICAL, "critical"),
    (Regime.SUPERCRITICAL, "supercritical"),
])
def test_classifier_on_synthetic_fields(regime, expected):
    grid = interval_grid(16, 32, periodic=True)
    params = FluidParams(nu=1.0, s=1.5, gamma=0.0)
    sol = synthetic_solution(grid, params, regime, eps=0.05)
    verdict, diag = regime_identify([sol], None, params)
    assert verdict == expected, diag


def test_classifier_zero_flow():
    grid = interval_grid(8, 8, periodic=True)
    params = FluidParams(nu=1.0, s=1.5, gamma=0.0)
    sol = synthetic_solution(grid, params, Regime.SUBCRITICAL, eps=0.1, G=0.0)
    verdict, _ = regime_identify([sol], None, params)
    assert verdict == "zero-flow, indeterminate"


# -- the comparison distance is a metric ----------------------------------------

def random_velocity(grid, rng):
    data = {
        "u1": rng.normal(size=grid.velocity_shape(0)),
        "b1": rng.normal(size=grid.wall_shape(0)),
        "u3": rng.normal(size=grid.velocity_shape(1)),
    }
    return make_velocity(grid, FieldKind.VELOCITY_FULL, data)


def test_velocity_distance_is_metric(rng):
    grid = interval_grid(10, 6, periodic=True)
    for _ in range(10):
        a, b, c = (random_velocity(grid, rng) for _ in range(3))
        dab = velocity_distance(a, b)["vz3"]
        dba = velocity_distance(b, a)["vz3"]
        assert dab == pytest.approx(dba, rel=1e-12)
        daa = velocity_distance(a, a)
        assert daa["l2"] == 0.0 and daa["vz3"] == 0.0
        dac = velocity_distance(a, c)["vz3"]
        dcb = velocity_distance(c, b)["vz3"]
        assert dab <= dac + dcb + 1e-12 * max(dab, 1.0)


def test_velocity_distance_constant_shift():
    # a uniform 1e-3 offset of the horizontal velocity has L2 distance 1e-3
    grid = interval_grid(12, 10, periodic=True)
    base = random_velocity(grid, np.random.default_rng(3))
    shifted_data = {k: v.copy() for k, v in base.data.items()}
    shifted_data["u1"] = shifted_data["u1"] + 1e-3
    shifted = make_velocity(grid, FieldKind.VELOCITY_FULL, shifted_data)
    d = velocity_distance(shifted, base)
    assert d["l2"] == pytest.approx(1e-3, rel=1e-10)


def test_velocity_distance_grid_mismatch():
    a = random_velocity(interval_grid(10, 6), np.random.default_rng(0))
    b = random_velocity(interval_grid(12, 6), np.random.default_rng(0))
    with pytest.raises(UsageError):
        velocity_distance(a, b)


# -- sweep orchestration ---------------------------------------------------------

def test_run_eps_sweep_records():
    grid = interval_grid(24, 12, periodic=True)
    params = FluidParams(nu=1.0, s=1.5, gamma=0.0)
    sols, limit, records = run_eps_sweep(grid, ring_forcing(), params, [0.2, 0.1])
    assert [r["eps"] for r in records] == [0.2, 0.1]
    for rec in records:
        assert rec["energy_mismatch_rel"] <= 1e-8
        assert rec["limit_rel_l2"] < 0.05
    # workers > 1 must reproduce the serial records bit for bit
    sols2, _, records2 = run_eps_sweep(grid, ring_forcing(), params, [0.2, 0.1], workers=2)
    for r1, r2 in zip(records, records2):
        for k in r1:
            assert r1[k] == r2[k]

import numpy as np
import pytest

from conftest import I2, vortex_forcing
from thinslip.fields import norms
from thinslip.geometry import Domain, HeightField
from thinslip.params import FluidParams, Regime
from thinslip.presets import make_forcing
from thinslip.profile import solve_profile
from thinslip.reynolds import reconstruct_velocity, solve_limit


def square_height(n, ny=None, h=1.0):
    ny = ny if ny is not None else n
    dom = Domain(lo=(0.0, 0.0), hi=(1.0, 1.0), n=(n, ny), periodic=False)
    return HeightField.from_preset(dom, "constant", [h])


def params2(gamma, s=1.5, nu=1.0, K=None):
    return FluidParams(nu=nu, s=s, gamma=gamma, K=K if K is not None else I2, dim=2)


def test_zero_forcing_zero_solution():
    hf = square_height(8)
    f = make_forcing("zero", [], (0.0, 0.0), (1.0, 1.0))
    lim = solve_limit(hf, f, params2(0.0), n_z3=6)
    assert np.all(lim.p_values == 0.0)
    assert norms(lim.velocity, 2.0, "Omega") == 0.0
    assert all(np.all(q == 0.0) for q in lim.flux_field.values())


def test_gradient_forcing_absorbed_by_pressure():
    # f = grad(sin(pi z1) sin(pi z2)): pressure recovers the potential and the
    # velocity decays at second order.  Unequal cell counts keep the discrete
    # curl of the sampled forcing away from zero.
    errs_p, errs_u = [], []
    for n in (10, 20, 40):
        dom = Domain(lo=(0.0, 0.0), hi=(1.0, 1.0), n=(n, (3 * n) // 2), periodic=False)
        hf = HeightField.from_preset(dom, "constant", [1.0])
        f = make_forcing("gradient_sine", [1.0], dom.lo, dom.hi)
        lim = solve_limit(hf, f, params2(-1.0), n_z3=4)
        pts = dom.cell_points()
        g = np.sin(np.pi * pts[..., 0]) * np.sin(np.pi * pts[..., 1])
        g = g - g.mean()
        errs_p.append(np.abs(lim.p_values - g).max())
        errs_u.append(norms(lim.velocity, 2.0, "Omega"))
    rate_p = np.log2(errs_p[0] / errs_p[2]) / 2.0
    rate_u = np.log2(errs_u[0] / errs_u[2]) / 2.0
    assert rate_p >= 1.8
    assert rate_u >= 1.8


def test_rotational_flux_self_refinement():
    # Richardson oracle from two fine grids pins the coarse-grid energy
    f = vortex_forcing()
    p = params2(-1.0)  # sticking wall: linear mobility h^3/(12 nu)
    energies = {}
    for n in (16, 32, 128, 256):
        lim = solve_limit(square_height(n), f, p, n_z3=4)
        energies[n] = norms(lim.velocity, 2.0, "Omega") ** 2
    assert energies[16] > 1e-8  # genuinely recirculating
    e_ext = energies[256] + (energies[256] - energies[128]) / 3.0
    assert abs(energies[32] - e_ext) < abs(energies[16] - e_ext)
    assert abs(energies[32] - e_ext) <= 0.05 * abs(e_ext)


def test_flux_conservation_telescopes():
    f = vortex_forcing()
    lim = solve_limit(square_height(12), f, params2(0.0), n_z3=4)
    total = 0.0
    for a, q in lim.flux_field.items():
        qn = q[..., a]
        total += float(np.sum(np.diff(qn, axis=a)))
    assert abs(total) <= 1e-12 * max(np.abs(q).max() for q in lim.flux_field.values())


def test_flux_divergence_residual_small():
    f = vortex_forcing()
    for gamma in (-1.0, 0.0, 1.0):
        lim = solve_limit(square_height(12), f, params2(gamma), n_z3=4)
        scale = max(np.abs(q).max() for q in lim.flux_field.values()) * 12.0
        assert lim.flux_div_residual <= 1e-7 * scale


def test_dissipation_ordering_across_regimes():
    f = vortex_forcing()
    hf = square_height(16)
    energies = {}
    for gamma in (-1.0, 0.0, 1.0):
        lim = solve_limit(hf, f, params2(gamma), n_z3=6)
        energies[gamma] = norms(lim.velocity, 2.0, "Omega") ** 2
    assert energies[-1.0] < energies[0.0] < energies[1.0]


def test_picard_updates_monotone_after_warmup():
    f = vortex_forcing()
    lim = solve_limit(square_height(16), f, params2(0.0), n_z3=4)
    hist = lim.update_history
    assert lim.picard_iters == len(hist)
    tail = hist[5:]
    assert all(b <= a * 1.000001 for a, b in zip(tail, tail[1:]))


def test_no_flux_boundary_faces():
    f = vortex_forcing()
    lim = solve_limit(square_height(10), f, params2(0.0), n_z3=4)
    for a, q in lim.flux_field.items():
        qn = q[..., a]
        assert np.all(np.take(qn, [0, -1], axis=a) == 0.0)


def test_reconstruct_matches_solution_field():
    f = vortex_forcing()
    hf = square_height(10)
    p = params2(0.0)
    lim = solve_limit(hf, f, p, n_z3=6)
    rebuilt = reconstruct_velocity(lim.pressure, hf, f, p, n_z3=6, delta=lim.delta)
    for name, arr in lim.velocity.data.items():
        np.testing.assert_allclose(rebuilt.data[name], arr, rtol=1e-12, atol=1e-15)


def test_limit_navier_profile_closed_form():
    # ring at s=2: the harmonic part of the drive goes into the pressure and
    # every column carries the closed-form linear-wall profile
    dom = Domain(lo=(0.0,), hi=(1.0,), n=(32,), periodic=True)
    hf = HeightField.from_preset(dom, "constant", [1.0])
    f = make_forcing("rotational", [1.0, 0.5], dom.lo, dom.hi)
    p = FluidParams(nu=1.0, s=2.0, gamma=-1.0, K=1.0, dim=1, delta_reg=0.0)
    lim = solve_limit(hf, f, p, n_z3=8)
    ref = solve_profile(1.0, 1.0, p, regime=Regime.CRITICAL)
    z = (np.arange(8) + 0.5) / 8.0
    expected = ref.velocity(z)[:, 0]
    np.testing.assert_allclose(lim.velocity.data["u1"],
                               np.broadcast_to(expected, (32, 8)),
                               rtol=1e-8, atol=1e-12)
    np.testing.assert_allclose(lim.velocity.data["b1"], np.full(32, ref.B[0]),
                               rtol=1e-8)


def test_variable_gap_journal_bearing():
    # classic bearing: periodic interval with a modulated gap drives pressure
    dom = Domain(lo=(0.0,), hi=(1.0,), n=(64,), periodic=True)
    hf = HeightField(dom, 1.0 + 0.4 * np.cos(2 * np.pi * dom.centers(0)))
    f = make_forcing("rotational", [1.0], dom.lo, dom.hi)
    p = FluidParams(nu=1.0, s=1.5, gamma=-1.0, K=1.0, dim=1)
    lim = solve_limit(hf, f, p, n_z3=8)
    assert np.abs(lim.p_values).max() > 1e-3  # gap modulation builds pressure
    q = lim.flux_field[0][..., 0]
    assert np.ptp(q) <= 1e-10 * max(1.0, np.abs(q).max())  # constant loop flux


def test_anisotropic_tensor_critical_runs():
    f = vortex_forcing()
    K = [[1.5, 0.4], [0.4, 0.8]]
    lim = solve_limit(square_height(10), f, params2(0.0, K=K), n_z3=4)
    scale = max(np.abs(q).max() for q in lim.flux_field.values()) * 10.0
    assert lim.flux_div_residual <= 1e-6 * scale
    assert norms(lim.velocity, 2.0, "Omega") > 0.0

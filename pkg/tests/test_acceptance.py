"""Acceptance suite: every gate criterion at its stated tolerance.

Runs one line per criterion (PASS/FAIL) under ``pytest -s``.  The heavy
fixtures are the thickness sweeps: the interval ring at 128 x 64 (three
slip-scaling exponents), the rectangle sweep at 24 x 24 x 12 used by the
limit-convergence decrease check, and the determinism rerun of the ring
configuration through the CLI.
"""

import json
import time

import numpy as np
import pytest

from conftest import I2
from thinslip.analysis import regime_identify, run_eps_sweep, verify_apriori
from thinslip.cli import main as cli_main
from thinslip.fullorder import assembled_wall_operator, boundary_term_energy, solve_full
from thinslip.geometry import Domain, Grid3, HeightField
from thinslip.operators import StaggeredOps
from thinslip.params import FluidParams, Regime
from thinslip.presets import make_forcing
from thinslip.reynolds import solve_limit

EPS_LIST = [0.2, 0.1, 0.05]


def report(num, desc, ok, detail=""):
    tag = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {num}: {tag} - {desc}" + (f" [{detail}]" if detail else ""))
    assert ok, f"criterion {num} failed: {desc} {detail}"


def ring_grid(n=128, nz=64):
    dom = Domain(lo=(0.0,), hi=(1.0,), n=(n,), periodic=True)
    return Grid3(HeightField.from_preset(dom, "constant", [1.0]), nz)


def ring_forcing():
    return make_forcing("rotational", [1.0, 1.0], (0.0,), (1.0,))


RING_CONFIG = {
    "geometry": {"dim": 1, "extent": [[0.0, 1.0]], "n_cells": [128], "n_z3": 64,
                 "periodic": True, "height": {"preset": "constant", "coeffs": [1.0]}},
    "physics": {"nu": 1.0, "s": 1.5, "gamma": 0.0, "K": 1.0},
    "forcing": {"preset": "rotational", "coeffs": [1.0, 1.0]},
    "eps_list": EPS_LIST,
    "convection": False,
    "workers": 1,
}


@pytest.fixture(scope="module")
def ring_sweeps():
    """Interval-ring sweeps at gamma in {-1, 0, 1}, s = 1.5, 128 x 64."""
    grid = ring_grid()
    f = ring_forcing()
    out = {}
    for gamma in (-1.0, 0.0, 1.0):
        params = FluidParams(nu=1.0, s=1.5, gamma=gamma, K=1.0, dim=1)
        out[gamma] = run_eps_sweep(grid, f, params, EPS_LIST)
    return out


@pytest.fixture(scope="module")
def square_sweep():
    """Rectangle sweep at 24 x 24 x 12, rotational forcing, critical exponent."""
    dom = Domain(lo=(0.0, 0.0), hi=(1.0, 1.0), n=(24, 24), periodic=False)
    grid = Grid3(HeightField.from_preset(dom, "constant", [1.0]), 12)
    f = make_forcing("rotational", [1.0], dom.lo, dom.hi)
    params = FluidParams(nu=1.0, s=1.5, gamma=0.0, K=I2, dim=2)
    return run_eps_sweep(grid, f, params, EPS_LIST)


@pytest.fixture(scope="module")
def navier_run():
    """Linear wall law: s=2, K=sqrt(lam) I with lam=1, gamma at its critical -1."""
    grid = ring_grid()
    f = ring_forcing()
    params = FluidParams(nu=1.0, s=2.0, gamma=-1.0, K=1.0, dim=1, eps=0.05)
    sol = solve_full(grid, f, params)
    limit = solve_limit(grid.height, f, params, n_z3=grid.n_z3)
    return sol, limit, params


def test_criterion_1_profile_oracles():
    rng = np.random.default_rng(11)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        G = rng.uniform(0.1, 3.0) * rng.choice([-1.0, 1.0])
        h = rng.uniform(0.2, 2.0)
        nu = rng.uniform(0.1, 5.0)
        lam = rng.uniform(0.1, 10.0)
        base = FluidParams(nu=nu, s=1.5, gamma=0.0)
        from thinslip.profile import solve_profile
        sub = solve_profile(G, h, base, regime=Regime.SUBCRITICAL).flux[0]
        sup = solve_profile(G, h, base, regime=Regime.SUPERCRITICAL).flux[0]
        nav_params = FluidParams(nu=nu, s=2.0, gamma=-1.0, K=np.sqrt(lam), delta_reg=0.0)
        nav = solve_profile(G, h, nav_params, regime=Regime.CRITICAL).flux[0]
        b_nav = (G * h**2 / (2 * nu)) / (1.0 + lam * h / nu)
        exact = {
            "sub": G * h**3 / (12 * nu),
            "sup": G * h**3 / (3 * nu),
            "nav": G * h**3 / (12 * nu) + b_nav * h / 2.0,
        }
        for got, key in ((sub, "sub"), (sup, "sup"), (nav, "nav")):
            worst = max(worst, abs(got - exact[key]) / abs(exact[key]))
    elapsed = time.perf_counter() - t0
    report(1, "closed-form profile fluxes, 50 random draws at 1e-12 relative",
           worst <= 1e-12 and elapsed < 1.0,
           f"worst rel err {worst:.2e}, {elapsed:.2f}s")


def test_criterion_2_monotonicity_suite():
    grid = ring_grid(24, 8)
    ops = StaggeredOps(grid, 0.1)
    rng = np.random.default_rng(22)
    nb = ops.n_wall_sites
    t0 = time.perf_counter()
    worst = 0.0
    for s in (1.1, 1.5, 1.9):
        for delta in (0.0, 1e-6):
            wall_op = assembled_wall_operator(ops, 1.0, s, delta)
            for _ in range(1000):
                v = rng.normal(size=ops.nvel)
                w = rng.normal(size=ops.nvel)
                if delta == 0.0:
                    # traces bounded away from the power-law singularity
                    v[-nb:] = np.sign(v[-nb:]) * (1.0 + np.abs(v[-nb:]))
                    w[-nb:] = np.sign(w[-nb:]) * (1.0 + np.abs(w[-nb:]))
                gap = float((wall_op(v) - wall_op(w)) @ (v - w))
                worst = min(worst, gap)
    elapsed = time.perf_counter() - t0
    report(2, "wall operator monotone on 1000 pairs x {s} x {delta}",
           worst >= -1e-12 and elapsed < 5.0,
           f"min pairing {worst:.2e}, {elapsed:.2f}s")


def test_criterion_3_duality():
    t0 = time.perf_counter()
    worst = 0.0
    cases = [
        (Domain(lo=(0.0, 0.0), hi=(1.0, 1.0), n=(16, 16), periodic=False), 16, 0.25),
        (Domain(lo=(0.0, 0.0), hi=(1.0, 1.0), n=(8, 8), periodic=False), 8, 0.1),
        (Domain(lo=(0.0, 0.0), hi=(2.0, 1.0), n=(5, 7), periodic=False), 6, 0.5),
        (Domain(lo=(0.0,), hi=(1.0,), n=(16,), periodic=True), 16, 0.05),
    ]
    for dom, nz, eps in cases:
        grid = Grid3(HeightField.from_preset(dom, "constant", [1.0]), nz)
        ops = StaggeredOps(grid, eps)
        gap = abs(ops.div + ops.grad.T)
        worst = max(worst, gap.max() if gap.nnz else 0.0)
    elapsed = time.perf_counter() - t0
    report(3, "divergence is the negative transpose of the gradient up to 16^3",
           worst <= 1e-12 and elapsed < 10.0,
           f"max entry gap {worst:.2e}, {elapsed:.2f}s")


def test_criterion_4_apriori_scalings(ring_sweeps):
    sols, _, _ = ring_sweeps[0.0]
    params = FluidParams(nu=1.0, s=1.5, gamma=0.0, K=1.0, dim=1)
    rep = verify_apriori(sols, params)
    detail = (f"slopes u {rep.slopes['l2_velocity'][0]:.3f}, "
              f"D {rep.slopes['deps_seminorm'][0]:.3f}, "
              f"p ratio {max(rep.metrics['l2_pressure']) / min(rep.metrics['l2_pressure']):.2f}, "
              f"r {['%.4g' % r for r in rep.metrics['boundary_ratio']]}")
    report(4, "a priori scalings on the 128x64 sweep (slopes >= 1.85 / 0.85, "
              "pressure ratio <= 3, wall ratio non-increasing x1.5)",
           rep.passed, detail)


def test_criterion_5_limit_convergence(ring_sweeps, square_sweep):
    _, _, square_records = square_sweep
    errs = [r["limit_err_l2"] for r in square_records]
    decreasing = all(b < a for a, b in zip(errs, errs[1:]))
    _, _, ring_records = ring_sweeps[0.0]
    rel_d1 = ring_records[-1]["limit_rel_l2"]
    report(5, "rescaled velocity converges to the reduced solution "
              "(strict decrease on the rectangle sweep; <= 0.15 rel on the interval)",
           decreasing and rel_d1 <= 0.15,
           f"rect errors {['%.3g' % e for e in errs]}, interval rel {rel_d1:.2e}")


def test_criterion_6_regime_trichotomy(ring_sweeps):
    expected = {-1.0: "subcritical", 0.0: "critical", 1.0: "supercritical"}
    verdicts = {}
    crit_res = None
    for gamma, (sols, limit, _) in ring_sweeps.items():
        params = FluidParams(nu=1.0, s=1.5, gamma=gamma, K=1.0, dim=1)
        verdict, diag = regime_identify(sols, limit, params)
        verdicts[gamma] = verdict
        if gamma == 0.0:
            crit_res = diag["critical_residual"][-1]
    ok = all(verdicts[g] == expected[g] for g in expected) and crit_res <= 0.1
    report(6, "classifier returns sub/critical/super for gamma in {-1, 0, 1} "
              "with traction-slip residual <= 0.1 at eps = 0.05",
           ok, f"verdicts {verdicts}, critical residual {crit_res:.2e}")


def test_criterion_7_linear_wall_consistency(navier_run):
    sol, limit, params = navier_run
    from thinslip.analysis import compare_limit
    cmp = compare_limit(sol, limit)
    ok = cmp["rel_l2"] <= 0.1 and sol.outer_iters == 1
    report(7, "s=2 linear wall: full order matches the reduced solve at eps=0.05 "
              "in one outer iteration",
           ok, f"rel err {cmp['rel_l2']:.2e}, outer iters {sol.outer_iters}")


def test_criterion_8_energy_identity(ring_sweeps, square_sweep, navier_run):
    worst = 0.0
    count = 0
    for gamma in ring_sweeps:
        for sol in ring_sweeps[gamma][0]:
            worst = max(worst, boundary_term_energy(sol)["mismatch_rel"])
            count += 1
    for sol in square_sweep[0]:
        worst = max(worst, boundary_term_energy(sol)["mismatch_rel"])
        count += 1
    worst = max(worst, boundary_term_energy(navier_run[0])["mismatch_rel"])
    count += 1
    report(8, "discrete energy balance <= 1e-8 on every converged convection-off solve",
           worst <= 1e-8, f"worst mismatch {worst:.2e} over {count} solves")


def test_criterion_9_determinism(tmp_path):
    cfg_path = tmp_path / "ring.json"
    cfg_path.write_text(json.dumps(RING_CONFIG))
    payloads = []
    for tag in ("first", "second"):
        out = tmp_path / tag
        rc = cli_main(["sweep", "--config", str(cfg_path), "--out", str(out)])
        assert rc == 0
        payloads.append((out / "sweep_metrics.csv").read_bytes())
    report(9, "repeated runs of the sweep configuration produce byte-identical CSVs",
           payloads[0] == payloads[1],
           f"{len(payloads[0])} bytes")

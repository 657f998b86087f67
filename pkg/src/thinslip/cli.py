"""Command-line entry point: single solves, thickness sweeps, verification.

Subcommands: limit-solve, full-solve, profile, sweep, verify-estimates,
compare, classify.  All numeric artifacts are written deterministically
(17 significant digits, fixed row order); identical configurations produce
byte-identical CSVs.  Errors exit nonzero with a JSON description on stdout.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .analysis import (compare_limit, regime_identify, run_eps_sweep,
                       solution_metrics, verify_apriori)
from .config import build_run, load_config
from .errors import ConfigError, ParameterError, SolverError, UsageError
from .fullorder import solve_full
from .params import FluidParams
from .outputs import (write_flux_csv, write_json, write_manifest, write_metrics_csv,
                      write_pressure_csv, write_velocity_csv)
from .profile import solve_profile
from .reynolds import solve_limit

OUTPUT_ENV = "THINSLIP_OUT"


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="thinslip",
                                description="thin-film flow with power-law wall slip")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("limit-solve", "full-solve", "profile", "sweep",
                 "verify-estimates", "compare", "classify"):
        q = sub.add_parser(name)
        q.add_argument("--config", required=True, help="path to the JSON run configuration")
        q.add_argument("--out", default=None, help="output directory (default: $THINSLIP_OUT or ./thinslip_runs)")
        q.add_argument("--workers", type=int, default=None)
        q.add_argument("--eps", type=float, default=None)
        q.add_argument("--gamma", type=float, default=None)
        q.add_argument("--s", type=float, default=None)
        q.add_argument("--nu", type=float, default=None)
        if name == "profile":
            q.add_argument("--G", type=float, nargs="+", default=None)
            q.add_argument("--h", type=float, default=None)
    return p


def _outdir(args) -> str:
    out = args.out or os.environ.get(OUTPUT_ENV) or "thinslip_runs"
    os.makedirs(out, exist_ok=True)
    return out


def _limit_report(limit) -> dict:
    regime, gamma_star = limit.params.regime()
    return {
        "regime": regime.value,
        "gamma_star": gamma_star,
        "picard_iters": limit.picard_iters,
        "flux_div_residual": limit.flux_div_residual,
        "delta": limit.delta,
        "update_history": limit.update_history,
    }


def _full_report(sol, params) -> dict:
    rec = solution_metrics(sol, params)
    rec.update({
        "eps": sol.eps,
        "outer_iters": sol.outer_iters,
        "saddle_residual": sol.saddle_residual,
        "convection": sol.convection,
        "delta_limit": sol.delta_limit,
    })
    return rec


def cmd_profile(run, args, outdir, artifacts):
    G = args.G if args.G is not None else run.profile_G
    G = np.atleast_1d(np.asarray(G, dtype=float))
    h = args.h if args.h is not None else run.profile_h
    if h <= 0:
        raise ConfigError("profile.h", "must be positive")
    regime, gamma_star = run.params.regime()
    sol = solve_profile(G, h, run.params)
    out = {
        "regime": regime.value,
        "gamma_star": gamma_star,
        "A": sol.A.tolist() if sol.A.size > 1 else float(sol.A[0]),
        "B": sol.B.tolist() if sol.B.size > 1 else float(sol.B[0]),
        "flux": sol.flux.tolist() if sol.flux.size > 1 else float(sol.flux[0]),
        "newton_iters": sol.newton_iters,
        "residual": sol.residual,
    }
    print(json.dumps(out, indent=2, sort_keys=True))
    write_json(os.path.join(outdir, "profile_report.json"), out)
    artifacts.append("profile_report.json")


def cmd_limit(run, args, outdir, artifacts):
    limit = solve_limit(run.height, run.forcing, run.params, n_z3=run.grid.n_z3,
                        picard_tol=run.solver["picard_tol"],
                        picard_max_iters=int(run.solver["picard_max_iters"]))
    write_pressure_csv(os.path.join(outdir, "limit_pressure.csv"), limit.pressure)
    write_velocity_csv(os.path.join(outdir, "limit_velocity.csv"), limit.velocity)
    write_flux_csv(os.path.join(outdir, "limit_flux.csv"), limit.flux_field, run.domain)
    write_json(os.path.join(outdir, "limit_report.json"), _limit_report(limit))
    artifacts += ["limit_pressure.csv", "limit_velocity.csv", "limit_flux.csv",
                  "limit_report.json"]


def cmd_full(run, args, outdir, artifacts):
    if run.eps is None:
        raise ConfigError("eps", "full-solve requires eps")
    sol = solve_full(run.grid, run.forcing, run.params.with_eps(run.eps),
                     convection=run.convection,
                     outer_tol=run.solver["outer_tol"],
                     outer_max_iters=int(run.solver["outer_max_iters"]))
    write_velocity_csv(os.path.join(outdir, "full_velocity.csv"), sol.velocity)
    write_pressure_csv(os.path.join(outdir, "full_pressure.csv"), sol.pressure)
    write_json(os.path.join(outdir, "full_report.json"), _full_report(sol, run.params))
    artifacts += ["full_velocity.csv", "full_pressure.csv", "full_report.json"]


def _sweep_eps_list(run):
    if not run.eps_list:
        raise ConfigError("eps_list", "sweep requires a non-empty eps_list")
    return run.eps_list


def cmd_sweep(run, args, outdir, artifacts):
    eps_list = _sweep_eps_list(run)
    sols, limit, records = run_eps_sweep(run.grid, run.forcing, run.params, eps_list,
                                         convection=run.convection, workers=run.workers,
                                         solver=run.solver)
    write_metrics_csv(os.path.join(outdir, "sweep_metrics.csv"), records)
    write_json(os.path.join(outdir, "sweep_report.json"), {
        "eps_list": eps_list,
        "records": records,
        "limit": _limit_report(limit),
    })
    artifacts += ["sweep_metrics.csv", "sweep_report.json"]


def cmd_verify(run, args, outdir, artifacts):
    eps_list = _sweep_eps_list(run)
    sols, limit, records = run_eps_sweep(run.grid, run.forcing, run.params, eps_list,
                                         convection=run.convection, workers=run.workers,
                                         solver=run.solver)
    report = verify_apriori(sols, run.params)
    report.limit_errors = [rec["limit_err_l2"] for rec in records]
    write_metrics_csv(os.path.join(outdir, "sweep_metrics.csv"), records)
    write_json(os.path.join(outdir, "verify_report.json"), report.to_dict())
    artifacts += ["sweep_metrics.csv", "verify_report.json"]
    print(json.dumps({"passed": report.passed, "checks": report.checks}, sort_keys=True))


def cmd_compare(run, args, outdir, artifacts):
    if run.eps is None:
        raise ConfigError("eps", "compare requires eps")
    sol = solve_full(run.grid, run.forcing, run.params.with_eps(run.eps),
                     convection=run.convection,
                     outer_tol=run.solver["outer_tol"],
                     outer_max_iters=int(run.solver["outer_max_iters"]))
    limit = solve_limit(run.height, run.forcing, run.params, n_z3=run.grid.n_z3,
                        picard_tol=run.solver["picard_tol"],
                        picard_max_iters=int(run.solver["picard_max_iters"]))
    cmp = compare_limit(sol, limit)
    cmp["eps"] = run.eps
    write_json(os.path.join(outdir, "compare_report.json"), cmp)
    artifacts.append("compare_report.json")
    print(json.dumps(cmp, indent=2, sort_keys=True))


def cmd_classify(run, args, outdir, artifacts):
    eps_list = _sweep_eps_list(run)
    gammas = run.gamma_list if run.gamma_list else [run.params.gamma]
    verdicts = {}
    diagnostics = {}
    for g in gammas:
        params = run.params
        if g != params.gamma:
            params = FluidParams(nu=params.nu, s=params.s, gamma=g, K=params.K,
                                 delta_reg=params.delta_reg, dim=params.dim)
        sols, limit, _ = run_eps_sweep(run.grid, run.forcing, params, eps_list,
                                       convection=run.convection, workers=run.workers,
                                       solver=run.solver)
        verdict, diag = regime_identify(sols, limit, params)
        verdicts[f"{g:g}"] = verdict
        diagnostics[f"{g:g}"] = diag
    out = {"verdicts": verdicts, "diagnostics": diagnostics,
           "gamma_star": run.params.regime()[1]}
    write_json(os.path.join(outdir, "classify_report.json"), out)
    artifacts.append("classify_report.json")
    print(json.dumps(verdicts, indent=2, sort_keys=True))


COMMANDS = {
    "profile": cmd_profile,
    "limit-solve": cmd_limit,
    "full-solve": cmd_full,
    "sweep": cmd_sweep,
    "verify-estimates": cmd_verify,
    "compare": cmd_compare,
    "classify": cmd_classify,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    overrides = {
        "eps": args.eps,
        "physics.gamma": args.gamma,
        "physics.s": args.s,
        "physics.nu": args.nu,
        "workers": args.workers,
    }
    try:
        cfg = load_config(args.config)
        run = build_run(cfg, overrides)
        outdir = args.out or run.output_dir or os.environ.get(OUTPUT_ENV) or "thinslip_runs"
        os.makedirs(outdir, exist_ok=True)
        artifacts: list = []
        t0 = time.perf_counter()
        COMMANDS[args.command](run, args, outdir, artifacts)
        timings = {"total_seconds": time.perf_counter() - t0}
        write_manifest(outdir, args.command, __version__, run.raw, overrides,
                       timings, artifacts)
        return 0
    except ConfigError as exc:
        print(json.dumps({"error": "config", "field": exc.field, "message": str(exc)},
                         sort_keys=True))
        return 2
    except (ParameterError, UsageError) as exc:
        print(json.dumps({"error": "usage", "message": str(exc)}, sort_keys=True))
        return 2
    except SolverError as exc:
        print(json.dumps({"error": "solver", "message": str(exc),
                          "history": exc.history, "residual": exc.residual},
                         sort_keys=True))
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command line front-end.

    caplap list
    caplap scenario long_time_slope --out runs/slope
    caplap solve --config run.ini --p 3 --eps 1e-3
    caplap table manufactured_plap --N 64 128 256 --p 3

Exit status: 0 all checks pass, 1 a property failed, 2 bad configuration
(nothing written), 3 solver failure.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, RunConfig, dump_config, load_config
from .scenarios import (EPS_SWEEP, EXACT_SOLUTIONS, EXIT_CONFIG, EXIT_OK, EXIT_PROPERTY,
                        EXIT_SOLVER, Outcome, quiet_evolve, ut_report, convergence_table,
                        get_scenario, initial_data, list_scenarios, persist, run_scenario)
from .barrier import BarrierInfeasibleError, default_params, verify_barrier
from .convolution import (ConvolutionParams, WindowTooSmallError, inf_convolution,
                          sup_convolution)
from .elliptic_eigen import ConvergenceError, eigen_pair
from .field_ops import GridFunction
from .geometry import Interval, build_grid
from .parabolic import SolverError, slope_lambda
from .persist import write_json
from .verification import (PropertyReport, constancy_test, energy_test,
                           eps_independence_sweep)

log = logging.getLogger("caplap")


def _common(p):
    p.add_argument("--config", type=Path, help="INI file overlaid on the defaults")
    p.add_argument("--out", type=Path, help="output directory (CAPLAP_OUT overrides)")
    p.add_argument("--grid", type=int, help="number of grid intervals N")
    p.add_argument("--eps", type=float)
    p.add_argument("--p", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--t-end", type=float, dest="t_end")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="caplap", description=__doc__.split("\n\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    for name, text in (("solve", "evolve the parabolic problem"),
                       ("eigen", "additive eigenvalue by the penalty sweep"),
                       ("barrier", "check the boundary-layer barrier"),
                       ("verify", "property checks on the configured problem")):
        _common(sub.add_parser(name, help=text))
    c = sub.add_parser("convolve", help="sup/inf-convolutions of sampled data")
    _common(c)
    c.add_argument("--eps-c", type=float, default=0.1, dest="eps_c")
    c.add_argument("--qc", type=float, default=2.0)
    c.add_argument("--input", type=Path, help="CSV with columns x,u on a uniform grid")
    s = sub.add_parser("scenario", help="run a named preset")
    s.add_argument("name")
    _common(s)
    sub.add_parser("list", help="list scenario presets")
    t = sub.add_parser("table", help="convergence table against an exact solution")
    t.add_argument("case", choices=sorted(EXACT_SOLUTIONS))
    t.add_argument("--N", type=int, nargs="+", default=[64, 128, 256])
    t.add_argument("--p", type=float)
    t.add_argument("--eps", type=float)
    t.add_argument("--out", type=Path)
    return ap


def resolve_config(args, base: RunConfig | None = None) -> RunConfig:
    cfg = base.copy() if base is not None else RunConfig()
    if getattr(args, "config", None):
        if not args.config.exists():
            raise ConfigError(f"config file {args.config} not found")
        cfg = load_config(args.config, cfg)
    if args.grid is not None:
        cfg.grid.N = args.grid
    if args.eps is not None:
        cfg.problem.eps = args.eps
    if args.p is not None:
        cfg.problem.p = args.p
    if args.q is not None:
        cfg.bc.q = args.q
    if args.dt is not None:
        cfg.solver.dt = args.dt
    if args.t_end is not None:
        cfg.solver.t_end = args.t_end
    out = os.environ.get("CAPLAP_OUT") or (str(args.out) if args.out else None)
    if out:
        cfg.run.out = out
    # fail early on anything the builders reject
    cfg.make_grid()
    cfg.problem_spec()
    cfg.solver_config()
    return cfg


def _cmd_solve(cfg):
    grid, spec, scfg = cfg.make_grid(), cfg.problem_spec(), cfg.solver_config()
    u0 = initial_data(cfg, grid, spec)
    final, mon = quiet_evolve(u0, spec, scfg)
    summary = {"t_final": float(mon.times[-1]), "final_sup_grad": float(mon.sup_grad[-1]),
               "final_mean_u": float(mon.mean_u[-1])}
    if mon.times.size >= 20:
        summary["lambda_hat"] = slope_lambda(mon)
    return Outcome([ut_report(mon, grid, spec, u0)], summary, monitors=mon,
                   tables={"final_state.csv": (("x", "u"), zip(grid.nodes, final.values))})


def _cmd_eigen(cfg):
    grid, spec = cfg.make_grid(), cfg.problem_spec()
    eig = eigen_pair(grid, spec)
    return Outcome([], {"lambda_eps": eig.lambda_eps, "residual": eig.residual,
                        "bc_residual_max": eig.bc_residual_max}, eigen=eig,
                   tables={"omega.csv": (("x", "omega"), zip(grid.nodes, eig.omega_eps.values))})


def _cmd_barrier(cfg):
    grid = cfg.make_grid()
    spec = cfg.problem_spec()
    prm = default_params(grid.domain, spec.p, spec.q, spec.bc.phi_sup, EPS_SWEEP)
    r = verify_barrier(grid, prm, EPS_SWEEP, phi_sup=spec.bc.phi_sup)
    rec = {"b": prm.b, "eps0": prm.eps0, "gamma": prm.gamma, "q": prm.q, "c2_jump": r.c2_jump,
           "flat_max_abs": r.flat_max_abs, "sup_ratio": r.sup_ratio,
           "sup_F": [{"eps": e, "sup_F": v} for e, v in r.sup_F.items()],
           "boundary_slope_min": r.boundary_slope_min,
           "boundary_relative_margin": r.boundary_relative_margin, "passed": r.passed}
    rep = PropertyReport("barrier", r.passed, 0.0 if r.passed else -1.0, 0.0)
    return Outcome([rep], {}, barrier=[rec])


def _read_samples(path: Path) -> GridFunction:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    x, u = data[:, 0], data[:, 1]
    h = np.diff(x)
    if x.size < 5 or not np.allclose(h, h[0], rtol=1e-9):
        raise ConfigError("--input needs >= 5 samples on a uniform grid")
    grid = build_grid(Interval(float(x[0]), float(x[-1])), x.size - 1)
    return GridFunction(grid, u)


def _cmd_convolve(cfg, args):
    if args.input:
        if not args.input.exists():
            raise ConfigError(f"input file {args.input} not found")
        u = _read_samples(args.input)
    else:
        grid = build_grid(Interval(-1.0, 1.0), cfg.grid.N)
        u = GridFunction(grid, np.abs(grid.nodes))
    prm = ConvolutionParams(args.eps_c, args.qc)
    us, ds = sup_convolution(u, prm)
    ul, _ = inf_convolution(u, prm)
    rows = zip(u.grid.nodes, u.values, us.values, ul.values, ds)
    return Outcome([], {"eps_c": prm.eps_c, "q_c": prm.q_c},
                   tables={"convolution.csv": (("x", "u", "u_sup", "u_inf", "offset"), rows)})


def _cmd_verify(cfg):
    grid, spec, scfg = cfg.make_grid(), cfg.problem_spec(), cfg.solver_config()
    u0 = initial_data(cfg, grid, spec)
    final, mon = quiet_evolve(u0, spec, scfg)
    reps = [ut_report(mon, grid, spec, u0),
            eps_independence_sweep(u0, spec, scfg, EPS_SWEEP)]
    if spec.source_free:
        if scfg.scheme == "discrete_gradient":
            reps.append(energy_test(mon, spec))
        else:
            reps.append(PropertyReport.untested(
                "energy_identity", "audited with scheme = discrete_gradient only"))
        if scfg.ut_stop is not None:
            reps.append(constancy_test(u0, spec, scfg, run=(final, mon)))
    return Outcome(reps, {}, monitors=mon)


_COMMANDS = {"solve": _cmd_solve, "eigen": _cmd_eigen, "barrier": _cmd_barrier,
             "verify": _cmd_verify}


def _run(command, cfg, args) -> int:
    try:
        outcome = _cmd_convolve(cfg, args) if command == "convolve" else _COMMANDS[command](cfg)
    except (ConfigError, ValueError) as e:
        log.error("config error: %s", e)
        return EXIT_CONFIG
    except (SolverError, ConvergenceError, WindowTooSmallError, BarrierInfeasibleError) as e:
        log.error("solver failure: %s", e)
        out = Path(cfg.run.out)
        out.mkdir(parents=True, exist_ok=True)
        write_json(out / "summary.json", {"command": command, "exit_status": EXIT_SOLVER,
                                          "error": str(e), "config": dump_config(cfg)})
        return EXIT_SOLVER
    status = EXIT_OK if outcome.passed else EXIT_PROPERTY
    rec = {"command": command, "exit_status": status, "config": dump_config(cfg),
           "passed": outcome.passed, **outcome.summary}
    persist(outcome, cfg.run.out, rec)
    print(f"{command}: {'pass' if outcome.passed else 'FAIL'} -> {cfg.run.out}")
    return status


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "list":
        for name, claim in list_scenarios():
            print(f"{name:20s} {claim}")
        return EXIT_OK
    if args.command == "table":
        params = {k: getattr(args, k) for k in ("p", "eps") if getattr(args, k) is not None}
        if args.case != "manufactured_plap" and params:
            log.error("--p/--eps only apply to manufactured_plap")
            return EXIT_CONFIG
        rows = convergence_table(args.case, args.N, **params)
        print(f"{'N':>6} {'error':>24} {'order':>8}")
        for r in rows:
            order = "" if r["order"] is None else f"{r['order']:.3f}"
            print(f"{r['N']:>6} {r['error']:>24.17g} {order:>8}")
        out = os.environ.get("CAPLAP_OUT") or args.out
        if out:
            Path(out).mkdir(parents=True, exist_ok=True)
            write_json(Path(out) / "table.json", {"case": args.case, "rows": rows, **params})
        return EXIT_OK
    try:
        base = get_scenario(args.name).config() if args.command == "scenario" else None
        cfg = resolve_config(args, base)
    except (ConfigError, ValueError) as e:
        log.error("config error: %s", e)
        return EXIT_CONFIG
    if args.command == "scenario":
        status, outcome = run_scenario(args.name, cfg, cfg.run.out)
        if outcome is not None:
            for r in outcome.reports:
                print(f"{r.name:28s} {r.status:9s} margin={r.margin:.3g}")
        print(f"scenario {args.name}: exit {status} -> {cfg.run.out}")
        return status
    return _run(args.command, cfg, args)


if __name__ == "__main__":
    sys.exit(main())

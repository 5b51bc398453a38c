"""Acceptance suite: one test per criterion, each printed as PASS/FAIL in the
terminal summary ("acceptance criteria" section)."""
import json
import math
import time

import numpy as np
import pytest

from caplap.barrier import default_params, min_exponent, verify_barrier
from caplap.config import apply_overrides
from caplap.convolution import (ConvolutionParams, grid_tolerance, inf_convolution,
                                offset_gradient_audit, semiconvexity_audit, sup_convolution)
from caplap.elliptic_eigen import conormal_lambda_closed_form, eigen_pair
from caplap.field_ops import GridFunction
from caplap.geometry import Interval, RadialAnnulus, RadialBall, build_grid, distance_to_boundary
from caplap.parabolic import ProblemSpec, SolverConfig, evolve, slope_lambda
from caplap.scenarios import convergence_table, get_scenario, list_scenarios, run_scenario
from caplap.verification import constancy_test, energy_test, ut_maximum_principle

EXACT_FLOOR = 1e-10  # errors below this mean the discrete scheme is exact


def _reports(name, tmp_path):
    status, outcome = run_scenario(name, out_dir=tmp_path / name)
    return status, {r.name: r for r in outcome.reports}


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_c01_manufactured_convergence(p, criterion):
    criterion("1 manufactured-solution convergence (order >= 1)")
    t0 = time.perf_counter()
    rows = convergence_table("manufactured_plap", (64, 128, 256), p=p, eps=1e-3)
    elapsed = time.perf_counter() - t0
    assert elapsed < 10
    errs = [r["error"] for r in rows]
    if max(errs) <= EXACT_FLOOR:
        return
    orders = [r["order"] for r in rows[:-1]]
    assert all(o is not None and o >= 1.0 for o in orders), orders


@pytest.mark.parametrize("n,p,dom", [(1, 3.0, Interval(-1.0, 1.0)),
                                     (2, 2.0, RadialBall(2, 1.0)),
                                     (2, 3.0, RadialBall(2, 1.0))])
def test_c02_conormal_closed_form(n, p, dom, criterion):
    criterion("2 conormal eigenvalue closed form (1%)")
    grid = build_grid(dom, 128)
    spec = ProblemSpec(p=p, q=p - 1, eps=1e-3, phi_bdry=2.0)
    target = conormal_lambda_closed_form(grid, spec)
    if (n, p) == (2, 2.0):
        assert target == pytest.approx(-4.0)
    t0 = time.perf_counter()
    lam = eigen_pair(grid, spec).lambda_eps
    assert time.perf_counter() - t0 < 30
    assert abs(lam - target) <= 0.01 * abs(target)


_SLOPE_CASES = [dict(p=2.0, q=1.0, phi=2.0), dict(p=3.0, q=2.0, phi=2.25),
                dict(p=1.5, q=0.5, phi=math.sqrt(3.0)), dict(p=3.0, q=1.0, phi=0.5, random=True)]


@pytest.mark.parametrize("case", _SLOPE_CASES, ids=["p2", "p3", "p1.5", "random_rhs"])
def test_c03_slope_matches_eigen(case, criterion):
    criterion("3 parabolic slope vs eigenvalue (2%)")
    text = (f"[problem]\np = {case['p']}\neps = 1e-2\n"
            f"phi_rhs = {'random' if case.get('random') else 0}\n"
            f"[bc]\nq = {case['q']}\nphi = {case['phi']!r}\n"
            "[solver]\ndt = 0.05\nt_end = 50\n[initial]\nkind = zero\n[run]\nseed = 0\n")
    cfg = apply_overrides(get_scenario("long_time_slope").config(), text)
    grid, spec, scfg = cfg.make_grid(), cfg.problem_spec(), cfg.solver_config()
    lam = eigen_pair(grid, spec).lambda_eps
    _, mon = evolve(GridFunction(grid, np.zeros(grid.nodes.size)), spec, scfg)
    lam_hat = slope_lambda(mon)
    assert abs(lam_hat - lam) <= 0.02 * abs(lam), (lam_hat, lam)


@pytest.mark.parametrize("name,report", [("gradient_bound", "eps_independence"),
                                         ("contact_angle", "eps_independence"),
                                         ("contact_angle", "nvc_gate")])
def test_c04_gradient_bound_uniform_in_eps(name, report, tmp_path, criterion):
    criterion("4 eps-independent gradient bound (5%)")
    _, reps = _reports(name, tmp_path)
    r = reps[report]
    assert r.status == "pass"
    if report == "eps_independence":
        assert r.detail["eps"] == [1e-1, 1e-2, 1e-3]
        assert r.detail["spread"] <= 0.05


@pytest.mark.parametrize("name", ["ut_bound", "gradient_bound", "long_time_constant"])
def test_c05_ut_maximum_principle(name, tmp_path, criterion):
    criterion("5 u_t maximum principle (factor 1.05)")
    _, reps = _reports(name, tmp_path)
    r = reps["ut_max_principle"]
    assert r.status == "pass"
    assert r.detail["max_sup_ut"] <= 1.05 * r.detail["sup_ut0"]


@pytest.mark.parametrize("p,dom", [(1.5, RadialBall(2, 1.0)), (3.0, RadialBall(2, 1.0)),
                                   (2.0, Interval(0.0, 1.0)), (3.0, RadialBall(3, 1.0))])
def test_c05_ut_principle_direct(p, dom, criterion):
    criterion("5 u_t maximum principle (factor 1.05)")
    grid = build_grid(dom, 64)
    u0 = GridFunction.from_callable(grid, lambda x: 0.3 * np.cos(np.pi * x))
    _, mon = evolve(u0, ProblemSpec(p=p, q=1.0, eps=1e-2, phi_bdry=0.3),
                    SolverConfig(dt=0.01, t_end=1.0))
    assert ut_maximum_principle(mon).passed


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_c06_energy_identity(p, criterion):
    criterion("6 energy dissipation identity (5 dt E(0))")
    grid = build_grid(RadialBall(2, 1.0), 64)
    u0 = GridFunction.from_callable(grid, lambda r: 0.3 * np.cos(np.pi * r))
    spec = ProblemSpec(p=p, q=1.0, eps=1e-2)
    _, mon = evolve(u0, spec, SolverConfig(dt=0.01, t_end=2.0, scheme="discrete_gradient"))
    rep = energy_test(mon, spec)
    assert rep.passed, rep.detail
    assert rep.detail["raw_max_residual"] <= 5 * 0.01 * mon.energy[0]
    assert np.all(np.diff(mon.energy) <= 0)


@pytest.mark.parametrize("p", [1.5, 3.0])
def test_c07_long_time_constancy(p, criterion):
    criterion("7 long-time constancy (1e-3 by sup_ut <= 1e-6)")
    grid = build_grid(RadialBall(2, 1.0), 64)
    u0 = GridFunction.from_callable(grid, lambda r: 0.3 * np.cos(np.pi * r))
    spec = ProblemSpec(p=p, q=1.0, eps=1e-3)
    cfg = SolverConfig(dt=0.05, t_end=2000.0, ut_stop=1e-6, monitor_stride=50)
    final, mon = evolve(u0, spec, cfg)
    rep = constancy_test(u0, spec, cfg, tol=1e-3, run=(final, mon))
    assert rep.detail["ut_stop_reached"]
    assert rep.detail["sup_dev_from_mean"] <= 1e-3
    assert rep.detail["final_sup_grad"] <= 1e-3


def test_c08_comparison(tmp_path, criterion):
    criterion("8 comparison principle (10 newton_tol)")
    cfg = get_scenario("comparison_suite").config()
    assert cfg.solver.t_end == 10
    status, reps = _reports("comparison_suite", tmp_path)
    assert status == 0
    for p, q in ((2, 0), (2, 1), (3, 0), (3, 1), (2, 2), (3, 2)):
        r = reps[f"comparison_p{p}_q{q}"]
        assert r.status == "pass" and r.detail["min_gap"] >= -10 * cfg.solver.newton_tol
    assert reps["comparison_gate_p1.5"].status == "pass"


_BARRIER_DOMAINS = {"ball2": RadialBall(2, 1.0), "ball3": RadialBall(3, 1.0),
                    "interval": Interval(-1.0, 1.0)}


@pytest.mark.parametrize("kind", sorted(_BARRIER_DOMAINS))
@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_c09_barrier(kind, p, criterion):
    criterion("9 barrier verification (flat 0, ratio 2, margin 10%)")
    dom = _BARRIER_DOMAINS[kind]
    grid = build_grid(dom, 2000)
    d = distance_to_boundary(dom, grid.nodes)
    for q in (0.5, 1.0, 2.0):
        for phi in (0.05, 0.5, 1.0):
            prm = default_params(dom, p, q, phi)
            assert prm.b == pytest.approx(min_exponent(p) + 1)
            r = verify_barrier(grid, prm, (1e-1, 1e-2, 1e-3), phi_sup=phi, margin=0.1)
            assert np.any(d >= prm.eps0) and r.flat_max_abs == 0.0
            assert r.sup_ratio <= 2.0, (q, phi, r.sup_ratio)
            assert r.boundary_relative_margin >= 0.1


def test_c10_convolution(tmp_path, criterion):
    criterion("10 convolution properties")
    status, reps = _reports("convolution_props", tmp_path)
    assert status == 0 and all(r.status == "pass" for r in reps.values())
    grid = build_grid(Interval(-1.0, 1.0), 400)
    u = GridFunction(grid, np.abs(grid.nodes))
    for eps in (0.05, 0.1, 0.2):
        prm = ConvolutionParams(eps, 2.0)
        us, _ = sup_convolution(u, prm)
        ul, _ = inf_convolution(u, prm)
        assert abs(us.values[200] - eps / 2) <= grid.h**2 / (2 * eps) + 1e-13
        assert np.all(us.values >= u.values) and np.all(u.values >= ul.values)
        dual, _ = inf_convolution(GridFunction(grid, -u.values), prm)
        assert np.array_equal(dual.values, -us.values)
        assert semiconvexity_audit(us, prm, grid_tolerance(us, prm)) >= 0
        assert offset_gradient_audit(u, prm).margin >= 0
        finer, _ = sup_convolution(u, ConvolutionParams(eps / 2, 2.0))
        assert np.all(finer.values <= us.values)


def test_c11_forcing_annulus(tmp_path, criterion):
    criterion("11 annulus with admissible forcing")
    cfg = get_scenario("forcing_annulus").config()
    assert isinstance(cfg.make_grid().domain, RadialAnnulus)
    assert cfg.forcing.a0 == -20
    status, reps = _reports("forcing_annulus", tmp_path)
    assert status == 0
    assert reps["forcing_admissible"].margin >= 0
    assert reps["eps_independence"].detail["spread"] <= 0.10
    assert reps["settles_to_constant"].detail["final_sup_grad"] <= 1e-3


@pytest.mark.parametrize("name", [n for n, _ in list_scenarios()])
def test_c12_determinism_and_hygiene(name, tmp_path, criterion):
    criterion("12 determinism and no NaN")
    a, b = tmp_path / "a", tmp_path / "b"
    s1, _ = run_scenario(name, out_dir=a)
    s2, _ = run_scenario(name, out_dir=b)
    assert s1 == s2
    files = sorted(f.name for f in a.iterdir())
    assert files == sorted(f.name for f in b.iterdir())
    for f in files:
        text = (a / f).read_bytes()
        if f.endswith(".csv"):
            assert text == (b / f).read_bytes()
            assert b"nan" not in text.lower()
        else:
            json.loads(text, parse_constant=_reject_constant)


def _reject_constant(name):
    raise AssertionError(f"non-finite JSON constant {name}")

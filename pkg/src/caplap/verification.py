"""Property checks built on the solvers: comparison, sandwich, eps sweeps,
long-time constancy and a Hoelder-exponent diagnostic.

Every check returns a PropertyReport with margin >= 0 meaning pass.
Checks outside the regime where the property is known to hold come back
with status "untested" instead of failing.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .boundary import IncompatibleInitialDataWarning, nvc_check
from .elliptic_eigen import eigen_pair
from .field_ops import GridFunction, node_gradient
from .parabolic import ProblemSpec, SolverConfig, energy_dissipation_audit, evolve

SMOOTH = math.inf  # holder_exponent sentinel: the gradient has no measurable oscillation


@dataclass
class PropertyReport:
    name: str
    passed: bool
    margin: float
    tolerance: float
    artifacts: list = field(default_factory=list)
    status: str = ""
    detail: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.status:
            self.status = "pass" if self.passed else "fail"

    @classmethod
    def from_margin(cls, name, margin, tolerance, **kw) -> "PropertyReport":
        margin = float(margin)
        return cls(name, margin >= 0, margin, float(tolerance), **kw)

    @classmethod
    def untested(cls, name, reason) -> "PropertyReport":
        return cls(name, True, 0.0, 0.0, status="untested", detail={"reason": reason})

    def as_record(self) -> dict:
        return {"name": self.name, "status": self.status, "pass": bool(self.passed),
                "margin": self.margin, "tolerance": self.tolerance,
                "artifacts": list(self.artifacts), **self.detail}


def _quiet_evolve(u0, spec, cfg, record_states=False):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IncompatibleInitialDataWarning)
        return evolve(u0, spec, cfg, record_states=record_states)


def comparison_gate(spec: ProblemSpec) -> str | None:
    """Reason the comparison property is out of reach, or None."""
    if spec.p < 2:
        return "comparison is only checked for p >= 2"
    if spec.q in (0, 1):
        return None
    phi = np.atleast_1d(spec.bc.phi)
    if spec.q > 0 and np.all(np.abs(phi) > 0):
        return None
    return "q not in {0, 1} needs |phi| > 0 on the whole boundary"


def comparison_test(u1_0: GridFunction, u2_0: GridFunction, spec: ProblemSpec,
                    cfg: SolverConfig) -> PropertyReport:
    """Evolve two ordered initial data; margin = min (u2 - u1) + 10*newton_tol."""
    name = "comparison"
    reason = comparison_gate(spec)
    if reason:
        return PropertyReport.untested(name, reason)
    if np.any(u1_0.values > u2_0.values):
        raise ValueError("comparison needs u1_0 <= u2_0 node-wise")
    tol = 10 * cfg.newton_tol
    _, m1 = _quiet_evolve(u1_0, spec, cfg, record_states=True)
    _, m2 = _quiet_evolve(u2_0, spec, cfg, record_states=True)
    gap = float(np.min(m2.states - m1.states))
    return PropertyReport.from_margin(name, gap + tol, tol, detail={"min_gap": gap})


def sandwich_test(u0: GridFunction, spec: ProblemSpec, cfg: SolverConfig,
                  A_slack: float = 1e-6, eigen=None) -> PropertyReport:
    """omega - lambda t - A <= u <= omega - lambda t + A, A = sup|u0 - omega| + slack.

    The pair (lambda, omega) is the one of the same eps, since the discrete
    comparison argument applies to the regularized scheme itself.
    """
    grid = u0.grid
    eig = eigen or eigen_pair(grid, spec)
    lam, om = eig.lambda_eps, eig.omega_eps.values
    A = float(np.max(np.abs(u0.values - om))) + A_slack
    _, mon = _quiet_evolve(u0, spec, cfg, record_states=True)
    centre = om[None, :] - lam * mon.times[:, None]
    dev = np.abs(mon.states - centre)
    margin = A - float(np.max(dev))
    t_end = float(mon.times[-1])
    u_over_t = float(grid.weights @ mon.states[-1]) / grid.volume / t_end if t_end > 0 else 0.0
    return PropertyReport.from_margin("sandwich", margin, A_slack,
                                      detail={"A": A, "lambda_eps": lam,
                                              "mean_u_over_t": u_over_t})


def eps_independence_sweep(u0: GridFunction, spec: ProblemSpec, cfg: SolverConfig,
                           eps_list=(1e-1, 1e-2, 1e-3), rel_tol: float = 0.05
                           ) -> PropertyReport:
    """Spread of max_t sup|Du| across eps; margin = rel_tol - (max-min)/min."""
    name = "eps_independence"
    convex = u0.grid.domain.convex
    if not convex and spec.a_model is None:
        return PropertyReport.untested(name, "non-convex domain without forcing")
    if spec.q == 0 and convex and spec.a_model is None and not nvc_check(spec.bc):
        return PropertyReport.untested(name, "q = 0 without the nearly-vertical condition")
    if spec.q < 0:
        raise ValueError("q must be >= 0")
    peaks = []
    for e in eps_list:
        _, mon = _quiet_evolve(u0, spec.replace(eps=float(e)), cfg)
        peaks.append(float(np.max(mon.sup_grad)))
    spread = (max(peaks) - min(peaks)) / min(peaks) if min(peaks) > 0 else 0.0
    return PropertyReport.from_margin(name, rel_tol - spread, rel_tol,
                                      detail={"eps": list(map(float, eps_list)),
                                              "max_sup_grad": peaks, "spread": spread})


def ut_maximum_principle(monitors, factor: float = 1.05) -> PropertyReport:
    """max_t sup|u_t| <= factor * sup|u_t|(0)."""
    s0 = float(monitors.sup_ut[0])
    worst = float(np.max(monitors.sup_ut[1:])) if len(monitors.sup_ut) > 1 else 0.0
    return PropertyReport.from_margin("ut_max_principle", factor * s0 - worst, (factor - 1) * s0,
                                      detail={"sup_ut0": s0, "max_sup_ut": worst})


def energy_test(monitors, spec: ProblemSpec) -> PropertyReport:
    """Per-step |dE/dt + p int u_t^2| <= 5 dt E(0), and E non-increasing."""
    audit = energy_dissipation_audit(monitors, spec)
    bound = 5 * monitors.dt * float(monitors.energy[0])
    margin = bound - audit.raw_max_residual
    rep = PropertyReport.from_margin("energy_identity", margin, bound,
                                     detail={"raw_max_residual": audit.raw_max_residual,
                                             "nonincreasing": audit.nonincreasing})
    if not audit.nonincreasing:
        rep.passed, rep.status = False, "fail"
    return rep


def constancy_test(u0: GridFunction, spec: ProblemSpec, cfg: SolverConfig,
                   tol: float = 1e-3, run=None) -> PropertyReport:
    """Source-free runs settle to the mean of the initial data.

    ``run`` may carry an already computed (final, monitors) pair.
    """
    if not spec.source_free:
        raise ValueError("constancy needs f = phi = a = 0")
    final, mon = run if run is not None else _quiet_evolve(u0, spec, cfg)
    w, vol = u0.grid.weights, u0.grid.volume
    c = float(w @ u0.values) / vol
    dev = float(np.max(np.abs(final.values - c)))
    grad = float(mon.sup_grad[-1])
    reached = bool(cfg.ut_stop is None or mon.stopped)
    rep = PropertyReport.from_margin("long_time_constancy", tol - max(dev, grad), tol,
                                     detail={"sup_dev_from_mean": dev, "final_sup_grad": grad,
                                             "t_final": float(mon.times[-1]),
                                             "ut_stop_reached": reached})
    if not reached:
        rep.passed, rep.status = False, "fail"
    return rep


def holder_exponent(u: GridFunction, region=None) -> float:
    """Log-log slope of  s -> max_{|x-y|=s} |Du(x) - Du(y)|  over dyadic s.

    The two nodes nearest each boundary point are dropped (one-sided
    stencils).  Returns SMOOTH when the gradient does not oscillate.
    """
    grid = u.grid
    du = node_gradient(u.values, grid)
    keep = np.ones(du.size, dtype=bool)
    for b in grid.boundary_index_set:
        lo, hi = max(0, b - 2), min(du.size, b + 3)
        keep[lo:hi] = False
    if region is not None:
        keep &= (grid.nodes >= region[0]) & (grid.nodes <= region[1])
    idx = np.flatnonzero(keep)
    if idx.size < 8:
        raise ValueError("region holds too few nodes")
    g = du[idx[0]: idx[-1] + 1]
    scale = max(1.0, float(np.max(np.abs(g))))
    ks, osc = [], []
    k = 1
    while k <= g.size // 4:
        ks.append(k)
        osc.append(float(np.max(np.abs(g[k:] - g[:-k]))))
        k *= 2
    osc = np.array(osc)
    if np.all(osc <= 1e-12 * scale):
        return SMOOTH
    ok = osc > 1e-12 * scale
    if np.count_nonzero(ok) < 2:
        return SMOOTH
    s = np.array(ks, dtype=float)[ok] * grid.h
    return float(np.polyfit(np.log(s), np.log(osc[ok]), 1)[0])


def mass_drift(monitors) -> float:
    """max_t |mean_u(t) - mean_u(0)|."""
    return float(np.max(np.abs(monitors.mean_u - monitors.mean_u[0])))

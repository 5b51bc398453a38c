"""Explicit boundary-layer barrier built from the distance to the boundary.

With d the boundary distance, B = eps0 - d and A = eps0^b - B^b + gamma,

    w = -sqrt(A)                  for d < eps0,
    w = -sqrt(eps0^b + gamma)     for d >= eps0.

Its inward slope at the boundary is -(b/2) gamma^{-1/2} eps0^{b-1}, so a
small gamma makes the boundary condition hold strictly, while the
regularized operator applied to w stays bounded uniformly in eps once
b > max(2, p/(p-1)).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .field_ops import GridFunction
from .geometry import (GeometryError, Grid, Interval, RadialBall, curvature_constants,
                       distance_to_boundary)

DEFAULT_EPS_SWEEP = (1e-1, 1e-2, 1e-3)


class BarrierInfeasibleError(RuntimeError):
    pass


def min_exponent(p: float) -> float:
    """b must exceed this."""
    return max(2.0, p / (p - 1))


@dataclass(frozen=True)
class BarrierParams:
    b: float
    eps0: float
    gamma: float
    p: float
    q: float

    def __post_init__(self):
        if self.p <= 1:
            raise ValueError(f"p must exceed 1, got {self.p}")
        if self.q < 0:
            raise ValueError(f"q must be >= 0, got {self.q}")
        if not self.b > min_exponent(self.p):
            raise ValueError(f"need b > {min_exponent(self.p):g}, got {self.b}")
        if not self.eps0 > 0:
            raise ValueError("eps0 must be positive")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")


def _check_domain(domain, eps0):
    if not isinstance(domain, (Interval, RadialBall)):
        raise GeometryError("barrier needs an interval or a ball (closed-form distance)")
    K0 = curvature_constants(domain).K0
    if eps0 > K0 / 2:
        raise ValueError(f"collar width eps0={eps0} exceeds K0/2={K0 / 2}")


def profile(d, prm: BarrierParams):
    """w and its first two derivatives in d (the inward distance)."""
    d = np.asarray(d, dtype=float)
    b, e0, g = prm.b, prm.eps0, prm.gamma
    B = np.clip(e0 - d, 0.0, None)
    A = e0**b - B**b + g
    w = -np.sqrt(A)
    w1 = -0.5 * b * A ** -0.5 * B ** (b - 1)
    w2 = 0.25 * b * b * A ** -1.5 * B ** (2 * b - 2) + 0.5 * b * (b - 1) * A ** -0.5 * B ** (b - 2)
    return w, w1, w2


def _laplacian_of_distance(grid: Grid, d):
    """Delta d in the grid coordinate: 0 on an interval, -(n-1)/r on a ball."""
    if isinstance(grid.domain, Interval):
        return np.zeros_like(d)
    r = grid.nodes
    out = np.zeros_like(r)
    out[r > 0] = -(grid.domain.n - 1) / r[r > 0]
    return out


def build_barrier(grid: Grid, prm: BarrierParams) -> GridFunction:
    _check_domain(grid.domain, prm.eps0)
    d = distance_to_boundary(grid.domain, grid.nodes)
    return GridFunction(grid, profile(d, prm)[0])


def barrier_operator(grid: Grid, prm: BarrierParams, eps: float) -> np.ndarray:
    """F_eps[w] = div(v^{p-2} Dw) evaluated from the closed-form derivatives.

    For w = w(d) with |Dd| = 1 and D^2d Dd = 0,
        F = v^{p-4} (eps^2 + (p-1) w'^2) w'' + v^{p-2} w' Delta d.
    """
    _check_domain(grid.domain, prm.eps0)
    d = distance_to_boundary(grid.domain, grid.nodes)
    _, w1, w2 = profile(d, prm)
    p = prm.p
    v2 = eps * eps + w1 * w1
    if eps == 0 and p < 4:
        # both terms carry a positive power of |w'| once b > max(2, p/(p-1))
        flat = w1 == 0
        v2 = np.where(flat, 1.0, v2)
        F = v2 ** ((p - 4) / 2) * (p - 1) * w1 * w1 * w2 + v2 ** ((p - 2) / 2) * w1 \
            * _laplacian_of_distance(grid, d)
        return np.where(flat, 0.0, F)
    F = v2 ** ((p - 4) / 2) * (eps * eps + (p - 1) * w1 * w1) * w2 \
        + v2 ** ((p - 2) / 2) * w1 * _laplacian_of_distance(grid, d)
    return F


def weighted_boundary_slope(prm: BarrierParams, eps: float) -> float:
    """(eps^2 + |Dw|^2)^{(q-1)/2} |Dw| at the boundary (minus D_nu w times the weight)."""
    m = 0.5 * prm.b * prm.gamma ** -0.5 * prm.eps0 ** (prm.b - 1)
    return float((eps * eps + m * m) ** ((prm.q - 1) / 2) * m)


def gamma_autotune(b: float, eps0: float, p: float, q: float, phi_sup: float,
                   eps_sweep=DEFAULT_EPS_SWEEP, margin: float = 0.1,
                   gammas=None) -> float:
    """Largest gamma of a geometric sweep with weighted slope >= (1+margin) phi_sup
    for every eps in the sweep.

    The raw boundary slope must also reach max(eps_sweep): a shallower
    barrier sits in the eps-dominated regime where F_eps[w] is not uniform
    in eps.
    """
    if q <= 0:
        raise ValueError("autotune relies on q > 0 (slope unbounded as gamma -> 0)")
    if gammas is None:
        gammas = 10.0 ** (-np.arange(0, 161) / 4.0)
    eps_max = max(eps_sweep)
    for g in gammas:
        prm = BarrierParams(b, eps0, float(g), p, q)
        raw = 0.5 * b * g ** -0.5 * eps0 ** (b - 1)
        if raw >= eps_max and \
                min(weighted_boundary_slope(prm, e) for e in eps_sweep) >= (1 + margin) * phi_sup:
            return float(g)
    raise BarrierInfeasibleError(f"no gamma down to {gammas[-1]:g} meets the boundary inequality")


def default_params(domain, p: float, q: float, phi_sup: float,
                   eps_sweep=DEFAULT_EPS_SWEEP) -> BarrierParams:
    b = min_exponent(p) + 1
    eps0 = min(curvature_constants(domain).K0 / 4, 0.1)
    return BarrierParams(b, eps0, gamma_autotune(b, eps0, p, q, phi_sup, eps_sweep), p, q)


@dataclass
class BarrierReport:
    c2_jump: float
    flat_max_abs: float
    sup_F: dict
    sup_ratio: float
    boundary_slope_min: float
    phi_sup: float
    boundary_relative_margin: float | None
    boundary_ok: bool
    params: BarrierParams
    sweep: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.flat_max_abs == 0.0 and self.sup_ratio <= 2.0 and self.boundary_ok


def second_difference_jump(w: np.ndarray, grid: Grid, eps0: float) -> float:
    """Largest change of the second difference between neighbours straddling d = eps0."""
    d = distance_to_boundary(grid.domain, grid.nodes)
    h = grid.h
    d2 = (w[2:] - 2 * w[1:-1] + w[:-2]) / h**2
    dm = d[1:-1]
    jumps = np.abs(np.diff(d2))
    near = np.abs(0.5 * (dm[1:] + dm[:-1]) - eps0) <= 1.5 * h
    return float(np.max(jumps[near])) if np.any(near) else 0.0


def verify_barrier(grid: Grid, prm: BarrierParams, eps_sweep=DEFAULT_EPS_SWEEP,
                   phi_sup: float = 0.0, margin: float = 0.1) -> BarrierReport:
    """Check C^2 matching, eps-uniform boundedness of F_eps[w], and the boundary
    inequality over the sweep."""
    eps_sweep = tuple(float(e) for e in eps_sweep)
    if len(eps_sweep) < 3 or max(eps_sweep) / min(eps_sweep) < 99.9:
        raise ValueError("eps_sweep needs >= 3 values spanning >= 2 decades")
    w = build_barrier(grid, prm).values
    d = distance_to_boundary(grid.domain, grid.nodes)
    flat = d >= prm.eps0
    sup_F, flat_max, sweep = {}, 0.0, []
    for e in eps_sweep:
        F = barrier_operator(grid, prm, e)
        sup_F[e] = float(np.max(F))
        flat_max = max(flat_max, float(np.max(np.abs(F[flat]))) if np.any(flat) else 0.0)
        sweep.append((e, sup_F[e], weighted_boundary_slope(prm, e)))
    vals = np.array(list(sup_F.values()))
    ratio = float(vals.max() / vals.min()) if vals.min() > 0 else float("inf")
    slope = min(s for _, _, s in sweep)
    rel = (slope - phi_sup) / phi_sup if phi_sup > 0 else None
    ok = slope >= (1 + margin) * phi_sup and slope > phi_sup
    return BarrierReport(second_difference_jump(w, grid, prm.eps0), flat_max, sup_F, ratio,
                         slope, phi_sup, rel, ok, prm, sweep)

"""Sup- and inf-convolutions of grid functions.

    u^eps(x) = max_y  u(y) - |x-y|^qc / (qc eps^{qc-1})
    u_eps(x) = min_y  u(y) + |x-y|^qc / (qc eps^{qc-1})

with qc = max(p/(p-1), 2).  The search runs over the whole closed grid,
restricted to a window of nodes around x; a maximiser sitting on the
window edge (and not on the domain edge) means the window was too small.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field_ops import GridFunction, node_gradient
from .geometry import Interval, build_grid


class WindowTooSmallError(RuntimeError):
    pass


def exponent_for(p: float) -> float:
    return max(p / (p - 1), 2.0)


@dataclass(frozen=True)
class ConvolutionParams:
    eps_c: float
    q_c: float = 2.0
    search_window: int | None = None  # node radius; None picks it from osc(u)

    def __post_init__(self):
        if not self.eps_c > 0:
            raise ValueError("eps_c must be positive")
        if self.q_c < 2:
            raise ValueError(f"q_c must be >= 2, got {self.q_c}")
        if self.search_window is not None and self.search_window < 1:
            raise ValueError("search_window must be >= 1")

    @classmethod
    def for_p(cls, p: float, eps_c: float, search_window=None) -> "ConvolutionParams":
        return cls(eps_c, exponent_for(p), search_window)

    def penalty(self, dist):
        return np.abs(dist) ** self.q_c / (self.q_c * self.eps_c ** (self.q_c - 1))


def default_window(u: GridFunction, prm: ConvolutionParams) -> int:
    """Node radius that contains every maximiser: the penalty at distance r
    must not exceed osc(u), so r <= (qc eps^{qc-1} osc u)^{1/qc}."""
    osc = float(np.ptp(u.values))
    r = (prm.q_c * prm.eps_c ** (prm.q_c - 1) * osc) ** (1 / prm.q_c)
    return int(min(u.grid.N, np.ceil(r / u.grid.h) + 1))


def _convolve(u: GridFunction, prm: ConvolutionParams, sign: int):
    grid = u.grid
    n = grid.nodes.size
    W = prm.search_window or default_window(u, prm)
    W = max(1, min(W, grid.N))
    offs = np.arange(-W, W + 1)
    idx = np.arange(n)[:, None] + offs[None, :]
    valid = (idx >= 0) & (idx < n)
    idx_c = np.clip(idx, 0, n - 1)
    vals = sign * u.values[idx_c] - prm.penalty(offs * grid.h)[None, :]
    vals = np.where(valid, vals, -np.inf)
    best = vals.max(axis=1)
    scale = max(1.0, float(np.max(np.abs(u.values))))
    ties = valid & (vals >= best[:, None] - 1e-13 * scale)
    dist = np.where(ties, np.abs(offs)[None, :], -1).max(axis=1)
    # a maximiser at +-W is only suspicious if the grid continues beyond it
    at_edge = ties[:, 0] & valid[:, 0] & (idx[:, 0] > 0) | \
        ties[:, -1] & valid[:, -1] & (idx[:, -1] < n - 1)
    if np.any(at_edge):
        raise WindowTooSmallError(f"maximiser on the search window edge (W={W} nodes)")
    arg = np.where(ties, idx_c, -1)
    touches_domain_edge = np.any((arg == 0) | (arg == n - 1), axis=1)
    return GridFunction(grid, sign * best), dist * grid.h, touches_domain_edge


def sup_convolution(u: GridFunction, prm: ConvolutionParams):
    """Returns (u^eps, max |y-x| over the argmax set per node)."""
    out, dist, _ = _convolve(u, prm, +1)
    return out, dist


def inf_convolution(u: GridFunction, prm: ConvolutionParams):
    out, dist, _ = _convolve(u, prm, -1)
    return out, dist


def grid_tolerance(u: GridFunction, prm: ConvolutionParams) -> float:
    """Slack for the discrete semiconvexity check.

    Round-off in a second difference is ~ eps_mach |u| / h^2.  For qc > 2 the
    bound vanishes with |Du|, and on a grid |Du^eps| is only resolved down to
    the quantised maximiser distance h, which costs
    (qc-1)/eps (h/eps)^{(qc-2)/(qc-1)}.
    """
    h = u.grid.h
    tol = 64 * np.finfo(float).eps * max(1.0, float(np.max(np.abs(u.values)))) / h**2
    if prm.q_c > 2:
        tol += (prm.q_c - 1) / prm.eps_c * (h / prm.eps_c) ** ((prm.q_c - 2) / (prm.q_c - 1))
    return tol


def semiconvexity_audit(u_sup: GridFunction, prm: ConvolutionParams,
                        tol: float | None = None) -> float:
    """min over interior nodes of  D2 u + ((qc-1)/eps) |Du|^{(qc-2)/(qc-1)} + tol.

    Negative values are violations of the semiconvexity bound."""
    if tol is None:
        tol = grid_tolerance(u_sup, prm)
    u, h = u_sup.values, u_sup.grid.h
    d2 = (u[2:] - 2 * u[1:-1] + u[:-2]) / h**2
    du = np.abs(node_gradient(u, u_sup.grid))[1:-1]
    bound = (prm.q_c - 1) / prm.eps_c * du ** ((prm.q_c - 2) / (prm.q_c - 1))
    return float(np.min(d2 + bound + tol))


@dataclass(frozen=True)
class OffsetAudit:
    margin: float       # min of |Du^eps| + tol - (offset/eps)^{qc-1} over checked nodes
    checked: int
    tol: float


def offset_gradient_audit(u: GridFunction, prm: ConvolutionParams, tol: float | None = None
                          ) -> OffsetAudit:
    """(max offset / eps)^{qc-1} <= |Du^eps| at nodes where u^eps is differentiable.

    Kinks (one-sided differences disagreeing by more than 4h/eps) and nodes
    whose maximiser lies on the domain edge are skipped; the inequality is
    derived for interior maximisers.
    """
    us, dist, edge = _convolve(u, prm, +1)
    v, h = us.values, u.grid.h
    dp = np.diff(v) / h
    ok = np.zeros(v.size, dtype=bool)
    ok[1:-1] = np.abs(dp[1:] - dp[:-1]) <= 4 * h / prm.eps_c
    ok &= ~edge
    ratio = (dist / prm.eps_c) ** (prm.q_c - 1)
    if tol is None:
        rmax = float(np.max(dist / prm.eps_c)) if dist.size else 0.0
        tol = 2 * (prm.q_c - 1) * h / prm.eps_c * max(1.0, rmax ** (prm.q_c - 2))
    grad = np.abs(node_gradient(v, u.grid))
    if not np.any(ok):
        return OffsetAudit(0.0, 0, tol)
    return OffsetAudit(float(np.min(grad[ok] + tol - ratio[ok])), int(ok.sum()), tol)


def effective_radius(u: GridFunction, prm: ConvolutionParams) -> float:
    """r(eps): the largest maximiser distance over the grid."""
    return float(np.max(sup_convolution(u, prm)[1]))


def reflect_even(u: GridFunction) -> GridFunction:
    """Even reflection of data on [0, L] to [-L, L] (flat-boundary experiments)."""
    dom = u.grid.domain
    if not isinstance(dom, Interval) or dom.x_left != 0:
        raise ValueError("reflect_even expects data on an interval [0, L]")
    grid = build_grid(Interval(-dom.x_right, dom.x_right), 2 * u.grid.N)
    vals = np.concatenate([u.values[:0:-1], u.values])
    return GridFunction(grid, vals)


def lipschitz_constant(u: GridFunction) -> float:
    return float(np.max(np.abs(np.diff(u.values))) / u.grid.h)

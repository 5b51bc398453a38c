"""Capillary-type boundary conditions  v^{q-1} u_nu = -phi  (nu inward).

q = 1 is Neumann, q = p-1 conormal, q = 0 the contact-angle condition
u_nu = -phi v.  On a 1D or radial grid the boundary is a set of points and
|Du| = |u_nu| there, so the condition is a scalar equation that pins the
boundary derivative completely; ``ghost_closure`` solves it.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .field_ops import GridFunction, node_gradient
from .geometry import Grid


class BCInfeasibleError(RuntimeError):
    pass


class IncompatibleInitialDataWarning(UserWarning):
    pass


@dataclass(frozen=True)
class BoundaryCondition:
    """``phi`` is a constant or one value per boundary node (index order)."""

    q: float
    phi: float | tuple = 0.0
    mode: str = "regularized"
    epsilon1: float = 0.1

    def __post_init__(self):
        if self.q < 0:
            raise ValueError(f"boundary exponent q must be >= 0, got {self.q}")
        if self.mode not in ("regularized", "limit"):
            raise ValueError(f"unknown boundary mode {self.mode!r}")
        if not np.isscalar(self.phi):
            object.__setattr__(self, "phi", tuple(float(x) for x in self.phi))
        if self.q == 0 and self.phi_sup >= 1:
            raise ValueError("contact-angle mode (q=0) needs sup|phi| < 1")

    @property
    def phi_sup(self) -> float:
        return float(np.max(np.abs(np.atleast_1d(self.phi))))

    def phi_at(self, grid: Grid) -> dict:
        idx = grid.boundary_index_set
        if np.isscalar(self.phi):
            return {b: float(self.phi) for b in idx}
        if len(self.phi) != len(idx):
            raise ValueError(f"need {len(idx)} boundary values of phi, got {len(self.phi)}")
        return dict(zip(idx, self.phi))


def inward_slope(phi: float, q: float, eps: float) -> float:
    """Inward derivative t solving t = -phi (eps^2 + t^2)^{(1-q)/2}.

    The magnitude equation m = |phi| (eps^2+m^2)^{(1-q)/2} has exactly one
    root in m >= 0 whenever eps > 0 (and |phi| < 1 for q = 0).
    """
    if phi == 0:
        return 0.0
    a = abs(phi)
    if q == 1:
        m = a
    elif eps == 0:
        if q == 0:
            if a >= 1:
                raise BCInfeasibleError("q=0 needs |phi| < 1")
            m = 0.0
        else:
            m = a ** (1.0 / q)
    elif q == 0:
        if a >= 1:
            raise BCInfeasibleError("q=0 needs |phi| < 1")
        m = a * eps / np.sqrt(1 - a * a)
    else:
        def G(m):
            return m - a * (eps * eps + m * m) ** ((1 - q) / 2)

        hi = max(a, eps, 1.0)
        for _ in range(200):
            if G(hi) > 0:
                break
            hi *= 2
        else:
            raise BCInfeasibleError(f"no boundary slope for phi={phi}, q={q}, eps={eps}")
        m = brentq(G, 0.0, hi, xtol=1e-15, rtol=1e-15, maxiter=500)
    return -np.sign(phi) * m


def ghost_closure(phi: float, q: float, eps: float, sign: int = +1) -> float:
    """Boundary derivative along the grid coordinate at a node with the given
    inward-normal sign (+1 left end, -1 right end)."""
    return sign * inward_slope(phi, q, eps)


def boundary_gradients(grid: Grid, bc: BoundaryCondition, eps: float) -> dict:
    phi = bc.phi_at(grid)
    return {b: ghost_closure(phi[b], bc.q, eps, s) for b, s in grid.inward_normal_sign.items()}


def bc_residual(u: GridFunction, bc: BoundaryCondition, p: float, eps: float) -> dict:
    """u_nu + phi v^{1-q} at each boundary node, with u_nu from one-sided
    differences.  (The residual does not involve p; it is accepted for a
    uniform call signature.)"""
    grid = u.grid
    g = node_gradient(u.values, grid)
    phi = bc.phi_at(grid)
    out = {}
    for b, s in grid.inward_normal_sign.items():
        u_nu = s * g[b]
        v = np.sqrt(eps * eps + g[b] ** 2)
        if v == 0 and bc.q > 1:
            raise BCInfeasibleError("v^{1-q} is infinite at a flat boundary with eps=0")
        out[b] = float(u_nu + phi[b] * v ** (1 - bc.q))
    return out


@dataclass(frozen=True)
class CompatibilityReport:
    passed: bool
    max_residual: float


def compatibility_check(u0: GridFunction, bc: BoundaryCondition, p: float, eps: float,
                        tol: float = 1e-6) -> CompatibilityReport:
    """Check the initial data against the boundary condition.

    Incompatible data are only warned about; the run may go ahead.
    """
    res = bc_residual(u0, bc, p, eps)
    worst = max(abs(r) for r in res.values())
    passed = worst <= tol
    if not passed:
        warnings.warn(f"initial data violate the boundary condition by {worst:.3g}",
                      IncompatibleInitialDataWarning, stacklevel=2)
    return CompatibilityReport(passed, worst)


def nvc_check(bc: BoundaryCondition, epsilon1: float | None = None) -> bool:
    """Nearly-vertical gate sup|phi| <= epsilon1.  The boundary here is a set of
    points, so the C^2 norm of phi reduces to its maximum modulus."""
    e1 = bc.epsilon1 if epsilon1 is None else epsilon1
    return bc.phi_sup <= e1

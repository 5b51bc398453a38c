"""Additive eigenvalue (ergodic constant) via delta-penalisation.

For delta > 0 the problem  div(v^{p-2}Du) = delta*u - phi_rhs  (with the
capillary boundary condition) has a unique solution u_delta.  Integrating
the eigen problem  -div(v^{p-2}Du) = lambda + phi_rhs  against 1 shows that
-delta*mean(u_delta) approaches lambda as delta -> 0, and the mean-free part
of u_delta approaches the profile omega.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import solve

from .boundary import boundary_gradients
from .field_ops import GridFunction, boundary_fluxes, node_gradient
from .geometry import Grid
from .parabolic import (Operator, ProblemSpec, SolverConfig, SolverError, _theta_step,
                        newton_solve)

log = logging.getLogger(__name__)

DEFAULT_DELTAS = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3)


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class _PenaltySource:
    """f = phi_rhs(x) - delta*u, folded into the source slot of ProblemSpec."""

    rhs: np.ndarray
    delta: float

    def value(self, x, u):
        return self.rhs - self.delta * np.asarray(u, dtype=float)

    def du(self, x, u):
        return np.full(np.shape(u), -self.delta)


def _penalized_spec(spec: ProblemSpec, grid: Grid, delta: float) -> ProblemSpec:
    rhs = spec.rhs_values(grid)
    return spec.replace(f_model=_PenaltySource(rhs, delta), phi_rhs=0.0)


def _newton_penalized(grid, spec, delta, u0, tol, max_iter):
    op = Operator(grid, _penalized_spec(spec, grid, delta))
    scale = max(1.0, float(np.max(np.abs(op.rhs))) / delta)

    def jac(z):
        lo, dg, up = op.jacobian(z)
        return -lo, -dg, -up

    row_scale = float(np.max(np.abs(op.jacobian(u0)[1])))
    u, ok, rn = newton_solve(lambda z: -op(z), jac, u0, tol * scale, max_iter, row_scale)
    return op, u, ok, rn, tol * scale


def solve_penalized(grid: Grid, spec: ProblemSpec, delta: float, guess=None,
                    tol: float = 1e-10, max_iter: int = 60) -> GridFunction:
    """Solve div(v^{p-2}Du) = delta*u - phi_rhs with the boundary condition.

    Damped Newton first.  If it stalls, Newton is retried along a decreasing
    eps ladder (the nearly degenerate Jacobian at small eps is what usually
    defeats it); pseudo-time marching of the parabolic problem with the
    -delta*u sink is the last resort.
    """
    if spec.eps <= 0:
        raise ValueError("penalised solve needs eps > 0")
    if delta <= 0:
        raise ValueError("delta must be positive")
    u0 = np.zeros(grid.nodes.size) if guess is None else np.asarray(guess, float).copy()
    op, u, ok, rn, res_tol = _newton_penalized(grid, spec, delta, u0, tol, max_iter)
    if ok:
        return GridFunction(grid, u)
    log.info("Newton stalled (residual %.3e) at delta=%g; eps continuation", rn, delta)
    if spec.eps < 0.5 and spec.p != 2:
        w = u0
        ladder = np.geomspace(0.5, spec.eps, max(2, int(np.ceil(np.log10(0.5 / spec.eps) * 2)) + 1))
        for e in ladder:
            _, w, ok, _, _ = _newton_penalized(grid, spec.replace(eps=float(e)), delta, w, tol,
                                               max_iter)
            if not ok:
                break
        if ok:
            return GridFunction(grid, w)
    log.info("eps continuation failed at delta=%g; pseudo-time fallback", delta)
    return GridFunction(grid, _pseudo_time(op, u0, delta, res_tol))


def _pseudo_time(op: Operator, u: np.ndarray, delta: float, res_tol: float) -> np.ndarray:
    dt = 1e-3
    cfg = SolverConfig(dt=dt, t_end=dt, newton_tol=1e-12)
    for _ in range(5000):
        try:
            new = _theta_step(op, u, dt, replace(cfg, dt=dt))
        except SolverError:
            dt /= 4
            continue
        change = np.max(np.abs(new - u))
        u = new
        if np.max(np.abs(op(u))) <= res_tol:
            return u
        if change < 0.5 * dt * max(1.0, np.max(np.abs(u))):
            dt = min(dt * 2, 10.0 / delta)
    raise ConvergenceError(f"pseudo-time marching did not reach steady state (delta={delta})")


@dataclass
class EigenResult:
    lambda_eps: float
    omega_eps: GridFunction
    delta_sequence: tuple
    lambda_estimates_per_delta: list
    residual: float
    bc_residual_max: float
    sup_grad_per_delta: list = field(default_factory=list)
    sup_delta_u_per_delta: list = field(default_factory=list)
    residual_per_delta: list = field(default_factory=list)

    def rows(self):
        for k, d in enumerate(self.delta_sequence):
            yield (d, self.lambda_estimates_per_delta[k], self.residual_per_delta[k],
                   self.sup_grad_per_delta[k], self.sup_delta_u_per_delta[k])


def eigen_residual(omega: np.ndarray, lam: float, grid: Grid, spec: ProblemSpec) -> float:
    """sup | div(v^{p-2} D omega) + lambda + phi_rhs |."""
    op = Operator(grid, spec.replace(f_model=None))
    return float(np.max(np.abs(op(omega) + lam)))


def _polish(omega: np.ndarray, lam: float, grid: Grid, spec: ProblemSpec,
            tol: float = 1e-11, max_iter: int = 30) -> np.ndarray:
    """Newton on the eigen equation with the mean-zero constraint.

    Bordered unknowns (omega, mu): div(...) + lambda + phi_rhs + mu = 0 and
    int omega = 0.  The weighted divergence sums to the (fixed) boundary
    flux, so the plain system is singular; mu soaks up any mismatch between
    lambda and the flux balance and is ~0 when lambda is right.
    """
    op = Operator(grid, spec.replace(f_model=None))
    w = grid.weights
    n = omega.size
    z = omega - (w @ omega) / grid.volume
    mu = 0.0
    for _ in range(max_iter):
        r = op(z) + lam + mu
        if np.max(np.abs(r)) <= tol * max(1.0, abs(lam)):
            break
        lo, dg, up = op.jacobian(z)
        J = np.zeros((n + 1, n + 1))
        J[np.arange(n), np.arange(n)] = dg
        J[np.arange(n - 1), np.arange(1, n)] = up
        J[np.arange(1, n), np.arange(n - 1)] = lo
        J[:n, n] = 1.0
        J[n, :n] = w / grid.volume
        dz = solve(J, -np.concatenate([r, [(w @ z) / grid.volume]]))
        z = z + dz[:n]
        mu += dz[n]
    return z - (w @ z) / grid.volume


def eigen_pair(grid: Grid, spec: ProblemSpec, delta_sequence=DEFAULT_DELTAS,
               polish: bool = True, guess=None) -> EigenResult:
    """(lambda_eps, omega_eps) from a decreasing sweep of penalties.

    Each delta gives the estimate -delta*mean(u_delta); lambda_eps is the
    Richardson extrapolation of the last two (first order in delta).  The
    profile is the mean-free part of the last u_delta, optionally refined
    by Newton on the eigen equation itself.
    """
    deltas = tuple(float(d) for d in delta_sequence)
    if len(deltas) < 3 or any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise ValueError("delta_sequence must be strictly decreasing with >= 3 entries")
    vol = grid.volume
    w = grid.weights
    ests, grads, dus, ress = [], [], [], []
    u_prev = None if guess is None else np.asarray(guess, dtype=float)
    prev_delta = None
    for d in deltas:
        g0 = None
        if u_prev is not None:
            m = (w @ u_prev) / vol
            scale = prev_delta / d if prev_delta else 1.0
            g0 = u_prev - m + m * scale
        u = solve_penalized(grid, spec, d, guess=g0).values
        lam_d = -d * (w @ u) / vol
        ests.append(float(lam_d))
        grads.append(float(np.max(np.abs(node_gradient(u, grid)))))
        dus.append(float(np.max(np.abs(d * u))))
        omega_d = u - (w @ u) / vol
        ress.append(eigen_residual(omega_d, lam_d, grid, spec))
        u_prev, prev_delta = u, d

    gaps = np.abs(np.diff(ests))
    floor = 1e-9 * max(1.0, max(abs(e) for e in ests))
    if np.any(gaps[1:] > gaps[:-1] + floor):
        raise ConvergenceError(f"lambda estimates are not Cauchy: gaps {gaps}")
    d1, d2 = deltas[-2], deltas[-1]
    l1, l2 = ests[-2], ests[-1]
    lam = (d1 * l2 - d2 * l1) / (d1 - d2)

    omega = u_prev - (w @ u_prev) / vol
    if polish:
        omega = _polish(omega, lam, grid, spec)
    res = eigen_residual(omega, lam, grid, spec)
    om = GridFunction(grid, omega)
    return EigenResult(lam, om, deltas, ests, res, _bc_residual_max(om, spec),
                       grads, dus, ress)


def _bc_residual_max(omega: GridFunction, spec: ProblemSpec) -> float:
    from .boundary import bc_residual
    return max(abs(r) for r in bc_residual(omega, spec.bc, spec.p, spec.eps).values())


@dataclass
class Lambda0Result:
    lambda0: float
    eps_sequence: tuple
    lambda_eps: list


def lambda0(grid: Grid, spec: ProblemSpec, eps_sequence, delta_sequence=DEFAULT_DELTAS
            ) -> Lambda0Result:
    """lambda_eps along a decreasing eps sweep, extrapolated to eps = 0.

    The extrapolation assumes lambda_eps - lambda_0 = O(eps^2), which is how
    eps enters v = sqrt(eps^2 + |Du|^2).
    """
    eps_seq = tuple(float(e) for e in eps_sequence)
    if len(eps_seq) < 2 or any(b >= a for a, b in zip(eps_seq, eps_seq[1:])):
        raise ValueError("eps_sequence must be strictly decreasing with >= 2 entries")
    lams = [eigen_pair(grid, spec.replace(eps=e), delta_sequence, polish=False).lambda_eps
            for e in eps_seq]
    e1, e2 = eps_seq[-2] ** 2, eps_seq[-1] ** 2
    lam0 = (e1 * lams[-1] - e2 * lams[-2]) / (e1 - e2)
    return Lambda0Result(lam0, eps_seq, lams)


def conormal_lambda_closed_form(grid: Grid, spec: ProblemSpec) -> float:
    """lambda_0 = -(sum_b S_b phi_b + int phi_rhs) / |Omega|  for q = p-1.

    With the conormal condition the boundary flux v^{p-2} u_nu = -phi is
    prescribed, so integrating -div(v^{p-2}Du) = lambda + phi_rhs over the
    domain (inward normal) fixes lambda.
    """
    if not np.isclose(spec.q, spec.p - 1):
        raise ValueError(f"closed form needs the conormal case q = p-1 (q={spec.q}, p={spec.p})")
    phi = spec.bc.phi_at(grid)
    bsum = sum(grid.boundary_area[b] * phi[b] for b in grid.boundary_index_set)
    return -(bsum + float(grid.weights @ spec.rhs_values(grid))) / grid.volume


def boundary_flux_lambda(grid: Grid, spec: ProblemSpec) -> float:
    """Same balance for any q, using the boundary slope pinned by the condition."""
    gb = boundary_gradients(grid, spec.bc, spec.eps)
    fl = boundary_fluxes(grid, spec.p, spec.eps, gb)
    net_out = fl.get(grid.N, 0.0) - fl.get(0, 0.0) if 0 in grid.inward_normal_sign \
        else fl[grid.N]
    return -(net_out + float(grid.weights @ spec.rhs_values(grid))) / grid.volume

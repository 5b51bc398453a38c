"""Implicit time stepping for  u_t = div(v^{p-2}Du) + a(x,u) v^{pt-1} + f(x,u) + phi_rhs(x).

Each step solves the theta-weighted system with Newton's method on the exact
tridiagonal Jacobian; the boundary condition enters as a fixed boundary flux
(see ``boundary.ghost_closure``).  When Newton fails the step is split in
two halves, recursively, at most ``max_halvings`` times.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import solve_banded

from .boundary import BoundaryCondition, boundary_gradients
from .field_ops import (GridFunction, aux_gradient_functional, boundary_fluxes,
                        discrete_gradient_flux, divergence_jacobian, energy, face_gradient,
                        node_gradient, weighted_divergence)
from .forcing import forcing_exponent

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    """Newton failed even after repeated step halving.

    ``last_state`` holds the last accepted GridFunction for post-mortem.
    """

    def __init__(self, msg, last_state=None):
        super().__init__(msg)
        self.last_state = last_state


class InvalidAuditError(ValueError):
    pass


# -- source models f(x, u) with f_u <= 0 --------------------------------------

@dataclass(frozen=True)
class ZeroSource:
    def value(self, x, u):
        return np.zeros(np.shape(u))

    def du(self, x, u):
        return np.zeros(np.shape(u))


@dataclass(frozen=True)
class AffineDecay:
    """f = c - lam*u with lam >= 0."""

    c: float = 0.0
    lam: float = 0.0

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("source must satisfy f_u <= 0 (lam >= 0)")

    def value(self, x, u):
        return self.c - self.lam * np.asarray(u, dtype=float)

    def du(self, x, u):
        return np.full(np.shape(u), -float(self.lam))


@dataclass(frozen=True)
class XProfile:
    """f = g(x), independent of u."""

    fn: Callable

    def value(self, x, u):
        return np.broadcast_to(self.fn(x), np.shape(u)).astype(float)

    def du(self, x, u):
        return np.zeros(np.shape(u))


def _is_zero_source(f) -> bool:
    if f is None or isinstance(f, ZeroSource):
        return True
    return isinstance(f, AffineDecay) and f.c == 0 and f.lam == 0


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """Parameters of the regularized problem.

    ``phi_rhs`` may be a constant, a callable of the coordinate or an array
    of node values; ``phi_bdry`` a constant or one value per boundary node.
    """

    p: float
    q: float
    eps: float
    f_model: object = field(default_factory=ZeroSource)
    a_model: object = None
    phi_bdry: float | tuple = 0.0
    phi_rhs: object = 0.0
    L_bound: float = np.inf
    epsilon1: float = 0.1

    def __post_init__(self):
        if self.p <= 1:
            raise ValueError(f"p must exceed 1, got {self.p}")
        if self.eps < 0:
            raise ValueError(f"eps must be >= 0, got {self.eps}")
        if self.f_model is None:
            object.__setattr__(self, "f_model", ZeroSource())
        # validates q and phi
        object.__setattr__(self, "bc", BoundaryCondition(self.q, self.phi_bdry,
                                                         epsilon1=self.epsilon1))

    def rhs_values(self, grid) -> np.ndarray:
        r = self.phi_rhs
        if callable(r):
            return np.broadcast_to(r(grid.nodes), grid.nodes.shape).astype(float)
        return np.broadcast_to(np.asarray(r, dtype=float), grid.nodes.shape).copy()

    @property
    def source_free(self) -> bool:
        """f = 0, phi = 0, a = 0 (the setting of the energy identity)."""
        rhs = self.phi_rhs
        rhs_zero = (not callable(rhs)) and np.all(np.asarray(rhs) == 0)
        return (_is_zero_source(self.f_model) and self.a_model is None and rhs_zero
                and self.bc.phi_sup == 0)

    def replace(self, **kw) -> "ProblemSpec":
        args = dict(p=self.p, q=self.q, eps=self.eps, f_model=self.f_model,
                    a_model=self.a_model, phi_bdry=self.phi_bdry, phi_rhs=self.phi_rhs,
                    L_bound=self.L_bound, epsilon1=self.epsilon1)
        args.update(kw)
        return ProblemSpec(**args)


@dataclass(frozen=True)
class SolverConfig:
    dt: float = 1e-2
    t_end: float = 1.0
    theta: float = 1.0
    newton_tol: float = 1e-10
    newton_max_iter: int = 30
    monitor_stride: int = 1
    ut_stop: float | None = None
    max_halvings: int = 8
    scheme: str = "theta"  # or "discrete_gradient"

    def __post_init__(self):
        if self.scheme not in ("theta", "discrete_gradient"):
            raise ValueError(f"unknown time scheme {self.scheme!r}")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not 0.5 <= self.theta <= 1:
            raise ValueError("theta must lie in [0.5, 1]")
        if not self.newton_tol > 0:
            raise ValueError("newton_tol must be positive")
        if self.monitor_stride < 1:
            raise ValueError("monitor_stride must be >= 1")


class Operator:
    """Semi-discrete right-hand side A(u) on a fixed grid, with its Jacobian."""

    def __init__(self, grid, spec: ProblemSpec):
        if spec.eps <= 0:
            raise ValueError("the solver integrates the regularized problem only (eps > 0)")
        self.grid = grid
        self.spec = spec
        self.gb = boundary_gradients(grid, spec.bc, spec.eps)
        self.rhs = spec.rhs_values(grid)
        self.x = grid.nodes
        self.pt = forcing_exponent(spec.p)

    def _node_grad(self, u):
        g = node_gradient(u, self.grid)
        for b, val in self.gb.items():
            g[b] = val
        return g

    def reaction(self, u: np.ndarray) -> np.ndarray:
        """Everything except the diffusion term."""
        sp = self.spec
        out = sp.f_model.value(self.x, u) + self.rhs
        if sp.a_model is not None:
            V = np.sqrt(sp.eps**2 + self._node_grad(u) ** 2)
            out = out + sp.a_model.value(self.x, u) * V ** (self.pt - 1)
        return out

    def reaction_jacobian(self, u: np.ndarray):
        sp = self.spec
        n = u.size
        lo, up = np.zeros(n - 1), np.zeros(n - 1)
        dg = sp.f_model.du(self.x, u).astype(float)
        if sp.a_model is not None:
            g = self._node_grad(u)
            V = np.sqrt(sp.eps**2 + g**2)
            a = sp.a_model.value(self.x, u)
            dg = dg + sp.a_model.du(self.x, u) * V ** (self.pt - 1)
            c = a * (self.pt - 1) * V ** (self.pt - 3) * g / (2 * self.grid.h)
            inner = np.ones(n, dtype=bool)
            inner[list(self.gb)] = False
            if self.grid.has_center:
                inner[0] = False
            c = np.where(inner, c, 0.0)
            up = c[:-1]    # d row j / d u_{j+1}
            lo = -c[1:]    # d row j / d u_{j-1}
        return lo, dg, up

    def diffusion(self, u: np.ndarray) -> np.ndarray:
        sp = self.spec
        return weighted_divergence(u, self.grid, sp.p, sp.eps, self.gb) / self.grid.weights

    def __call__(self, u: np.ndarray) -> np.ndarray:
        return self.diffusion(u) + self.reaction(u)

    def jacobian(self, u: np.ndarray):
        sp = self.spec
        w = self.grid.weights
        lo, dg, up = divergence_jacobian(u, self.grid, sp.p, sp.eps)
        rl, rd, ru = self.reaction_jacobian(u)
        return lo / w[1:] + rl, dg / w + rd, up / w[:-1] + ru

    def dg_diffusion(self, z: np.ndarray, u: np.ndarray):
        """Discrete-gradient diffusion term at new state z from old state u,
        with its tridiagonal Jacobian in z."""
        sp, grid = self.spec, self.grid
        w = grid.weights
        F, dF = discrete_gradient_flux(face_gradient(z, grid.h), face_gradient(u, grid.h),
                                       sp.p, sp.eps)
        flux = grid.face_area * F
        out = np.zeros_like(z)
        out[:-1] += flux
        out[1:] -= flux
        bflux = boundary_fluxes(grid, sp.p, sp.eps, self.gb)
        if grid.N in bflux:
            out[grid.N] += bflux[grid.N]
        if 0 in bflux:
            out[0] -= bflux[0]
        k = grid.face_area * dF / grid.h
        dg = np.zeros_like(z)
        dg[:-1] -= k
        dg[1:] -= k
        return out / w, (k / w[1:], dg / w, k / w[:-1])


def _banded(lo, dg, up):
    ab = np.zeros((3, dg.size))
    ab[0, 1:] = up
    ab[1] = dg
    ab[2, :-1] = lo
    return ab


def newton_solve(residual, jacobian, u0: np.ndarray, tol: float, max_iter: int,
                 row_scale: float = 1.0):
    """Damped Newton on a tridiagonal system; returns (u, converged, res_norm).

    ``row_scale`` is the size of the largest Jacobian entry; it sets the
    round-off floor below which a stalled iteration still counts as converged.
    """
    u = u0.copy()
    r = residual(u)
    rn = np.max(np.abs(r))
    for _ in range(max_iter):
        if rn <= tol:
            return u, True, rn
        lo, dg, up = jacobian(u)
        try:
            du = solve_banded((1, 1), _banded(lo, dg, up), -r)
        except (np.linalg.LinAlgError, ValueError):
            return u, False, rn
        if not np.all(np.isfinite(du)):
            return u, False, rn
        alpha = 1.0
        while True:
            trial = u + alpha * du
            rt = residual(trial)
            rtn = np.max(np.abs(rt))
            if np.isfinite(rtn) and rtn <= (1 - 1e-4 * alpha) * rn:
                break
            alpha *= 0.5
            if alpha < 1.0 / 1024:
                break
        if not (np.isfinite(rtn) and rtn < rn):
            # at round-off level there is no further decrease to be had
            floor = 64 * np.finfo(float).eps * row_scale * max(1.0, np.max(np.abs(u)))
            return u, rn <= max(tol, floor), rn
        u, r, rn = trial, rt, rtn
    return u, rn <= tol, rn


def _theta_step(op: Operator, u: np.ndarray, dt: float, cfg: SolverConfig, depth: int = 0):
    if cfg.scheme == "discrete_gradient":
        react_old = 0.5 * dt * op.reaction(u)

        def residual(z):
            return z - u - dt * op.dg_diffusion(z, u)[0] - 0.5 * dt * op.reaction(z) - react_old

        def jacobian(z):
            lo, dg, up = op.dg_diffusion(z, u)[1]
            rl, rd, ru = op.reaction_jacobian(z)
            return -dt * (lo + 0.5 * rl), 1.0 - dt * (dg + 0.5 * rd), -dt * (up + 0.5 * ru)
    else:
        explicit = (1 - cfg.theta) * dt * op(u) if cfg.theta < 1 else 0.0

        def residual(z):
            return z - u - cfg.theta * dt * op(z) - explicit

        def jacobian(z):
            lo, dg, up = op.jacobian(z)
            s = cfg.theta * dt
            return -s * lo, 1.0 - s * dg, -s * up

    z, ok, rn = newton_solve(residual, jacobian, u, cfg.newton_tol, cfg.newton_max_iter)
    if ok:
        return z
    if depth >= cfg.max_halvings:
        raise SolverError(f"Newton did not converge (residual {rn:.3e}) after "
                          f"{depth} step halvings", GridFunction(op.grid, u))
    log.debug("halving dt=%g at depth %d (residual %.3e)", dt, depth, rn)
    mid = _theta_step(op, u, dt / 2, cfg, depth + 1)
    return _theta_step(op, mid, dt / 2, cfg, depth + 1)


def step(u: GridFunction, spec: ProblemSpec, cfg: SolverConfig, op: Operator | None = None
         ) -> GridFunction:
    op = op or Operator(u.grid, spec)
    return GridFunction(u.grid, _theta_step(op, u.values, cfg.dt, cfg))


@dataclass
class Monitors:
    times: np.ndarray
    sup_ut: np.ndarray
    sup_grad: np.ndarray
    energy: np.ndarray
    dissipation_residual: np.ndarray
    mean_u: np.ndarray
    aux_w_max: np.ndarray | None
    lipschitz_t: float
    p: float
    dt: float
    states: np.ndarray | None = None
    stopped: bool = False  # the run ended on cfg.ut_stop

    @property
    def slope_lambda_hat(self) -> float:
        return slope_lambda(self)

    def rows(self):
        for k in range(len(self.times)):
            aux = None if self.aux_w_max is None else self.aux_w_max[k]
            yield (self.times[k], self.sup_ut[k], self.sup_grad[k], self.energy[k],
                   self.dissipation_residual[k], self.mean_u[k], aux)


def evolve(u0: GridFunction, spec: ProblemSpec, cfg: SolverConfig,
           record_states: bool = False) -> tuple[GridFunction, Monitors]:
    """Integrate from u0 to cfg.t_end (or until sup|u_t| <= cfg.ut_stop).

    Row 0 of the monitors is t = 0, where sup_ut is the semi-discrete
    right-hand side at u0; later rows use the quotient (u^{k+1} - u^k)/dt.
    """
    grid = u0.grid
    op = Operator(grid, spec)
    w, vol = grid.weights, grid.volume
    p, eps = spec.p, spec.eps
    convex = grid.domain.convex
    phi_b = spec.bc.phi_at(grid)

    def aux(u):
        return float(np.max(aux_gradient_functional(GridFunction(grid, u), p, spec.q, eps,
                                                    phi_b).values))

    def gmax(u):
        return float(np.max(np.abs(node_gradient(u, grid))))

    u = u0.values.copy()
    E = energy(u, grid, p, eps)
    times, sut, sgr, en, dres, mu, auxw = [0.0], [float(np.max(np.abs(op(u))))], [gmax(u)], \
        [E], [0.0], [float(w @ u) / vol], ([aux(u)] if convex else None)
    states = [u.copy()] if record_states else None
    n_steps = int(round(cfg.t_end / cfg.dt))
    lip = 0.0
    worst_res, worst_ut = 0.0, 0.0
    t = 0.0
    done = False
    for k in range(1, n_steps + 1):
        new = _theta_step(op, u, cfg.dt, cfg)
        ut = (new - u) / cfg.dt
        E_new = energy(new, grid, p, eps)
        res = abs((E_new - E) / cfg.dt + p * float(w @ (ut * ut)))
        u, E, t = new, E_new, k * cfg.dt
        s = float(np.max(np.abs(ut)))
        lip = max(lip, s)
        worst_res = max(worst_res, res)
        worst_ut = max(worst_ut, s)
        done = cfg.ut_stop is not None and s <= cfg.ut_stop
        if k % cfg.monitor_stride == 0 or k == n_steps or done:
            times.append(t)
            sut.append(worst_ut)
            sgr.append(gmax(u))
            en.append(E)
            dres.append(worst_res)
            mu.append(float(w @ u) / vol)
            if convex:
                auxw.append(aux(u))
            if record_states:
                states.append(u.copy())
            worst_res, worst_ut = 0.0, 0.0
        if done:
            break
    mon = Monitors(np.array(times), np.array(sut), np.array(sgr), np.array(en),
                   np.array(dres), np.array(mu), None if auxw is None else np.array(auxw),
                   lip, p, cfg.dt, None if states is None else np.array(states), done)
    return GridFunction(grid, u), mon


def slope_lambda(monitors: Monitors, window: float = 0.5) -> float:
    """-(least-squares slope of mean_u) over the trailing fraction of the run."""
    t = monitors.times
    t_lo = t[-1] - window * (t[-1] - t[0])
    sel = t >= t_lo
    if np.count_nonzero(sel) < 10:
        raise ValueError("trailing window holds fewer than 10 samples")
    slope = np.polyfit(t[sel], monitors.mean_u[sel], 1)[0]
    return -float(slope)


@dataclass(frozen=True)
class EnergyAudit:
    max_residual: float        # normalised by max(1, E(0))
    raw_max_residual: float
    nonincreasing: bool


def energy_dissipation_audit(monitors: Monitors, spec: ProblemSpec) -> EnergyAudit:
    """Check dE/dt = -p int u_t^2 for source-free runs, E = int v^p."""
    if not spec.source_free:
        raise InvalidAuditError("energy identity only holds for f = phi = a = 0")
    raw = float(np.max(monitors.dissipation_residual))
    E0 = monitors.energy[0]
    tol = 1e-12 * max(1.0, E0)
    mono = bool(np.all(np.diff(monitors.energy) <= tol))
    return EnergyAudit(raw / max(1.0, E0), raw, mono)

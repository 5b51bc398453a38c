"""Grid functions and the discrete operators built on them.

The p-Laplacian is discretised in flux form: at the half node j+1/2 the
flux is  S_{j+1/2} v^{p-2} (u_{j+1} - u_j)/h  with v computed from the same
midpoint difference, and the value at node j is the flux difference divided
by the control volume.  Boundary faces take their gradient from the boundary
condition (or, absent one, from a one-sided difference), so that
``integrate(p_laplacian(u))`` equals the net boundary flux exactly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Grid, defining_function


class SingularEvaluationError(ArithmeticError):
    """Raised instead of producing NaN when eps=0, p<2 and Du=0."""


@dataclass(eq=False)
class GridFunction:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.nodes.shape:
            raise ValueError(
                f"expected {self.grid.nodes.size} values, got {self.values.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("grid function has non-finite values")

    @classmethod
    def from_callable(cls, grid: Grid, fn) -> "GridFunction":
        return cls(grid, np.broadcast_to(fn(grid.nodes), grid.nodes.shape).astype(float))

    @property
    def x(self) -> np.ndarray:
        return self.grid.nodes

    def copy(self) -> "GridFunction":
        return GridFunction(self.grid, self.values.copy())


@dataclass(frozen=True, eq=False)
class RegularizedFields:
    v: np.ndarray
    v_tilde: np.ndarray
    a11: np.ndarray
    singular: bool = False


def node_gradient(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Central differences inside, second-order one-sided at boundary nodes.

    At the centre of a ball the reflected ghost u_{-1} = u_1 gives 0.
    """
    u = values
    h = grid.h
    g = np.empty_like(u)
    g[1:-1] = (u[2:] - u[:-2]) / (2 * h)
    g[-1] = (3 * u[-1] - 4 * u[-2] + u[-3]) / (2 * h)
    if grid.has_center:
        g[0] = 0.0
    else:
        g[0] = (-3 * u[0] + 4 * u[1] - u[2]) / (2 * h)
    return g


def gradient(u: GridFunction) -> GridFunction:
    return GridFunction(u.grid, node_gradient(u.values, u.grid))


def face_gradient(values: np.ndarray, h: float) -> np.ndarray:
    return np.diff(values) / h


def flux_density(s, p: float, eps: float):
    """v^{p-2} s with v = sqrt(eps^2 + s^2)."""
    s = np.asarray(s, dtype=float)
    if p == 2:
        return s.copy()
    v2 = eps * eps + s * s
    if eps == 0 and p < 2 and np.any(s == 0):
        raise SingularEvaluationError("v^{p-2} is infinite where Du = 0 (eps=0, p<2)")
    with np.errstate(divide="ignore", invalid="ignore"):
        out = v2 ** ((p - 2) / 2) * s
    return np.where(s == 0, 0.0, out) if eps == 0 else out


def flux_slope(s, p: float, eps: float):
    """d(v^{p-2} s)/ds = v^{p-4} (eps^2 + (p-1) s^2), the 1D coefficient a11."""
    s = np.asarray(s, dtype=float)
    if p == 2:
        return np.ones_like(s)
    v2 = eps * eps + s * s
    if eps == 0 and np.any(s == 0):
        if p < 2:
            raise SingularEvaluationError("a11 is infinite where Du = 0 (eps=0, p<2)")
        with np.errstate(divide="ignore", invalid="ignore"):
            out = v2 ** ((p - 4) / 2) * (p - 1) * s * s
        return np.where(s == 0, 0.0, out)
    return v2 ** ((p - 4) / 2) * (eps * eps + (p - 1) * s * s)


def _energy_density_derivs(s, p, eps):
    """G(s) = (eps^2+s^2)^{p/2} and its first three derivatives."""
    v2 = eps * eps + s * s
    G = v2 ** (p / 2)
    G1 = p * v2 ** ((p - 2) / 2) * s
    G2 = p * v2 ** ((p - 4) / 2) * (eps * eps + (p - 1) * s * s)
    G3 = p * (p - 2) * v2 ** ((p - 6) / 2) * s * (3 * eps * eps + (p - 1) * s * s)
    return G, G1, G2, G3


def discrete_gradient_flux(s_new, s_old, p: float, eps: float):
    """Average-vector-field flux [G(s+) - G(s-)] / (p (s+ - s-)) and its
    derivative in s+.  Needs eps > 0.

    Close to s+ = s- the quotient is replaced by its midpoint expansion
    G'(m)/p + G'''(m) d^2/(24p), accurate to O(d^4).
    """
    s_new = np.asarray(s_new, dtype=float)
    s_old = np.asarray(s_old, dtype=float)
    d = s_new - s_old
    m = 0.5 * (s_new + s_old)
    near = np.abs(d) <= 1e-4 * (eps + np.abs(m))
    dd = np.where(near, 1.0, d)
    Gn, G1n, _, _ = _energy_density_derivs(s_new, p, eps)
    Go = _energy_density_derivs(s_old, p, eps)[0]
    _, G1m, G2m, G3m = _energy_density_derivs(m, p, eps)
    flux = np.where(near, (G1m + G3m * d * d / 24) / p, (Gn - Go) / (p * dd))
    slope = np.where(near, G2m / (2 * p), (G1n * dd - (Gn - Go)) / (p * dd * dd))
    return flux, slope


def regularized_fields(u: GridFunction, p: float, eps: float) -> RegularizedFields:
    if p <= 1:
        raise ValueError(f"p must exceed 1, got {p}")
    if eps < 0:
        raise ValueError(f"eps must be >= 0, got {eps}")
    du = node_gradient(u.values, u.grid)
    v2 = eps**2 + du**2
    v = np.sqrt(v2)
    vt = np.sqrt(eps**2 + (p - 1) * du**2)
    singular = False
    with np.errstate(divide="ignore", invalid="ignore"):
        a11 = v ** (p - 4) * vt**2
    bad = v == 0
    if np.any(bad):
        # eps = 0 and Du = 0: a11 is 0 (p>2), 1 (p=2) or infinite (p<2)
        if p > 2:
            a11[bad] = 0.0
        elif p == 2:
            a11[bad] = 1.0
        else:
            a11[bad] = np.inf
            singular = True
    return RegularizedFields(v, vt, a11, singular)


def boundary_fluxes(grid: Grid, p: float, eps: float, boundary_gradient: dict) -> dict:
    """Flux S v^{p-2} u_x through each boundary face (positive along +x)."""
    return {
        b: grid.boundary_area[b] * float(flux_density(boundary_gradient[b], p, eps))
        for b in grid.boundary_index_set
    }


def weighted_divergence(values: np.ndarray, grid: Grid, p: float, eps: float,
                        boundary_gradient: dict | None = None) -> np.ndarray:
    """w_j * div(v^{p-2}Du)_j: the flux difference across each control volume."""
    if boundary_gradient is None:
        g = node_gradient(values, grid)
        boundary_gradient = {b: g[b] for b in grid.boundary_index_set}
    flux = grid.face_area * flux_density(face_gradient(values, grid.h), p, eps)
    out = np.zeros_like(values)
    out[:-1] += flux
    out[1:] -= flux
    N = grid.N
    bflux = boundary_fluxes(grid, p, eps, boundary_gradient)
    if N in bflux:
        out[N] += bflux[N]
    if 0 in bflux:
        out[0] -= bflux[0]
    return out


def divergence_jacobian(values: np.ndarray, grid: Grid, p: float, eps: float):
    """Tridiagonal derivative of ``weighted_divergence`` w.r.t. the node values.

    Boundary fluxes are fixed by the boundary condition and do not contribute.
    Returns (lower, diag, upper) with lower[j] = d/du_j of row j+1.
    """
    k = grid.face_area * flux_slope(face_gradient(values, grid.h), p, eps) / grid.h
    diag = np.zeros_like(values)
    diag[:-1] -= k
    diag[1:] -= k
    return k.copy(), diag, k.copy()


def p_laplacian(u: GridFunction, p: float, eps: float,
                boundary_gradient: dict | None = None) -> GridFunction:
    """Discrete div(v^{p-2} Du), exact zero on constants and (interior) affines."""
    if p <= 1:
        raise ValueError(f"p must exceed 1, got {p}")
    grid = u.grid
    return GridFunction(grid, weighted_divergence(u.values, grid, p, eps, boundary_gradient)
                        / grid.weights)


def energy(values: np.ndarray, grid: Grid, p: float, eps: float) -> float:
    """Discrete integral of v^p, using the midpoint gradients of the flux form."""
    s = face_gradient(values, grid.h)
    return float(np.sum(grid.face_area * grid.h * (eps * eps + s * s) ** (p / 2)))


def integrate(u: GridFunction) -> float:
    return float(np.dot(u.grid.weights, u.values))


def mean(u: GridFunction) -> float:
    return integrate(u) / u.grid.volume


def sup_norm(u: GridFunction) -> float:
    return float(np.max(np.abs(u.values)))


def sup_grad(u: GridFunction) -> float:
    return float(np.max(np.abs(node_gradient(u.values, u.grid))))


def extend_boundary_values(grid: Grid, phi_bdry: dict) -> np.ndarray:
    """Constant normal extension of boundary data: each node takes the value
    of its nearest boundary node."""
    idx = grid.boundary_index_set
    if len(idx) == 1:
        return np.full(grid.nodes.shape, float(phi_bdry[idx[0]]))
    mid = 0.5 * (grid.nodes[0] + grid.nodes[-1])
    return np.where(grid.nodes <= mid, float(phi_bdry[idx[0]]), float(phi_bdry[idx[1]]))


def aux_gradient_functional(u: GridFunction, p: float, q: float, eps: float,
                            phi_bdry: dict) -> GridFunction:
    """v^{q+1} - (q+1) phi u_r h_r, the quantity whose maximum drives the
    gradient bound.  Needs a convex domain (uses the defining function)."""
    grid = u.grid
    _, dh, _ = defining_function(grid.domain, grid.nodes)
    du = node_gradient(u.values, grid)
    v = np.sqrt(eps**2 + du**2)
    phi = extend_boundary_values(grid, phi_bdry)
    return GridFunction(grid, v ** (q + 1) - (q + 1) * phi * du * dh)

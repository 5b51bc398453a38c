"""Computational domains and their 1D grids.

Every domain reduces to a single coordinate: the position on an interval or
the radius of a radially symmetric ball/annulus.  Grids are vertex centred;
each node owns the control volume between its neighbouring half nodes, so
the weights sum to the exact Lebesgue measure and flux differences telescope.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import gamma, pi

import numpy as np


class GeometryError(ValueError):
    pass


def sphere_area(n: int) -> float:
    """Area of the unit sphere in R^n (2 for n=1, 2*pi for n=2, 4*pi for n=3)."""
    return 2.0 * pi ** (n / 2) / gamma(n / 2)


@dataclass(frozen=True)
class Interval:
    x_left: float = 0.0
    x_right: float = 1.0
    kind = "interval"
    n = 1

    def __post_init__(self):
        if not self.x_left < self.x_right:
            raise GeometryError(f"need x_left < x_right, got {self.x_left}, {self.x_right}")

    @property
    def volume(self) -> float:
        return self.x_right - self.x_left

    @property
    def convex(self) -> bool:
        return True


@dataclass(frozen=True)
class RadialBall:
    n: int = 2
    R: float = 1.0
    kind = "ball"

    def __post_init__(self):
        if self.n < 1:
            raise GeometryError(f"dimension must be >= 1, got {self.n}")
        if not self.R > 0:
            raise GeometryError(f"radius must be positive, got {self.R}")

    @property
    def volume(self) -> float:
        return sphere_area(self.n) * self.R**self.n / self.n

    @property
    def convex(self) -> bool:
        return True


@dataclass(frozen=True)
class RadialAnnulus:
    n: int = 2
    R_in: float = 1.0
    R_out: float = 2.0
    kind = "annulus"

    def __post_init__(self):
        if self.n < 2:
            raise GeometryError(f"annulus needs n >= 2, got {self.n}")
        if not 0 < self.R_in < self.R_out:
            raise GeometryError(f"need 0 < R_in < R_out, got {self.R_in}, {self.R_out}")

    @property
    def volume(self) -> float:
        return sphere_area(self.n) * (self.R_out**self.n - self.R_in**self.n) / self.n

    @property
    def convex(self) -> bool:
        return False


Domain = Interval | RadialBall | RadialAnnulus


@dataclass(frozen=True)
class CurvatureConstants:
    kappa0: float
    C0: float
    K0: float


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform 1D grid with control-volume weights.

    ``face_area[j]`` is the surface factor at the half node between nodes j
    and j+1; ``boundary_area`` maps a boundary node index to the surface
    factor of its boundary face.
    """

    domain: Domain
    nodes: np.ndarray
    h: float
    weights: np.ndarray
    face_area: np.ndarray
    boundary_area: dict = field(default_factory=dict)
    inward_normal_sign: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return len(self.nodes) - 1

    @property
    def boundary_index_set(self) -> tuple[int, ...]:
        return tuple(sorted(self.inward_normal_sign))

    @property
    def has_center(self) -> bool:
        """True when node 0 is the symmetry centre of a ball."""
        return isinstance(self.domain, RadialBall)

    @property
    def volume(self) -> float:
        return self.domain.volume


def _surface(domain: Domain, r):
    if isinstance(domain, Interval):
        return np.ones_like(np.asarray(r, dtype=float))
    return sphere_area(domain.n) * np.asarray(r, dtype=float) ** (domain.n - 1)


def _shell(domain: Domain, a, b):
    """Measure of the slab/shell between coordinates a <= b."""
    if isinstance(domain, Interval):
        return b - a
    n = domain.n
    return sphere_area(n) * (b**n - a**n) / n


def build_grid(domain: Domain, N: int) -> Grid:
    if N < 8:
        raise GeometryError(f"grid needs N >= 8 intervals, got {N}")
    if isinstance(domain, Interval):
        lo, hi = domain.x_left, domain.x_right
    elif isinstance(domain, RadialBall):
        lo, hi = 0.0, domain.R
    else:
        lo, hi = domain.R_in, domain.R_out
    nodes = np.linspace(lo, hi, N + 1)
    h = (hi - lo) / N
    half = 0.5 * (nodes[:-1] + nodes[1:])
    edges = np.concatenate([[lo], half, [hi]])
    weights = _shell(domain, edges[:-1], edges[1:])
    face_area = _surface(domain, half)

    if isinstance(domain, RadialBall):
        sign = {N: -1}
        barea = {N: float(_surface(domain, hi))}
    else:
        sign = {0: +1, N: -1}
        barea = {0: float(_surface(domain, lo)), N: float(_surface(domain, hi))}
    return Grid(domain, nodes, h, weights, face_area, barea, sign)


def defining_function(domain: Domain, x):
    """Defining function h with h<0 inside, h=0 and |Dh|=1 on the boundary.

    Returns (h, dh/dx, d2h/dx2) along the grid coordinate.  For the ball
    h = (r^2 - R^2)/(2R); the interval uses the same formula about its
    midpoint, i.e. (x - a)(x - b)/(b - a).
    """
    x = np.asarray(x, dtype=float)
    if isinstance(domain, RadialAnnulus):
        raise GeometryError("annulus has no global convex defining function")
    if isinstance(domain, Interval):
        a, b = domain.x_left, domain.x_right
        L = b - a
        return (x - a) * (x - b) / L, (2 * x - a - b) / L, np.full_like(x, 2.0 / L)
    R = domain.R
    return (x**2 - R**2) / (2 * R), x / R, np.full_like(x, 1.0 / R)


def distance_to_boundary(domain: Domain, x):
    x = np.asarray(x, dtype=float)
    if isinstance(domain, Interval):
        return np.minimum(x - domain.x_left, domain.x_right - x)
    if isinstance(domain, RadialBall):
        return domain.R - x
    return np.minimum(x - domain.R_in, domain.R_out - x)


def curvature_constants(domain: Domain) -> CurvatureConstants:
    """kappa0 = 0 flags "undefined" for the non-convex annulus."""
    if isinstance(domain, Interval):
        half = 0.5 * domain.volume
        return CurvatureConstants(kappa0=1.0 / half, C0=0.0, K0=half)
    if isinstance(domain, RadialBall):
        return CurvatureConstants(kappa0=1.0 / domain.R, C0=0.0, K0=domain.R)
    return CurvatureConstants(
        kappa0=0.0, C0=1.0 / domain.R_in, K0=0.5 * (domain.R_out - domain.R_in)
    )

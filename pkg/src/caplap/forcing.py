"""Forcing term a(x,u)|Du|^{pt-1}, pt = max(2, p), for non-convex domains."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .field_ops import GridFunction, node_gradient


@dataclass(frozen=True)
class ConstantForcing:
    a0: float

    def value(self, x, u):
        return np.full(np.shape(u), float(self.a0))

    def du(self, x, u):
        return np.zeros(np.shape(u))

    def dx(self, x, u):
        return np.zeros(np.shape(u))


@dataclass(frozen=True)
class AffineForcing:
    """a(x,u) = a0 - k u with k >= 0, so that a_u <= 0."""

    a0: float
    k: float = 0.0

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("forcing must be non-increasing in u (k >= 0)")

    def value(self, x, u):
        return self.a0 - self.k * np.asarray(u, dtype=float)

    def du(self, x, u):
        return np.full(np.shape(u), -float(self.k))

    def dx(self, x, u):
        return np.zeros(np.shape(u))


@dataclass(frozen=True)
class ForcingModel:
    a_model: ConstantForcing | AffineForcing
    c1: float = 0.1
    C1: float = 1.0
    theta: float = 1.0  # numeric stand-in for "much larger than 1"


def forcing_exponent(p: float) -> float:
    return max(2.0, p)


def forcing_term(u: GridFunction, a_model, p: float, eps: float,
                 boundary_gradient: dict | None = None) -> GridFunction:
    if a_model is None:
        return GridFunction(u.grid, np.zeros_like(u.values))
    du = node_gradient(u.values, u.grid)
    if boundary_gradient:
        for b, g in boundary_gradient.items():
            du[b] = g
    v = np.sqrt(eps * eps + du * du)
    pt = forcing_exponent(p)
    return GridFunction(u.grid, a_model.value(u.x, u.values) * v ** (pt - 1))


@dataclass(frozen=True)
class Admissibility:
    passed: bool
    margin: float


def admissibility_check(model: ForcingModel, value_range, p: float, x=None,
                        samples: int = 201) -> Admissibility:
    """Gate on the forcing condition over x-samples times a dense u-range.

    p >= 2: margin = min(c1 a^2 - |a_x| - C1 |a|), pass iff margin >= theta.
    p < 2:  margin = min |a|, pass iff margin > 0.
    """
    lo, hi = value_range
    us = np.linspace(lo, hi, samples)
    xs = np.zeros(1) if x is None else np.asarray(x, dtype=float)
    X, U = np.meshgrid(xs, us)
    a = model.a_model.value(X, U)
    if p >= 2:
        da = np.abs(model.a_model.dx(X, U))
        margin = float(np.min(model.c1 * a * a - da - model.C1 * np.abs(a)))
        return Admissibility(margin >= model.theta, margin)
    margin = float(np.min(np.abs(a)))
    return Admissibility(margin > 0, margin)

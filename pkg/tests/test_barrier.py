import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from caplap.barrier import (BarrierInfeasibleError, BarrierParams, build_barrier,
                            default_params, gamma_autotune, min_exponent, profile,
                            verify_barrier, weighted_boundary_slope)
from caplap.geometry import Interval, RadialAnnulus, RadialBall, build_grid, distance_to_boundary


def test_min_exponent():
    assert min_exponent(1.5) == pytest.approx(3.0)
    assert min_exponent(2.0) == 2.0 and min_exponent(3.0) == 2.0
    with pytest.raises(ValueError):
        BarrierParams(3.0, 0.1, 1e-3, 1.5, 1.0)


def test_flat_branch_and_boundary_slope():
    prm = BarrierParams(b=3.0, eps0=0.1, gamma=1e-4, p=2.0, q=1.0)
    w, w1, w2 = profile(np.array([0.0, 0.1, 0.5]), prm)
    flat = -math.sqrt(0.1**3 + 1e-4)
    assert w[1] == pytest.approx(flat) and w[2] == pytest.approx(flat)
    assert w1[1] == 0 and w2[1] == 0
    assert w[0] == pytest.approx(-math.sqrt(1e-4))
    assert -w1[0] == pytest.approx(1.5 * 1e2 * 0.1**2)
    assert weighted_boundary_slope(prm, 0.3) == pytest.approx(-w1[0])


def test_profile_derivatives_match_differences():
    prm = BarrierParams(b=4.0, eps0=0.2, gamma=1e-3, p=3.0, q=1.0)
    d = np.linspace(0.01, 0.19, 50)
    h = 1e-6
    w_p, w_m = profile(d + h, prm)[0], profile(d - h, prm)[0]
    _, w1, w2 = profile(d, prm)
    assert np.allclose((w_p - w_m) / (2 * h), w1, rtol=1e-6)
    w1p, w1m = profile(d + h, prm)[1], profile(d - h, prm)[1]
    assert np.allclose((w1p - w1m) / (2 * h), w2, rtol=1e-5)


def test_autotune_q1_closed_form():
    b, e0, phi = 3.0, 0.1, 0.5
    g = gamma_autotune(b, e0, 2.0, 1.0, phi)
    # slope m = (b/2) g^{-1/2} e0^{b-1} must reach 1.1 phi
    g_max = (0.5 * b * e0 ** (b - 1) / (1.1 * phi)) ** 2
    assert g <= g_max and g > g_max / 10 ** 0.25 - 1e-300


def test_autotune_rejects_q0():
    with pytest.raises(ValueError):
        gamma_autotune(3.0, 0.1, 2.0, 0.0, 0.5)
    with pytest.raises(BarrierInfeasibleError):
        gamma_autotune(3.0, 0.1, 2.0, 1.0, 0.5, gammas=[1.0])


def test_non_ball_domain_rejected():
    prm = BarrierParams(3.0, 0.05, 1e-3, 2.0, 1.0)
    with pytest.raises(Exception):
        build_barrier(build_grid(RadialAnnulus(2, 1.0, 2.0), 32), prm)


def test_collar_wider_than_half_radius_rejected():
    prm = BarrierParams(3.0, 0.8, 1e-3, 2.0, 1.0)
    with pytest.raises(ValueError):
        build_barrier(build_grid(RadialBall(2, 1.0), 64), prm)


@settings(max_examples=12)
@given(p=st.sampled_from([1.5, 2.0, 3.0]), q=st.sampled_from([0.5, 1.0, 2.0]),
       phi=st.floats(0.05, 1.0), kind=st.sampled_from(["ball2", "ball3", "interval"]))
def test_default_barrier_verifies(p, q, phi, kind):
    dom = {"ball2": RadialBall(2, 1.0), "ball3": RadialBall(3, 1.0),
           "interval": Interval(-1.0, 1.0)}[kind]
    grid = build_grid(dom, 256)
    prm = default_params(dom, p, q, phi)
    rep = verify_barrier(grid, prm, phi_sup=phi)
    assert rep.passed, (rep.sup_ratio, rep.flat_max_abs, rep.boundary_slope_min)
    assert rep.sup_ratio <= 2.0
    d = distance_to_boundary(dom, grid.nodes)
    assert np.all(build_barrier(grid, prm).values[d >= prm.eps0] ==
                  -math.sqrt(prm.eps0 ** prm.b + prm.gamma))

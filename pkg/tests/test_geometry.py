import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from caplap.geometry import (GeometryError, Interval, RadialAnnulus, RadialBall, build_grid,
                             curvature_constants, defining_function, distance_to_boundary,
                             sphere_area)


def test_interval_small_grid():
    g = build_grid(Interval(0.0, 1.0), 8)
    assert g.nodes.size == 9
    assert g.h == pytest.approx(0.125)
    assert g.weights.sum() == pytest.approx(1.0, abs=1e-15)


def test_disk_and_annulus_areas(disk, annulus):
    assert disk.weights.sum() == pytest.approx(math.pi, abs=1e-13)
    assert annulus.weights.sum() == pytest.approx(3 * math.pi, abs=1e-13)


def test_normal_signs(unit_interval, disk, annulus):
    assert unit_interval.inward_normal_sign == {0: 1, 64: -1}
    assert disk.inward_normal_sign == {128: -1}
    assert annulus.inward_normal_sign == {0: 1, 128: -1}


def test_rejects_bad_input():
    with pytest.raises(GeometryError):
        build_grid(Interval(0, 1), 7)
    with pytest.raises(ValueError):
        Interval(1.0, 0.0)
    with pytest.raises(ValueError):
        RadialAnnulus(2, 2.0, 1.0)
    with pytest.raises(ValueError):
        RadialBall(2, -1.0)


def test_sphere_area():
    assert sphere_area(1) == pytest.approx(2.0)
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)


def test_defining_function_examples():
    h, dh, _ = defining_function(RadialBall(2, 1.0), np.array([1.0, 0.0]))
    assert h[0] == 0 and abs(dh[0]) == pytest.approx(1.0)
    assert h[1] == pytest.approx(-0.5)
    h, dh, _ = defining_function(Interval(0.0, 1.0), np.array([0.0, 0.5, 1.0]))
    assert h[1] == pytest.approx(-0.25)
    assert abs(dh[0]) == pytest.approx(1.0) and abs(dh[2]) == pytest.approx(1.0)
    with pytest.raises(GeometryError):
        defining_function(RadialAnnulus(2, 1.0, 2.0), 1.5)


def test_curvature_constants():
    c = curvature_constants(RadialBall(2, 2.0))
    assert (c.kappa0, c.C0, c.K0) == (0.5, 0.0, 2.0)
    c = curvature_constants(RadialAnnulus(2, 1.0, 3.0))
    assert (c.C0, c.K0) == (1.0, 1.0)
    c = curvature_constants(Interval(0.0, 1.0))
    assert (c.K0, c.C0) == (0.5, 0.0)


def test_distance():
    assert distance_to_boundary(Interval(0, 1), 0.3) == pytest.approx(0.3)
    assert distance_to_boundary(RadialBall(2, 1.0), 0.25) == pytest.approx(0.75)


def test_r_squared_quadrature_converges():
    # int_disk r^2 = pi/2; control volumes integrate it with O(h^2) error
    errs = []
    for N in (32, 64, 128):
        g = build_grid(RadialBall(2, 1.0), N)
        errs.append(abs(g.weights @ g.nodes**2 - math.pi / 2))
    assert errs[1] < errs[0] and errs[2] < errs[1]
    assert errs[1] / errs[2] > 1.9


@given(n=st.integers(1, 4), R=st.floats(0.1, 10.0), N=st.integers(8, 400))
def test_ball_weights_sum_to_volume(n, R, N):
    g = build_grid(RadialBall(n, R), N)
    assert abs(g.weights.sum() - g.volume) <= 10 * np.finfo(float).eps * N * g.volume


@given(a=st.floats(-5, 5), L=st.floats(0.01, 10), N=st.integers(8, 300))
def test_interval_grid_properties(a, L, N):
    g = build_grid(Interval(a, a + L), N)
    assert np.all(np.diff(g.nodes) > 0)
    assert abs(g.weights.sum() - L) <= 10 * np.finfo(float).eps * N * max(L, abs(a) + L)
    signs = list(g.inward_normal_sign.values())
    assert signs[0] == -signs[1]
    h, _, _ = defining_function(g.domain, g.nodes)
    assert np.all(h[1:-1] < 0)
    assert abs(h[0]) < 1e-12 * max(1, abs(a) + L) and abs(h[-1]) < 1e-12 * max(1, abs(a) + L)


@given(R=st.floats(0.1, 5), N=st.integers(8, 200))
def test_ball_defining_function_convex(R, N):
    g = build_grid(RadialBall(2, R), N)
    h, _, _ = defining_function(g.domain, g.nodes)
    d2 = (h[2:] - 2 * h[1:-1] + h[:-2]) / g.h**2
    assert np.all(d2 >= 1 / R - 1e-8 / g.h**2)
    assert np.all(h[:-1] < 0)

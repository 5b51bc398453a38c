import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from caplap.convolution import (ConvolutionParams, WindowTooSmallError, exponent_for,
                                grid_tolerance, inf_convolution, offset_gradient_audit,
                                reflect_even, semiconvexity_audit, sup_convolution)
from caplap.field_ops import GridFunction
from caplap.geometry import Interval, build_grid


LINE = build_grid(Interval(-1.0, 1.0), 200)


@pytest.fixture
def line():
    return LINE


def test_exponent():
    assert exponent_for(3.0) == 2.0 and exponent_for(1.5) == pytest.approx(3.0)
    with pytest.raises(ValueError):
        ConvolutionParams(0.1, 1.5)
    with pytest.raises(ValueError):
        ConvolutionParams(0.0)


def test_constant_is_fixed(line):
    u = GridFunction(line, np.full(201, 0.4))
    prm = ConvolutionParams(0.2)
    assert np.all(sup_convolution(u, prm)[0].values == 0.4)
    assert np.all(inf_convolution(u, prm)[0].values == 0.4)


def test_abs_kink(line):
    u = GridFunction(line, np.abs(line.nodes))
    prm = ConvolutionParams(0.2)
    us, dist = sup_convolution(u, prm)
    ul, _ = inf_convolution(u, prm)
    assert us.values[100] == pytest.approx(0.1, abs=1e-12)
    assert dist[100] == pytest.approx(0.2)
    assert ul.values[100] == pytest.approx(0.0, abs=1e-15)
    assert np.all(ul.values <= u.values) and np.all(u.values <= us.values)


def test_negabs_semiconvexity_is_tight(line):
    u = GridFunction(line, -np.abs(line.nodes))
    prm = ConvolutionParams(0.2)
    us, _ = sup_convolution(u, prm)
    h = line.h
    d2 = (us.values[2:] - 2 * us.values[1:-1] + us.values[:-2]) / h**2
    assert d2.min() == pytest.approx(-1 / 0.2, rel=1e-6)
    assert semiconvexity_audit(us, prm) >= 0


def test_window_too_small(line):
    u = GridFunction(line, np.abs(line.nodes))
    with pytest.raises(WindowTooSmallError):
        sup_convolution(u, ConvolutionParams(0.2, search_window=3))


def test_reflect_even():
    g = build_grid(Interval(0.0, 1.0), 10)
    r = reflect_even(GridFunction(g, g.nodes**2))
    assert r.grid.N == 20 and np.allclose(r.values, r.grid.nodes**2)


def _random_data(seed, line):
    rng = np.random.default_rng(seed)
    x = line.nodes
    return GridFunction(line, sum(rng.normal() * np.cos(k * np.pi * x) / k for k in range(1, 6)))


@settings(max_examples=15)
@given(seed=st.integers(0, 10_000), eps=st.floats(0.05, 0.5), qc=st.sampled_from([2.0, 3.0]))
def test_duality_and_bracketing(seed, eps, qc):
    line = LINE
    u = _random_data(seed, line)
    prm = ConvolutionParams(eps, qc)
    us, _ = sup_convolution(u, prm)
    ul, _ = inf_convolution(u, prm)
    neg, _ = inf_convolution(GridFunction(line, -u.values), prm)
    assert np.allclose(us.values, -neg.values, atol=1e-14)
    assert np.all(ul.values <= u.values) and np.all(u.values <= us.values)


@settings(max_examples=15)
@given(seed=st.integers(0, 10_000), eps=st.floats(0.05, 0.4), qc=st.sampled_from([2.0, 3.0]))
def test_monotone_in_eps(seed, eps, qc):
    line = LINE
    u = _random_data(seed, line)
    a, _ = sup_convolution(u, ConvolutionParams(eps, qc))
    b, _ = sup_convolution(u, ConvolutionParams(eps / 2, qc))
    assert np.all(b.values <= a.values + 1e-14)


@settings(max_examples=15)
@given(seed=st.integers(0, 10_000), eps=st.floats(0.05, 0.4), qc=st.sampled_from([2.0, 3.0]))
def test_semiconvexity_and_offset(seed, eps, qc):
    line = LINE
    u = _random_data(seed, line)
    prm = ConvolutionParams(eps, qc)
    us, _ = sup_convolution(u, prm)
    assert semiconvexity_audit(us, prm) >= 0
    assert grid_tolerance(us, prm) > 0
    assert offset_gradient_audit(u, prm).margin >= 0

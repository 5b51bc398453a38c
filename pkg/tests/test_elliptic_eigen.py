import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from caplap.elliptic_eigen import (boundary_flux_lambda, conormal_lambda_closed_form,
                                   eigen_pair, lambda0, solve_penalized)
from caplap.geometry import Interval, RadialBall, build_grid
from caplap.parabolic import ProblemSpec


def test_zero_data_gives_zero(disk):
    eig = eigen_pair(disk, ProblemSpec(p=3.0, q=1.0, eps=1e-2))
    assert abs(eig.lambda_eps) < 1e-12
    assert np.max(np.abs(eig.omega_eps.values)) < 1e-10


@pytest.mark.parametrize("c", [-2.0, 0.5, 3.0])
def test_penalized_constant_rhs(unit_interval, c):
    u = solve_penalized(unit_interval, ProblemSpec(p=2.5, q=1.0, eps=0.1, phi_rhs=c), 0.1)
    assert np.allclose(u.values, c / 0.1, atol=1e-9)


def test_ball_conormal_p2():
    grid = build_grid(RadialBall(2, 1.0), 128)
    spec = ProblemSpec(p=2.0, q=1.0, eps=1e-3, phi_bdry=2.0)
    assert conormal_lambda_closed_form(grid, spec) == pytest.approx(-4.0)
    eig = eigen_pair(grid, spec)
    assert eig.lambda_eps == pytest.approx(-4.0, rel=1e-2)
    # omega = r^2 up to a constant
    r2 = grid.nodes**2
    dev = eig.omega_eps.values - (r2 - grid.weights @ r2 / grid.volume)
    assert np.max(np.abs(dev)) < 1e-8


def test_interval_conormal_p3():
    grid = build_grid(Interval(-1.0, 1.0), 128)
    spec = ProblemSpec(p=3.0, q=2.0, eps=1e-3, phi_bdry=2.25)
    assert conormal_lambda_closed_form(grid, spec) == pytest.approx(-2.25)
    assert eigen_pair(grid, spec).lambda_eps == pytest.approx(-2.25, rel=1e-2)


def test_closed_form_with_rhs(unit_interval):
    spec = ProblemSpec(p=2.0, q=1.0, eps=0.1, phi_bdry=(0.5, 1.0), phi_rhs=0.25)
    assert conormal_lambda_closed_form(unit_interval, spec) == pytest.approx(-1.75)


def test_closed_form_requires_conormal(unit_interval):
    with pytest.raises(ValueError):
        conormal_lambda_closed_form(unit_interval, ProblemSpec(p=3.0, q=1.0, eps=0.1))


def test_delta_sequence_validation(unit_interval):
    with pytest.raises(ValueError):
        eigen_pair(unit_interval, ProblemSpec(p=2.0, q=1.0, eps=0.1), (1e-2, 1e-1, 1e-3))


@settings(max_examples=6)
@given(phi=st.floats(0.2, 1.5), q=st.sampled_from([0.5, 1.0, 2.0]))
def test_eigen_matches_flux_balance(phi, q):
    grid = build_grid(RadialBall(2, 1.0), 64)
    spec = ProblemSpec(p=3.0, q=q, eps=1e-2, phi_bdry=phi)
    eig = eigen_pair(grid, spec)
    assert eig.lambda_eps == pytest.approx(boundary_flux_lambda(grid, spec), rel=1e-2)
    # delta * u_delta stays bounded along the sweep
    assert max(eig.sup_delta_u_per_delta) < 10 * (abs(eig.lambda_eps) + 1)


def test_annulus_flux_balance(annulus):
    spec = ProblemSpec(p=2.0, q=1.0, eps=1e-2, phi_bdry=(0.5, 1.0))
    # inner circle r=1 carries 0.5, outer r=2 carries 1
    expected = -(2 * math.pi * 0.5 + 4 * math.pi * 1.0) / (3 * math.pi)
    assert boundary_flux_lambda(annulus, spec) == pytest.approx(expected)
    assert eigen_pair(annulus, spec).lambda_eps == pytest.approx(expected, rel=1e-2)


def test_lambda0_extrapolates():
    grid = build_grid(RadialBall(2, 1.0), 64)
    spec = ProblemSpec(p=2.0, q=1.0, eps=1e-2, phi_bdry=2.0)
    res = lambda0(grid, spec, (1e-1, 1e-2))
    assert res.lambda0 == pytest.approx(-4.0, rel=1e-2)

import math

import numpy as np
from numpy.testing import assert_allclose
from pytest import approx, fixture, mark, raises

from analysis import error_stats
from errors import DerivativeOrderTooHigh, SingularSystem, ValidationError
from factors import TailControl
from grid import TWO_PI, make_grid
from polyoracle import (build_cubic_periodic, build_linear, cubic_moment_system, eval_poly,
                        moments_via_trigspline, solve_cyclic_tridiagonal)
from spline import SplineSpec, build_spline
from trigpoly import SampleSet

LONG_TAIL = TailControl(max_terms=2_000_000)


def make_samples(values, indicator=0):
    return SampleSet(make_grid(len(values), indicator), values)


def dense_cyclic(lower, diag, upper):
    N = len(diag)
    A = np.diag(diag) + np.diag(upper[:-1], 1) + np.diag(lower[1:], -1)
    A[0, N - 1] = lower[0]
    A[N - 1, 0] = upper[N - 1]
    return A


@fixture
def random_samples(rng):
    def build(N, indicator=0):
        return make_samples(rng.uniform(-1, 1, N), indicator)
    return build


@mark.parametrize("N", (3, 4, 7, 20))
def test_cyclic_solver_matches_dense(rng, N):
    lower, upper = rng.uniform(-1, 1, N), rng.uniform(-1, 1, N)
    diag = 4.0 + rng.uniform(0, 1, N)
    rhs = rng.uniform(-1, 1, N)
    x = solve_cyclic_tridiagonal(lower, diag, upper, rhs)
    assert_allclose(x, np.linalg.solve(dense_cyclic(lower, diag, upper), rhs), rtol=1e-12, atol=1e-13)


def test_cyclic_solver_scalar_diagonals():
    rhs = np.arange(5.0)
    x = solve_cyclic_tridiagonal(1.0, 4.0, 1.0, rhs)
    assert_allclose(dense_cyclic(np.ones(5), np.full(5, 4.0), np.ones(5)) @ x, rhs, atol=1e-13)


def test_cyclic_solver_errors():
    with raises(ValidationError):
        solve_cyclic_tridiagonal(1.0, 4.0, 1.0, [1.0, 2.0])
    with raises(SingularSystem):
        solve_cyclic_tridiagonal(1.0, 0.0, 1.0, np.ones(5))


def test_linear_oracle_values():
    s = build_linear(make_samples([1.0, 0.0, 0.0]))
    assert eval_poly(s, math.pi / 3) == approx(0.5, abs=1e-15)
    assert eval_poly(s, 0.0) == approx(1.0, abs=1e-15)
    assert eval_poly(s, TWO_PI - math.pi / 3) == approx(0.5, abs=1e-14)
    assert eval_poly(s, 1.0, q=1) == approx(-3 / TWO_PI, rel=1e-14)
    with raises(DerivativeOrderTooHigh):
        eval_poly(s, 1.0, q=2)
    with raises(ValidationError):
        eval_poly(s, 1.0, q=-1)


def test_cubic_oracle_on_constants():
    s = build_cubic_periodic(make_samples(np.full(7, 2.5)))
    assert_allclose(s.moments, 0.0, atol=1e-13)
    t = np.linspace(0, TWO_PI, 50)
    assert_allclose(eval_poly(s, t), 2.5, atol=1e-14)
    assert_allclose(eval_poly(s, t, q=3), 0.0, atol=1e-13)


def test_cubic_moments_solve_the_system(random_samples):
    samples = random_samples(9)
    s = build_cubic_periodic(samples)
    lower, diag, upper, rhs = cubic_moment_system(samples)
    assert_allclose(dense_cyclic(lower, diag, upper) @ s.moments, rhs, atol=1e-10)
    assert_allclose(s.moments, np.linalg.solve(dense_cyclic(lower, diag, upper), rhs), rtol=1e-10, atol=1e-10)


def test_cubic_moments_approximate_second_derivative():
    grid = make_grid(33)
    s = build_cubic_periodic(SampleSet(grid, np.sin(grid.nodes)))
    assert_allclose(s.moments, -np.sin(grid.nodes), atol=1e-2)


@mark.parametrize("I", (0, 1))
def test_cubic_interpolates_and_is_periodic(random_samples, I):
    samples = random_samples(7, I)
    s = build_cubic_periodic(samples)
    assert_allclose(eval_poly(s, samples.grid.nodes), samples.values, atol=1e-13)
    t = np.linspace(0, TWO_PI, 40)
    assert_allclose(eval_poly(s, t + TWO_PI), eval_poly(s, t), atol=1e-12)
    assert_allclose(eval_poly(s, samples.grid.nodes, q=2), s.moments, atol=1e-12)


@mark.parametrize("q, tol", ((0, 1e-9), (1, 1e-6), (2, 1e-6)))
def test_cubic_continuity_across_knots(random_samples, q, tol):
    s = build_cubic_periodic(random_samples(9))
    knots = s.grid.nodes
    eps = 1e-9
    assert_allclose(eval_poly(s, knots - eps, q), eval_poly(s, knots + eps, q), atol=tol)


# The simple ν1 spline of degree 1 is the broken line
@mark.parametrize("N", (5, 9))
@mark.parametrize("I", (0, 1))
def test_broken_line_matches_trig_spline(random_samples, N, I):
    samples = random_samples(N, I)
    s = build_spline(samples, SplineSpec.simple("nu1", 1, I, I))
    assert error_stats(s, build_linear(samples), 1000).sup_err <= 1e-5 * samples.scale


# The simple ν1 spline of degree 3 is the periodic cubic spline
@mark.parametrize("N", (5, 9, 17))
@mark.parametrize("I", (0, 1))
def test_cubic_matches_trig_spline(random_samples, N, I):
    samples = random_samples(N, I)
    s = build_spline(samples, SplineSpec.simple("nu1", 3, I, I))
    assert error_stats(s, build_cubic_periodic(samples), 1000).sup_err <= 1e-8 * samples.scale


@mark.parametrize("N, fn", ((9, lambda t: np.exp(np.sin(t))), (13, lambda t: np.cos(2 * t))))
def test_moments_agree_with_cyclic_solve(N, fn):
    samples = SampleSet.from_function(make_grid(N), fn)
    trig = moments_via_trigspline(samples, LONG_TAIL)
    cyclic = build_cubic_periodic(samples).moments
    assert np.max(np.abs(trig - cyclic)) <= 1e-6 * (1 + np.max(np.abs(cyclic)))


@mark.parametrize("I", (0, 1))
def test_moments_of_unit_vector(I):
    samples = make_samples([1.0, 0.0, 0.0, 0.0, 0.0], I)
    trig = moments_via_trigspline(samples, LONG_TAIL)
    cyclic = build_cubic_periodic(samples).moments
    assert np.max(np.abs(trig - cyclic)) <= 1e-6 * (1 + np.max(np.abs(cyclic)))


def test_moments_of_constants_vanish():
    trig = moments_via_trigspline(make_samples(np.full(7, 4.0)))
    assert_allclose(trig, 0.0, atol=1e-10)

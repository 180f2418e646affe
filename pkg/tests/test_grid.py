import math

import numpy as np
from numpy.testing import assert_allclose
from pytest import approx, mark, raises
from hypothesis import given
from hypothesis.strategies import floats, integers, sampled_from

from errors import EvenN, IndexOutOfRange, NonFinite, TooSmall, ValidationError
from grid import TWO_PI, Indicator, make_grid, wrap_array, wrap_to_period


def test_grid_three_nodes_indicator_zero():
    assert_allclose(make_grid(3, 0).nodes, [0.0, TWO_PI / 3, 2 * TWO_PI / 3], rtol=0, atol=1e-15)


def test_grid_three_nodes_indicator_one():
    assert_allclose(make_grid(3, 1).nodes, [math.pi / 3, math.pi, 5 * math.pi / 3], rtol=0, atol=1e-15)


@mark.parametrize("N", (2, 4, 10))
def test_even_node_count_rejected(N):
    with raises(EvenN):
        make_grid(N, 0)


def test_single_node_rejected():
    with raises(TooSmall):
        make_grid(1, 0)


@mark.parametrize("bad", (2, -1, "x"))
def test_bad_indicator(bad):
    with raises(ValidationError):
        make_grid(5, bad)


def test_non_integer_node_count():
    with raises(ValidationError):
        make_grid(5.5, 0)


@mark.parametrize("N", (3, 5, 9, 17, 101))
@mark.parametrize("indicator", (0, 1))
def test_spacing_and_range(N, indicator):
    grid = make_grid(N, indicator)
    nodes = grid.nodes
    assert_allclose(np.diff(nodes), TWO_PI / N, rtol=0, atol=1e-14)
    assert nodes[0] == (math.pi / N if indicator else 0.0)
    assert nodes[-1] < TWO_PI
    assert grid.n == (N - 1) // 2


@mark.parametrize("N", (3, 9, 17))
def test_shifted_grid_is_half_step_translate(N):
    zero, one = make_grid(N, 0), make_grid(N, 1)
    assert_allclose(one.nodes, wrap_array(zero.nodes + math.pi / N), rtol=0, atol=1e-14)
    assert zero.shifted() == one
    assert one.indicator is Indicator.ONE


def test_node_is_one_based():
    grid = make_grid(5, 1)
    assert grid.node(1) == grid.nodes[0]
    assert grid.node(5) == grid.nodes[4]
    for bad in (0, 6):
        with raises(IndexOutOfRange):
            grid.node(bad)


@mark.parametrize("t, expected", ((TWO_PI, 0.0),
                                  (-math.pi / 3, 5 * math.pi / 3),
                                  (7 * math.pi / 2, 3 * math.pi / 2),
                                  (0.0, 0.0)))
def test_wrap_examples(t, expected):
    assert wrap_to_period(t) == approx(expected, abs=1e-14)


@mark.parametrize("bad", (math.nan, math.inf, -math.inf))
def test_wrap_rejects_non_finite(bad):
    with raises(NonFinite):
        wrap_to_period(bad)
    with raises(NonFinite):
        wrap_array(np.array([0.0, bad]))


def test_wrap_tiny_negative_stays_in_range():
    assert 0.0 <= wrap_to_period(-1e-20) < TWO_PI


@given(floats(min_value=-1e6, max_value=1e6))
def test_wrap_is_congruent_and_in_range(t):
    w = wrap_to_period(t)
    assert 0.0 <= w < TWO_PI
    turns = (t - w) / TWO_PI
    assert abs(turns - round(turns)) < 1e-9


@given(integers(min_value=1, max_value=200), sampled_from((0, 1)))
def test_node_formula(n, indicator):
    N = 2 * n + 1
    grid = make_grid(N, indicator)
    i = N // 2 + 1
    assert grid.node(i) == TWO_PI * (i - 1) / N + indicator * math.pi / N

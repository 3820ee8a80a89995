import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from deeponet_rates import DomainError, InputError
from deeponet_rates.grids import (
    Grid1D,
    Grid2D,
    PiecewiseFunction,
    antiderivative,
    interpolate,
    sample_input,
)
from deeponet_rates.harness import fit_slope


def test_zero_function_samples_to_zeros():
    g = Grid1D.uniform(0.0, 2.0, 7)
    f = sample_input(lambda x: 0.0 * x, g)
    np.testing.assert_array_equal(f.values, np.zeros(8))


def test_sin_at_three_nodes():
    g = Grid1D(np.array([-np.pi, 0.0, np.pi]))
    f = sample_input(np.sin, g)
    np.testing.assert_allclose(f.values, 0.0, atol=1e-15)


def test_square_on_five_nodes():
    g = Grid1D.uniform(0.0, 1.0, 4)
    f = sample_input(lambda x: x**2, g)
    np.testing.assert_allclose(f.values, [0, 1 / 16, 1 / 4, 9 / 16, 1], rtol=0, atol=1e-15)


def test_non_finite_sample_rejected():
    g = Grid1D.uniform(0.0, 1.0, 4)
    with pytest.raises(InputError, match="node 2"):
        sample_input(lambda x: np.where(x == 0.5, np.nan, x), g)


@pytest.mark.parametrize("nodes", [[0.0], [0.0, 0.0, 1.0], [1.0, 0.5], [0.0, np.inf]])
def test_bad_nodes_rejected(nodes):
    with pytest.raises(InputError):
        Grid1D(np.array(nodes))


def test_mesh_ratio_cap():
    with pytest.raises(InputError, match="mesh ratio"):
        Grid1D(np.array([0.0, 1e-3, 1.0]))


def test_periodic_grid_counts_and_reduction():
    g = Grid1D.uniform(-np.pi, np.pi, 8, periodic=True)
    assert g.n_values == 8 and g.cells == 8
    np.testing.assert_allclose(g.reduce(np.pi), -np.pi)
    np.testing.assert_allclose(g.reduce(3 * np.pi + 0.1), -np.pi + 0.1)


def test_nonperiodic_point_outside_span():
    g = Grid1D.uniform(0.0, 1.0, 4)
    with pytest.raises(DomainError):
        interpolate(sample_input(np.cos, g), 1.5)


def test_order_zero_uses_left_node():
    g = Grid1D.uniform(0.0, 1.0, 4)
    f = PiecewiseFunction(g, np.arange(5.0), order=0)
    np.testing.assert_array_equal(f(np.array([0.0, 0.24, 0.25, 0.99, 1.0])), [0, 0, 1, 3, 3])


def test_order_one_reproduces_affine():
    g = Grid1D(np.array([0.0, 0.3, 0.35, 0.9, 1.0]))
    f = sample_input(lambda x: 3 * x - 2, g)
    x = np.linspace(0, 1, 101)
    np.testing.assert_allclose(f(x), 3 * x - 2, rtol=1e-13, atol=1e-13)


@pytest.mark.parametrize("order,expected", [(0, 1.0), (1, 2.0)])
def test_interpolation_error_slope(order, expected):
    pairs = []
    x = np.linspace(0.0, 1.0, 5001)
    for m in (16, 32, 64, 128, 256):
        g = Grid1D.uniform(0.0, 1.0, m)
        f = sample_input(np.exp, g, order=order)
        pairs.append((g.h, np.max(np.abs(f(x) - np.exp(x)))))
    slope, _ = fit_slope(pairs)
    assert abs(slope - expected) < 0.1


def test_grid2d_bilinear_reproduces_bilinear():
    g = Grid2D.uniform(0.0, 1.0, 5)
    f = sample_input(lambda x, y: 1 + 2 * x - y + 0.5 * x * y, g)
    xs, ys = np.meshgrid(np.linspace(0, 1, 13), np.linspace(0, 1, 11))
    np.testing.assert_allclose(f(xs, ys), 1 + 2 * xs - ys + 0.5 * xs * ys, atol=1e-13)


def test_grid2d_ordering_is_x_major():
    g = Grid2D.uniform(0.0, 1.0, 2)
    pts = g.points()
    np.testing.assert_array_equal(pts[:3, 0], 0.0)
    np.testing.assert_array_equal(pts[:3, 1], [0.0, 0.5, 1.0])


def test_antiderivative_of_linear_function():
    g = Grid1D.uniform(0.0, 2.0, 5)
    f = sample_input(lambda x: x, g)
    x = np.array([0.0, 0.3, 1.7, 2.0])
    np.testing.assert_allclose(antiderivative(f, x), x**2 / 2, atol=1e-14)


def test_antiderivative_periodic_counts_whole_periods():
    g = Grid1D.uniform(0.0, 1.0, 4, periodic=True)
    f = PiecewiseFunction(g, np.ones(4))
    np.testing.assert_allclose(antiderivative(f, 2.25), 2.25)


@given(st.lists(st.floats(-10, 10), min_size=3, max_size=12))
def test_interpolation_exact_at_nodes(vals):
    g = Grid1D.uniform(-1.0, 2.0, len(vals) - 1)
    f1 = PiecewiseFunction(g, np.array(vals), order=1)
    np.testing.assert_allclose(f1(g.nodes), vals, rtol=0, atol=1e-12)
    # the last cell is closed, so order 0 matches every node but the right end
    f0 = PiecewiseFunction(g, np.array(vals), order=0)
    np.testing.assert_array_equal(f0(g.nodes[:-1]), vals[:-1])


@given(st.floats(-5, 5), st.integers(1, 20), st.integers(0, 1))
def test_constants_reproduced(c, cells, order):
    g = Grid1D.uniform(0.0, 1.0, cells, periodic=True)
    f = PiecewiseFunction(g, np.full(g.n_values, c), order=order)
    out = f(np.linspace(-3, 3, 37))
    if order == 0:
        np.testing.assert_array_equal(out, c)
    else:
        np.testing.assert_allclose(out, c, rtol=1e-13, atol=1e-13)


@given(st.floats(-20, 20))
def test_periodic_reduction_is_periodic(x):
    g = Grid1D.uniform(-np.pi, np.pi, 16, periodic=True)
    f = sample_input(np.sin, g)
    assert abs(f(x) - f(x + 2 * np.pi)) < 1e-12
    r = g.reduce(x)
    assert -np.pi <= r < np.pi

"""Constructive ReLU gadgets: sawtooth square, product, Newton reciprocal,
nodal hat functions and exact linear functionals."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .._errors import InputError, ParameterError
from ..grids import Grid1D
from .builder import affine, chain, identity, parallel, select, stack
from .network import ReluNetwork

NEWTON_STEPS = 5


def square_error_bound(k):
    """Sup error of :func:`square_gadget` on ``[0, 1]``."""
    return 2.0 ** (-2 * k - 2)


def product_error_bound(k, x_bound=1.0, y_bound=1.0):
    """Sup error of :func:`product_gadget` on the box ``|x| <= X, |y| <= Y``."""
    return x_bound * y_bound * 2.0 * square_error_bound(k)


def square_gadget(k) -> ReluNetwork:
    """Piecewise-linear interpolant of ``x^2`` at ``2^k + 1`` dyadic points.

    ``f_k(x) = x - sum_{s<=k} g_s(x) / 4^s`` with ``g_s`` the ``s``-fold
    composed tent map.  Each hidden layer carries ``relu(g)``,
    ``relu(g - 1/2)`` and the running value, so the net has depth ``k`` and
    width 3.  Valid on ``[0, 1]``.
    """
    if int(k) < 1:
        raise ParameterError("k must be >= 1")
    k = int(k)
    layers = [(np.array([[1.0], [1.0], [1.0]]), np.array([0.0, -0.5, 0.0]))]
    for s in range(1, k):
        c = 4.0 ** (-s)
        # g_s = 2 a - 4 b, y_s = carry - g_s / 4^s
        W = np.array([[2.0, -4.0, 0.0],
                      [2.0, -4.0, 0.0],
                      [-2.0 * c, 4.0 * c, 1.0]])
        layers.append((W, np.array([0.0, -0.5, 0.0])))
    c = 4.0 ** (-k)
    layers.append((np.array([[-2.0 * c, 4.0 * c, 1.0]]), np.zeros(1)))
    return ReluNetwork(layers)


def _abs_halves():
    """``(x, y) -> (|x + y| / 2, |x - y| / 2)``."""
    W1 = np.array([[1.0, 1.0], [-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]])
    W2 = 0.5 * np.array([[1.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 1.0]])
    return ReluNetwork([(W1, np.zeros(4)), (W2, np.zeros(2))])


def product_gadget(k, x_bound=1.0, y_bound=1.0) -> ReluNetwork:
    """``xy`` for ``|x| <= x_bound``, ``|y| <= y_bound`` via
    ``xy = S(|x + y| / 2) - S(|x - y| / 2)`` on rescaled inputs."""
    sq = square_gadget(k)
    scale_in = affine(np.diag([1.0 / x_bound, 1.0 / y_bound]))
    out = affine(np.array([[x_bound * y_bound, -x_bound * y_bound]]))
    return chain(scale_in, _abs_halves(), stack(sq, sq), out)


def reciprocal_error_bound(k, z_bound=0.5, steps=NEWTON_STEPS):
    """Newton truncation plus accumulated product noise for
    :func:`reciprocal_gadget` (both products use the box ``[-2, 2]^2``)."""
    e = product_error_bound(k, 2.0, 2.0)
    return z_bound ** (2**steps) / (1 - z_bound) + 6.0 * e


def _newton_step(k):
    """``(q, t) -> (q, t (2 - q t))`` for ``q, t >= 0``."""
    P = product_gadget(k, 2.0, 2.0)
    first = parallel(select(2, 0), select(2, 1), P)  # (q, t, w)
    flip = affine(np.diag([1.0, 1.0, -1.0]), np.array([0.0, 0.0, 2.0]))  # (q, t, 2 - w)
    return chain(first, flip, stack(identity(1), P))


def reciprocal_gadget(k, z_bound=0.5, steps=NEWTON_STEPS) -> ReluNetwork:
    """``1 / (1 + z)`` for ``|z| <= z_bound <= 1/2`` by ``steps`` unrolled
    Newton iterations ``t <- t (2 - (1 + z) t)`` from ``t = 1``."""
    if not 0 < z_bound <= 0.5:
        raise ParameterError("reciprocal gadget needs 0 < z_bound <= 1/2")
    start = affine(np.array([[1.0], [0.0]]), np.array([1.0, 1.0]))  # (1 + z, 1)
    nets = [start] + [_newton_step(k) for _ in range(steps)] + [select(2, 1)]
    return chain(*nets)


@dataclass(frozen=True)
class BoxedNetwork:
    """A network together with the input box it is validated on."""

    net: ReluNetwork
    lower: np.ndarray
    upper: np.ndarray

    def __call__(self, x):
        x = np.asarray(x, float)
        pts = np.atleast_2d(x)
        bad = np.any((pts < self.lower - 1e-12) | (pts > self.upper + 1e-12), axis=1)
        if np.any(bad):
            raise InputError(f"input {pts[np.flatnonzero(bad)[0]]} outside the validated box")
        return self.net(x)


def hat_trunk(grid: Grid1D, i) -> ReluNetwork:
    """Exact nodal basis function ``L_i`` on the grid span, width 3, depth 1.

    Periodic grids wrap node 0 around the seam.
    """
    x = grid.nodes
    m = grid.cells
    if not 0 <= i < grid.n_values:
        raise InputError(f"node index {i} out of range")
    h = np.diff(x)
    if 0 < i < m:
        knots = [x[i - 1], x[i], x[i + 1]]
        out = [1 / h[i - 1], -(1 / h[i - 1] + 1 / h[i]), 1 / h[i]]
        bias = 0.0
    elif i == 0 and grid.periodic:
        knots = [x[0], x[1], x[m - 1]]
        out = [-1 / h[0], 1 / h[0], 1 / h[m - 1]]
        bias = 1.0
    elif i == 0:
        knots = [x[0], x[1]]
        out = [-1 / h[0], 1 / h[0]]
        bias = 1.0
    else:
        knots = [x[m - 1], x[m]]
        out = [1 / h[m - 1], -1 / h[m - 1]]
        bias = 0.0
    n = len(knots)
    W1 = np.ones((n, 1))
    b1 = -np.asarray(knots)
    return ReluNetwork([(W1, b1), (np.array([out]), np.array([bias]))])


def linear_branch_net(coefficients) -> ReluNetwork:
    """``relu(c . u) - relu(-c . u)``: width 2, depth 1, exact."""
    c = np.asarray(coefficients, float).ravel()
    if not np.all(np.isfinite(c)):
        raise InputError("coefficients must be finite")
    W1 = np.vstack([c, -c])
    return ReluNetwork([(W1, np.zeros(2)), (np.array([[1.0, -1.0]]), np.zeros(1))])

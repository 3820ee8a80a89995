"""Periodic 2D Burgers system via the Cole-Hopf potential.

For curl-free data ``(u0, v0) = grad Phi`` the substitution
``(u, v) = -2 kappa grad(phi) / phi`` with ``phi0 = exp(-Phi / 2kappa)``
reduces the system to the 2D heat equation.  The 2D periodized kernel is a
product of 1D kernels, so every kernel integral factorizes over the axes.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from ._errors import InputError, NumericalError, ParameterError
from .burgers import KAPPA_MIN, _check_time, hat_kernel_weights, heat_kernel_periodized
from .grids import Grid2D
from .norms import composite_gauss, gauss_legendre

CONSISTENCY_TOL = 1e-8
PERIOD = 2 * np.pi


@dataclass(frozen=True, eq=False)
class BurgersProblem2D:
    """Viscosity and curl-free periodic initial velocity ``(u0, v0)``."""

    kappa: float
    u0: Callable
    v0: Callable

    def __post_init__(self):
        if not self.kappa >= KAPPA_MIN:
            raise ParameterError(f"kappa must be >= {KAPPA_MIN}")

    def phi0(self, X, Y):
        """Exact ``phi0`` on a tensor product of sorted coordinate vectors,
        scaled by a constant (which cancels in every ratio)."""
        Phi = line_potential(self.u0, self.v0, X, Y)
        return np.exp(-(Phi - Phi.min()) / (2 * self.kappa))


def _edge_integral(f, fixed, a, b, along_x, order=16):
    t, w = gauss_legendre(order)
    s = 0.5 * (a + b)[..., None] + 0.5 * (b - a)[..., None] * t
    c = np.broadcast_to(np.asarray(fixed, float)[..., None], s.shape)
    vals = f(s, c) if along_x else f(c, s)
    return np.sum(0.5 * (b - a)[..., None] * w * vals, axis=-1)


def check_consistency(u0, v0, grid: Grid2D, tol=CONSISTENCY_TOL):
    """Verify ``d_y u0 = d_x v0`` through cell circulations on ``grid``.

    The circulation of ``(u0, v0)`` around each cell, divided by its area,
    is the cell mean of ``d_x v0 - d_y u0``.  Also checks that ``u0`` and
    ``v0`` have zero mean along the seam lines, so the potential is periodic.
    Returns the largest residual.
    """
    xn, yn = grid.x_nodes.nodes, grid.y_nodes.nodes
    xa, ya = np.meshgrid(xn[:-1], yn[:-1], indexing="ij")
    xb, yb = np.meshgrid(xn[1:], yn[1:], indexing="ij")
    bottom = _edge_integral(u0, ya, xa, xb, True)
    top = _edge_integral(u0, yb, xa, xb, True)
    left = _edge_integral(v0, xa, ya, yb, False)
    right = _edge_integral(v0, xb, ya, yb, False)
    area = (xb - xa) * (yb - ya)
    resid = np.abs(bottom + right - top - left) / area
    k = np.unravel_index(np.argmax(resid), resid.shape)
    worst = float(resid[k])
    if not np.isfinite(worst) or worst > tol:
        cx = 0.5 * (xa[k] + xb[k])
        cy = 0.5 * (ya[k] + yb[k])
        raise InputError(
            f"u0, v0 violate d_y u0 = d_x v0: residual {worst:.3e} in the cell at ({cx:.4g}, {cy:.4g})"
        )
    # composite over the grid cells so data with kinks at the nodes integrates exactly
    mean_u = np.sum(_edge_integral(u0, yn[0], xn[:-1], xn[1:], True)) / PERIOD
    mean_v = np.sum(_edge_integral(v0, xn[0], yn[:-1], yn[1:], False)) / PERIOD
    if max(abs(mean_u), abs(mean_v)) > tol:
        raise InputError("u0 and v0 must have zero mean along the seam lines")
    return worst


def line_potential(u0, v0, X, Y):
    """``Phi(x, y) = int_{-pi}^x u0(s, -pi) ds + int_{-pi}^y v0(x, s) ds``
    on the tensor product of sorted vectors ``X`` and ``Y``.

    Each gap between consecutive coordinates gets an 8-point Gauss rule.
    """
    X = np.asarray(X, float)
    Y = np.asarray(Y, float)
    start = -np.pi
    xa = np.concatenate([[start], X[:-1]])
    base = np.cumsum(_edge_integral(u0, np.full(X.shape, start), xa, X, True, 8))
    ya = np.broadcast_to(np.concatenate([[start], Y[:-1]]), (X.size, Y.size))
    yb = np.broadcast_to(Y, (X.size, Y.size))
    fixed = np.broadcast_to(X[:, None], yb.shape)
    cols = np.cumsum(_edge_integral(v0, fixed, ya, yb, False, 8), axis=1)
    return base[:, None] + cols


def nodal_potential(u_nodes, v_nodes, grid: Grid2D):
    """Trapezoidal potential from nodal samples only (the branch input).

    ``u_nodes``, ``v_nodes`` have shape ``(n, n)`` in x-major order.
    """
    hx = grid.x_nodes.steps[: grid.n_side - 1]
    hy = grid.y_nodes.steps[: grid.n_side - 1]
    base = np.concatenate([[0.0], np.cumsum(0.5 * hx * (u_nodes[1:, 0] + u_nodes[:-1, 0]))])
    cols = np.concatenate(
        [np.zeros((grid.n_side, 1)), np.cumsum(0.5 * hy * (v_nodes[:, 1:] + v_nodes[:, :-1]), axis=1)],
        axis=1,
    )
    return base[:, None] + cols


class Burgers2DResult(NamedTuple):
    u: np.ndarray
    v: np.ndarray


def rational_operator_2d(problem: BurgersProblem2D, m_side, x, y, t, check=True):
    """Finite-dimensional operator on ``m_side**2`` nodes, on the lattice ``x`` by ``y``.

    Denominator: piecewise-constant (lower-left corner) ``phi0``; numerators:
    bilinear ``phi0``.  Both reduce to matrix products of 1D kernel weights.
    """
    kappa = problem.kappa
    _check_time(t, kappa)
    grid = Grid2D.uniform(-np.pi, np.pi, m_side, periodic=True)
    if check:
        check_consistency(problem.u0, problem.v0, grid)
    pts = grid.points()
    U = np.asarray(problem.u0(pts[:, 0], pts[:, 1]), float).reshape(m_side, m_side)
    V = np.asarray(problem.v0(pts[:, 0], pts[:, 1]), float).reshape(m_side, m_side)
    Phi = nodal_potential(U, V, grid)
    phi = np.exp(-(Phi - Phi.min()) / (2 * kappa))
    kx, dx, cx = hat_kernel_weights(grid.x_nodes, np.atleast_1d(x), t, kappa)
    ky, dy, cy = hat_kernel_weights(grid.y_nodes, np.atleast_1d(y), t, kappa)
    den = cx @ phi @ cy.T
    if np.any(den <= 0):
        raise NumericalError("2D rational denominator is not positive")
    u = -2 * kappa * (dx @ phi @ ky.T) / den
    v = -2 * kappa * (kx @ phi @ dy.T) / den
    return Burgers2DResult(u, v)


def cole_hopf_exact_2d(problem: BurgersProblem2D, x, y, t, quad_cells=64, order=16):
    """Reference solution from the exact ``phi0`` by tensor Gauss-Legendre."""
    kappa = problem.kappa
    _check_time(t, kappa)
    edges = np.linspace(-np.pi, np.pi, quad_cells + 1)
    q, w = composite_gauss(edges, order)
    q, w = q.ravel(), w.ravel()
    phi = problem.phi0(q, q)
    x = np.atleast_1d(np.asarray(x, float))
    y = np.atleast_1d(np.asarray(y, float))
    Kx = heat_kernel_periodized(x[:, None], q, t, kappa, 0) * w
    Dx = heat_kernel_periodized(x[:, None], q, t, kappa, 1) * w
    Ky = heat_kernel_periodized(y[:, None], q, t, kappa, 0) * w
    Dy = heat_kernel_periodized(y[:, None], q, t, kappa, 1) * w
    den = Kx @ phi @ Ky.T
    if np.any(den <= 0):
        raise NumericalError("2D Cole-Hopf denominator is not positive")
    return Burgers2DResult(-2 * kappa * (Dx @ phi @ Ky.T) / den, -2 * kappa * (Kx @ phi @ Dy.T) / den)


def cole_hopf_spectral_2d(problem: BurgersProblem2D, x, y, t, n_modes=256):
    """Independent oracle: potential and heat flow both in Fourier space."""
    kappa = problem.kappa
    _check_time(t, kappa)
    s = -np.pi + PERIOD * np.arange(n_modes) / n_modes
    S1, S2 = np.meshgrid(s, s, indexing="ij")
    uh = np.fft.fft2(problem.u0(S1, S2))
    vh = np.fft.fft2(problem.v0(S1, S2))
    k = np.fft.fftfreq(n_modes, d=1.0 / n_modes)
    KX, KY = np.meshgrid(k, k, indexing="ij")
    k2 = KX**2 + KY**2
    k2[0, 0] = 1.0
    Ph = (KX * uh + KY * vh) / (1j * k2)
    Ph[0, 0] = 0.0
    Phi = np.fft.ifft2(Ph).real
    phi = np.exp(-(Phi - Phi.min()) / (2 * kappa))
    ph = np.fft.fft2(phi) / n_modes**2 * np.exp(-kappa * (KX**2 + KY**2) * t)
    x = np.atleast_1d(np.asarray(x, float))
    y = np.atleast_1d(np.asarray(y, float))
    ex = np.exp(1j * np.outer(x + np.pi, k))
    ey = np.exp(1j * np.outer(y + np.pi, k))
    val = (ex @ ph @ ey.T).real
    px = (ex @ (1j * KX * ph) @ ey.T).real
    py = (ex @ (1j * KY * ph) @ ey.T).real
    return Burgers2DResult(-2 * kappa * px / val, -2 * kappa * py / val)


def burgers_2d_operators(problem: BurgersProblem2D, x, y, t, m_side, quad_cells=64):
    """Exact and rational solutions on the lattice ``x`` by ``y``.

    Returns ``(exact, rational)``, each a :class:`Burgers2DResult`.
    """
    return (cole_hopf_exact_2d(problem, x, y, t, quad_cells),
            rational_operator_2d(problem, m_side, x, y, t))

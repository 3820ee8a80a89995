"""Steady 1D advection-diffusion ``-u'' + a u' = f`` on ``(0, L)``, ``u(0) = u(L) = 0``.

With ``A = exp(-int_0^x a)`` the equation reads ``-(A u')' = A f`` and

    u = -(A_- o A_+)(f)(x) + A_-(1)(x) / A_-(1)(L) * (A_- o A_+)(f)(L),

where ``A_+ g = int_0^x A g`` and ``A_- g = int_0^x A^{-1} g``.  The discrete
operator replaces every integrand by its left-endpoint piecewise-constant
interpolant, which makes it a rational function of ``v_i = exp(a_i h_i)``.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy.special import exprel

from ._errors import InputError, ParameterError
from .grids import Grid1D, PiecewiseFunction
from .norms import gauss_legendre

MAX_ML = 10.0
GAUSS_ORDER = 32


@dataclass(frozen=True, eq=False)
class AdvDiffProblem1D:
    """Piecewise-constant advection speed and a forcing on ``[0, L]``.

    Parameters
    ----------
    grid : Grid1D
        Non-periodic grid on ``[0, L]``.
    a_cells : array-like
        Value of ``a`` on each cell ``[x_j, x_{j+1})``.
    f : callable or PiecewiseFunction
        Forcing term.
    M0 : float, optional
        Declared bound on ``|a|``; defaults to ``max |a_j|``.
    """

    grid: Grid1D
    a_cells: np.ndarray
    f: Union[Callable, PiecewiseFunction]
    M0: float = None

    def __post_init__(self):
        g = self.grid
        if g.periodic or abs(g.start) > 0:
            raise InputError("advection-diffusion grids are non-periodic and start at 0")
        a = np.asarray(self.a_cells, float).ravel()
        if a.size != g.cells:
            raise InputError(f"expected {g.cells} cell values of a, got {a.size}")
        if not np.all(np.isfinite(a)):
            raise InputError("a must be finite")
        M0 = float(np.max(np.abs(a))) if self.M0 is None else float(self.M0)
        if np.max(np.abs(a)) > M0 * (1 + 1e-12):
            raise InputError("a violates its declared bound M0")
        if M0 * g.stop > MAX_ML:
            raise ParameterError(f"M0 * L = {M0 * g.stop:.3g} exceeds {MAX_ML}")
        a.setflags(write=False)
        object.__setattr__(self, "a_cells", a)
        object.__setattr__(self, "M0", M0)

    @classmethod
    def uniform(cls, L, m, a, f, **kw):
        """``a`` and ``f`` may be constants or callables (``a`` is sampled at
        cell left endpoints)."""
        grid = Grid1D.uniform(0.0, L, m)
        if callable(a):
            a_cells = np.asarray(a(grid.nodes[:-1]), float)
        else:
            a_cells = np.full(m, float(a))
        if not callable(f):
            c = float(f)
            f = lambda x: np.full(np.shape(x), c)
        return cls(grid, a_cells, f, **kw)

    @property
    def L(self) -> float:
        return self.grid.stop

    @property
    def a(self) -> PiecewiseFunction:
        return PiecewiseFunction(self.grid, np.append(self.a_cells, self.a_cells[-1]), 0)

    def integrating_factor(self):
        return IntegratingFactor.from_problem(self)


@dataclass(frozen=True, eq=False)
class IntegratingFactor:
    """Nodal ``A`` and ``A^{-1}`` plus the cell rates ``v_i = exp(a_i h_i)``."""

    A: np.ndarray
    A_inv: np.ndarray
    v: np.ndarray

    @classmethod
    def from_problem(cls, problem: AdvDiffProblem1D):
        v = np.exp(problem.a_cells * problem.grid.steps)
        A_inv = np.concatenate([[1.0], np.cumprod(v)])
        return cls(1.0 / A_inv, A_inv, v)


def _eval_f(f, x):
    out = np.asarray(f(x), float)
    return np.broadcast_to(out, np.shape(x))


def _locate(problem, x):
    g = problem.grid
    j, xr = g.locate(x)
    return j, xr - g.nodes[j]


class _ExactPieces:
    """Cumulative node values of ``alpha = int a``, ``Q = A_-(1)``,
    ``g = A_+(f)`` and ``R = int Q A f`` plus partial-cell evaluators."""

    def __init__(self, problem):
        self.p = problem
        g = problem.grid
        a, h = problem.a_cells, g.steps
        self.alpha = np.concatenate([[0.0], np.cumsum(a * h)])
        self.Q = np.concatenate([[0.0], np.cumsum(np.exp(self.alpha[:-1]) * h * exprel(a * h))])
        gi, ri = self._partial(np.arange(g.cells), h)
        self.G = np.concatenate([[0.0], np.cumsum(gi)])
        self.R = np.concatenate([[0.0], np.cumsum(ri)])

    def Q_at(self, j, s):
        return self.Q[j] + np.exp(self.alpha[j]) * s * exprel(self.p.a_cells[j] * s)

    def _partial(self, j, s):
        """``int_{x_j}^{x_j + s}`` of ``A f`` and ``Q A f`` by Gauss-Legendre."""
        t, w = gauss_legendre(GAUSS_ORDER)
        j = np.asarray(j)
        s = np.asarray(s, float)
        sy = 0.5 * s[..., None] * (t + 1.0)
        y = self.p.grid.nodes[j][..., None] + sy
        aj = self.p.a_cells[j][..., None]
        A = np.exp(-self.alpha[j][..., None] - aj * sy)
        fy = _eval_f(self.p.f, y)
        Q = self.Q[j][..., None] + np.exp(self.alpha[j][..., None]) * sy * exprel(aj * sy)
        ws = 0.5 * s[..., None] * w
        return np.sum(ws * A * fy, axis=-1), np.sum(ws * Q * A * fy, axis=-1)

    def P_at(self, j, s):
        gi, ri = self._partial(j, s)
        return self.Q_at(j, s) * (self.G[j] + gi) - (self.R[j] + ri)


def exact_solution(problem: AdvDiffProblem1D, x):
    """Exact solution for piecewise-constant ``a``.

    ``int A^{+-1}`` is exact per cell (``exprel``); integrals involving ``f``
    use 32-point Gauss-Legendre per cell.
    """
    x = np.asarray(x, float)
    j, s = _locate(problem, x)
    ex = _ExactPieces(problem)
    m = problem.grid.cells
    QL, PL = ex.Q[-1], ex.Q[-1] * ex.G[-1] - ex.R[-1]
    u = -ex.P_at(j, s) + ex.Q_at(j, s) / QL * PL
    # exact boundary values
    u = np.where(x <= problem.grid.start, 0.0, u)
    u = np.where(x >= problem.L, 0.0, u)
    return u if u.ndim else float(u)


def discrete_pieces(problem: AdvDiffProblem1D):
    """Nodal sums of the discrete operators.

    Returns ``(A, A_inv, fj, g, Q, P)`` with ``g = A_+^N(f)``,
    ``Q = A_-^N(1)`` and ``P = (A_-^N o A_+^N)(f)`` at every node.
    """
    fac = IntegratingFactor.from_problem(problem)
    h = problem.grid.steps
    fj = _eval_f(problem.f, problem.grid.nodes)
    g = np.concatenate([[0.0], np.cumsum(fac.A[:-1] * fj[:-1] * h)])
    Q = np.concatenate([[0.0], np.cumsum(fac.A_inv[:-1] * h)])
    P = np.concatenate([[0.0], np.cumsum(fac.A_inv[:-1] * g[:-1] * h)])
    return fac.A, fac.A_inv, fj, g, Q, P


def discrete_operator(problem: AdvDiffProblem1D, x):
    """The finite-dimensional operator ``G_m^f(a_m; x)``."""
    x = np.asarray(x, float)
    j, s = _locate(problem, x)
    _, A_inv, _, g, Q, P = discrete_pieces(problem)
    Qx = Q[j] + A_inv[j] * s
    Px = P[j] + A_inv[j] * g[j] * s
    u = -Px + Qx / Q[-1] * P[-1]
    u = np.where((x <= problem.grid.start) | (x >= problem.L), 0.0, u)
    return u if u.ndim else float(u)


def monotone_weight(problem: AdvDiffProblem1D, x):
    """``A_-^N(1)(x) / A_-^N(1)(L)``, increasing from 0 to 1."""
    j, s = _locate(problem, np.asarray(x, float))
    _, A_inv, _, _, Q, _ = discrete_pieces(problem)
    return (Q[j] + A_inv[j] * s) / Q[-1]


def _poly_mul(p, q, tol):
    out = defaultdict(float)
    for mp, cp in p.items():
        for mq, cq in q.items():
            out[tuple(a + b for a, b in zip(mp, mq))] += cp * cq
    return {k: c for k, c in out.items() if abs(c) > tol}


def rational_form_stats(problem: AdvDiffProblem1D, J):
    """Shape of the numerator of the rational form in ``v_1..v_m``.

    The numerator is ``A_-(1)(x_J) P(x_m) - A_-(1)(x_m) P(x_J)`` with the
    node representation ``A^{-1}(x_j) = prod_{k<=j} v_k`` and
    ``P(x_J) = sum_{i=1}^J sum_{j=0}^{i} h_i h_j f_j prod_{k=j+1}^{i} v_k``
    (``h_0 := h_1``).  Coefficients are merged within each product; the two
    products are counted as a formal difference, so a monomial present in
    both counts once.

    Returns ``(degree, variable_count, term_count)``.
    """
    m = problem.grid.cells
    if not 0 <= J <= m:
        raise InputError(f"node index J must lie in [0, {m}]")
    h = np.concatenate([[problem.grid.steps[0]], problem.grid.steps])
    f = _eval_f(problem.f, problem.grid.nodes)

    def mono(lo, hi):
        e = [0] * m
        for k in range(lo, hi + 1):
            e[k - 1] = 1
        return tuple(e)

    def Q_poly(n):
        out = defaultdict(float)
        for j in range(1, n + 1):
            out[mono(1, j)] += h[j]
        return dict(out)

    def P_poly(n):
        out = defaultdict(float)
        for i in range(1, n + 1):
            for j in range(0, i + 1):
                out[mono(j + 1, i)] += h[i] * h[j] * f[j]
        return dict(out)

    scale = float(np.max(np.abs(f))) * np.max(h) ** 3 if np.any(f) else 1.0
    tol = 1e-14 * scale
    first = _poly_mul(Q_poly(J), P_poly(m), tol)
    second = _poly_mul(Q_poly(m), P_poly(J), tol)
    support = set(first) | set(second)
    if not support:
        return 0, 0, 0
    degree = max(sum(e) for e in support)
    variables = int(np.count_nonzero(np.any(np.array(list(support)), axis=0)))
    return degree, variables, len(support)


def denominator_terms(problem: AdvDiffProblem1D, J):
    """Number of monomials of ``A_-(1)(x_J) = sum_{j=1}^J h_j prod_{k<=j} v_k``."""
    if not 0 <= J <= problem.grid.cells:
        raise InputError("node index out of range")
    return int(np.count_nonzero(problem.grid.steps[:J]))


def divergence_form(grid: Grid1D, a_nodes, f):
    """Rewrite ``-(a u')' = f`` as ``-u'' + b u' = f / a``.

    ``a`` is sampled at the nodes and taken log-linear per cell, so
    ``b = -(ln a)'`` is piecewise constant and exact for that interpolant.
    """
    a_nodes = np.asarray(a_nodes, float)
    if a_nodes.size != grid.nodes.size:
        raise InputError("one coefficient value per node is required")
    if np.any(a_nodes <= 0):
        raise InputError("the diffusion coefficient must be positive")
    la = np.log(a_nodes)
    b = -np.diff(la) / grid.steps

    def a_of(x):
        j, xr = grid.locate(x)
        s = (xr - grid.nodes[j]) / grid.steps[j]
        return np.exp((1 - s) * la[j] + s * la[j + 1])

    return AdvDiffProblem1D(grid, b, lambda x: _eval_f(f, x) / a_of(x))

"""Grids and piecewise interpolation of operator inputs and outputs.

A :class:`Grid1D` is an ordered set of nodes ``x_0 < ... < x_m``.  On a
periodic grid the last node is the image of the first one, so a periodic
grid with ``m + 1`` nodes carries ``m`` degrees of freedom.  A
:class:`Grid2D` is the tensor product of two such grids with x-major
(lexicographic) node ordering.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from ._errors import DomainError, InputError

MAX_MESH_RATIO = 100.0


@dataclass(frozen=True, eq=False)
class Grid1D:
    """Ordered 1D node set, optionally periodic.

    Parameters
    ----------
    nodes : array-like
        Strictly increasing coordinates ``x_0 < x_1 < ... < x_m``.
    periodic : bool
        If True, ``x_m`` is identified with ``x_0`` and ``period`` must equal
        ``x_m - x_0``.
    period : float, optional
        Length of one period; defaults to ``x_m - x_0``.
    """

    nodes: np.ndarray
    periodic: bool = False
    period: float = field(default=None)

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise InputError("a grid needs at least two nodes in a 1D array")
        if not np.all(np.isfinite(nodes)):
            raise InputError("grid nodes must be finite")
        steps = np.diff(nodes)
        if np.any(steps <= 0):
            raise InputError("grid nodes must be strictly increasing")
        if steps.max() / steps.min() > MAX_MESH_RATIO:
            raise InputError(
                f"mesh ratio {steps.max() / steps.min():.1f} exceeds {MAX_MESH_RATIO}"
            )
        span = nodes[-1] - nodes[0]
        period = span if self.period is None else float(self.period)
        if self.periodic and not np.isclose(period, span, rtol=1e-12, atol=1e-14):
            raise InputError(f"periodic grid spans {span}, expected period {period}")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "period", period)

    @classmethod
    def uniform(cls, start, stop, cells, periodic=False):
        """Grid with ``cells`` equal cells on ``[start, stop]``."""
        if cells < 1:
            raise InputError("need at least one cell")
        return cls(np.linspace(start, stop, cells + 1), periodic=periodic)

    @property
    def cells(self) -> int:
        return self.nodes.size - 1

    @property
    def steps(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def h(self) -> float:
        return float(self.steps.max())

    @property
    def n_values(self) -> int:
        """Number of independent nodal values (drops the periodic image)."""
        return self.cells if self.periodic else self.nodes.size

    @property
    def value_nodes(self) -> np.ndarray:
        return self.nodes[: self.n_values]

    @property
    def start(self) -> float:
        return float(self.nodes[0])

    @property
    def stop(self) -> float:
        return float(self.nodes[-1])

    def reduce(self, x):
        """Map points into the grid span.

        Periodic grids use the half-open convention
        ``x -> x_0 + mod(x - x_0, period)``; non-periodic grids reject points
        outside ``[x_0, x_m]``.
        """
        x = np.asarray(x, dtype=float)
        if self.periodic:
            return self.start + np.mod(x - self.start, self.period)
        tol = 1e-12 * max(1.0, abs(self.start), abs(self.stop))
        bad = (x < self.start - tol) | (x > self.stop + tol)
        if np.any(bad):
            first = np.atleast_1d(x)[np.atleast_1d(bad)][0]
            raise DomainError(f"point {first} outside [{self.start}, {self.stop}]")
        return np.clip(x, self.start, self.stop)

    def locate(self, x):
        """Cell index ``j`` with ``x`` in ``[x_j, x_{j+1})`` (last cell closed)."""
        x = self.reduce(x)
        j = np.searchsorted(self.nodes, x, side="right") - 1
        return np.clip(j, 0, self.cells - 1), x

    def shifted(self, delta):
        return Grid1D(self.nodes + delta, periodic=self.periodic, period=self.period)


@dataclass(frozen=True, eq=False)
class Grid2D:
    """Tensor grid with x-major node order (``index = i * ny + j``)."""

    x_nodes: Grid1D
    y_nodes: Grid1D

    def __post_init__(self):
        if self.x_nodes.n_values != self.y_nodes.n_values:
            raise InputError(
                "both axes of a 2D grid must carry the same node count, got "
                f"{self.x_nodes.n_values} and {self.y_nodes.n_values}"
            )

    @classmethod
    def uniform(cls, start, stop, cells, periodic=False):
        g = Grid1D.uniform(start, stop, cells, periodic=periodic)
        return cls(g, g)

    @property
    def n_side(self) -> int:
        return self.x_nodes.n_values

    @property
    def n_values(self) -> int:
        return self.n_side**2

    @property
    def h(self) -> float:
        return max(self.x_nodes.h, self.y_nodes.h)

    @property
    def periodic(self) -> bool:
        return self.x_nodes.periodic and self.y_nodes.periodic

    def points(self) -> np.ndarray:
        """Node coordinates, shape ``(n_values, 2)``, x-major."""
        X, Y = np.meshgrid(self.x_nodes.value_nodes, self.y_nodes.value_nodes, indexing="ij")
        return np.column_stack([X.ravel(), Y.ravel()])


AnyGrid = Union[Grid1D, Grid2D]


@dataclass(frozen=True, eq=False)
class PiecewiseFunction:
    """Nodal values on a grid plus an interpolation order.

    Order 0 is constant on each cell ``[x_j, x_{j+1})`` with the value of the
    left node (lower-left corner in 2D).  Order 1 is (bi)linear nodal
    interpolation.
    """

    grid: AnyGrid
    values: np.ndarray
    order: int = 1

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).ravel()
        if values.size != self.grid.n_values:
            raise InputError(
                f"expected {self.grid.n_values} nodal values, got {values.size}"
            )
        if self.order not in (0, 1):
            raise InputError("interpolation order must be 0 or 1")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __call__(self, *x):
        return interpolate(self, *x)

    def full_values(self) -> np.ndarray:
        """Values at all 1D nodes, repeating the periodic image."""
        g = self.grid
        if isinstance(g, Grid1D) and g.periodic:
            return np.append(self.values, self.values[0])
        return self.values


def _interp_1d(grid: Grid1D, full: np.ndarray, order: int, x):
    j, xr = grid.locate(x)
    if order == 0:
        return full[j]
    h = grid.steps[j]
    s = (xr - grid.nodes[j]) / h
    return (1.0 - s) * full[j] + s * full[j + 1]


def _axis_weights(grid: Grid1D, order: int, x):
    """Cell indices and (left, right) weights along one axis."""
    j, xr = grid.locate(x)
    if order == 0:
        s = np.zeros_like(xr)
    else:
        s = (xr - grid.nodes[j]) / grid.steps[j]
    jr = j + 1
    if grid.periodic:
        jr = np.mod(jr, grid.cells)
    return j, jr, 1.0 - s, s


def interpolate(f: PiecewiseFunction, *x):
    """Evaluate the piecewise interpolant of ``f`` at ``x`` (or ``x, y``).

    Points are reduced modulo the period on periodic axes; points outside a
    non-periodic span raise :class:`DomainError`.
    """
    g = f.grid
    if isinstance(g, Grid1D):
        if len(x) != 1:
            raise InputError("1D interpolation takes a single coordinate array")
        return _interp_1d(g, f.full_values(), f.order, x[0])
    if len(x) != 2:
        raise InputError("2D interpolation takes x and y coordinate arrays")
    xs, ys = np.broadcast_arrays(np.asarray(x[0], float), np.asarray(x[1], float))
    V = f.values.reshape(g.n_side, g.n_side)
    i0, i1, wx0, wx1 = _axis_weights(g.x_nodes, f.order, xs)
    j0, j1, wy0, wy1 = _axis_weights(g.y_nodes, f.order, ys)
    if f.order == 0:
        return V[i0, j0]
    return (
        wx0 * wy0 * V[i0, j0]
        + wx1 * wy0 * V[i1, j0]
        + wx0 * wy1 * V[i0, j1]
        + wx1 * wy1 * V[i1, j1]
    )


def sample_input(f: Callable, grid: AnyGrid, order: int = 1) -> PiecewiseFunction:
    """Sample a scalar field at the grid nodes (the branch-network input)."""
    if isinstance(grid, Grid1D):
        vals = np.asarray(f(grid.value_nodes), dtype=float)
    else:
        pts = grid.points()
        vals = np.asarray(f(pts[:, 0], pts[:, 1]), dtype=float)
    vals = np.broadcast_to(vals, (grid.n_values,)).astype(float)
    if not np.all(np.isfinite(vals)):
        bad = int(np.flatnonzero(~np.isfinite(vals))[0])
        raise InputError(f"non-finite sample at node {bad}")
    return PiecewiseFunction(grid, vals, order)


def cell_antiderivative(grid: Grid1D, full_values: np.ndarray):
    """Cumulative integral of the piecewise-linear interpolant at the nodes."""
    h = grid.steps
    return np.concatenate([[0.0], np.cumsum(0.5 * h * (full_values[:-1] + full_values[1:]))])


def antiderivative(f: PiecewiseFunction, x):
    """Exact ``int_{x_0}^x f`` for a 1D piecewise-linear ``f``.

    On periodic grids ``x`` may lie anywhere on the real line; whole periods
    contribute the period integral.
    """
    g = f.grid
    if not isinstance(g, Grid1D) or f.order != 1:
        raise InputError("antiderivative needs a 1D order-1 function")
    full = f.full_values()
    cum = cell_antiderivative(g, full)
    x = np.asarray(x, dtype=float)
    if g.periodic:
        n_periods = np.floor((x - g.start) / g.period)
        xr = x - n_periods * g.period
        base = n_periods * cum[-1]
    else:
        xr = g.reduce(x)
        base = 0.0
    j = np.clip(np.searchsorted(g.nodes, xr, side="right") - 1, 0, g.cells - 1)
    s = xr - g.nodes[j]
    slope = (full[j + 1] - full[j]) / g.steps[j]
    return base + cum[j] + full[j] * s + 0.5 * slope * s * s

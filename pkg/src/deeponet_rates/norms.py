"""Quadrature rules and discrete error norms."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from ._errors import EvaluationError, InputError

LATTICE_REFINE = 10


@lru_cache(maxsize=None)
def gauss_legendre(n: int):
    """Gauss-Legendre nodes and weights on ``[-1, 1]``."""
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def composite_gauss(edges, order=16):
    """Nodes and weights of a composite rule over consecutive ``edges``.

    Returns arrays of shape ``(cells, order)``.
    """
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(order)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def refined_edges(nodes, refine):
    """Split every cell of ``nodes`` into ``refine`` equal pieces."""
    nodes = np.asarray(nodes, dtype=float)
    t = np.linspace(0.0, 1.0, refine + 1)[:-1]
    inner = nodes[:-1, None] + np.diff(nodes)[:, None] * t
    return np.append(inner.ravel(), nodes[-1])


def evaluation_lattice(domain, grid_nodes=None, resolution=256, refine=LATTICE_REFINE):
    """Dense lattice for sup-norm estimates.

    The lattice refines the finest grid under comparison ``refine`` times and
    always contains its nodes and cell midpoints.
    """
    a, b = map(float, domain)
    if grid_nodes is None:
        grid_nodes = np.linspace(a, b, resolution + 1)
    grid_nodes = np.asarray(grid_nodes, dtype=float)
    pts = refined_edges(grid_nodes, 2 * refine)
    return pts[(pts >= a) & (pts <= b)]


def _finite_or_raise(values, points, label):
    bad = ~np.isfinite(values)
    if np.any(bad):
        idx = int(np.flatnonzero(bad)[0])
        raise EvaluationError(f"non-finite {label} value at point {points[idx]!r}")


def error_norm(f_ref, f_approx, domain, norm="Linf", grid_nodes=None, resolution=256,
               quad_order=16):
    """Distance between two scalar callables on an interval.

    ``Linf`` is a max over :func:`evaluation_lattice`; ``L2`` uses a
    composite Gauss-Legendre rule on the same cells.
    """
    a, b = map(float, domain)
    if norm == "Linf":
        pts = evaluation_lattice((a, b), grid_nodes, resolution)
        r = np.asarray(f_ref(pts), dtype=float)
        s = np.asarray(f_approx(pts), dtype=float)
        r, s = np.broadcast_arrays(r, s)
        _finite_or_raise(r, pts, "reference")
        _finite_or_raise(s, pts, "approximation")
        return float(np.max(np.abs(r - s)))
    if norm == "L2":
        nodes = np.linspace(a, b, resolution + 1) if grid_nodes is None else grid_nodes
        edges = refined_edges(nodes, 2)
        x, w = composite_gauss(edges, quad_order)
        x, w = x.ravel(), w.ravel()
        r = np.asarray(f_ref(x), dtype=float)
        s = np.asarray(f_approx(x), dtype=float)
        r, s = np.broadcast_arrays(r, s)
        _finite_or_raise(r, x, "reference")
        _finite_or_raise(s, x, "approximation")
        return float(np.sqrt(np.sum(w * (r - s) ** 2)))
    raise InputError(f"unknown norm {norm!r}; use 'Linf' or 'L2'")

"""Finite differences for ``-Lap u + a . grad u + a3 u = f`` on a rectangle and
the Sherman-Morrison cascade that builds ``(S + sum alpha_k u_k v_k^T)^{-1}``
from ``T_0 = S^{-1}`` one rank-one update at a time.

The whole system is scaled by ``h^2``: ``S`` is the integer 5-point stencil,
reaction updates carry ``alpha = h^2 a3`` and advection updates
``alpha = h a_i`` with the central-difference row ``(e_{k+} - e_{k-}) / 2``.
Unknowns use x-major order (``index = i * n_y + j``).
"""
from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, field
from typing import Callable, List, NamedTuple, Optional, Union

import numpy as np

from ._errors import InputError, ParameterError, SingularUpdateError
from .grids import Grid2D, PiecewiseFunction

DENOMINATOR_FLOOR = 1e-10
BOUNDARIES = ("dirichlet", "neumann", "robin")


class RankOneUpdate(NamedTuple):
    """``alpha * e_k v^T`` with ``v`` stored sparsely as ``(v_idx, v_val)``."""

    alpha: float
    k: int
    v_idx: np.ndarray
    v_val: np.ndarray
    kind: str


@dataclass(frozen=True, eq=False)
class FdSystem:
    """Scaled linear system ``(S + sum_k alpha_k e_k v_k^T) U = F``."""

    S: np.ndarray
    F: np.ndarray
    h: float
    updates: List[RankOneUpdate]
    points: np.ndarray
    shape: tuple
    boundary: str
    pinned: Optional[int] = None

    @property
    def size(self) -> int:
        return self.F.size

    def full_matrix(self):
        M = self.S.copy()
        for up in self.updates:
            M[up.k, up.v_idx] += up.alpha * up.v_val
        return M


@dataclass
class CascadeState:
    """Current inverse ``T_k`` and the denominators seen so far."""

    T: np.ndarray
    k: int = 0
    condition_log: list = field(default_factory=list)


Coefficient = Union[float, Callable, PiecewiseFunction, None]


def _coeff_values(c: Coefficient, pts):
    if c is None:
        return np.zeros(len(pts))
    if isinstance(c, PiecewiseFunction):
        return np.asarray(c(pts[:, 0], pts[:, 1]), float)
    if callable(c):
        return np.broadcast_to(np.asarray(c(pts[:, 0], pts[:, 1]), float), (len(pts),)).copy()
    return np.full(len(pts), float(c))


def _axis_rows(n, h_axis, ghost):
    """1D second-difference matrix (times h^2 / h_axis^2 folded in by caller)
    and neighbour lists for the central first difference."""
    D2 = 2 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)
    if ghost:
        # mirrored ghost value u_{-1} = u_1 (Neumann part)
        D2[0, 1] = -2.0
        D2[-1, -2] = -2.0
    return D2


def assemble(domain: Grid2D, a1: Coefficient = None, a2: Coefficient = None,
             a3: Coefficient = None, f: Callable = None, boundary="dirichlet",
             robin_beta=1.0) -> FdSystem:
    """Central-difference system on a uniform rectangular grid.

    Dirichlet (homogeneous) keeps interior nodes only.  Neumann and Robin
    keep every node and eliminate mirrored ghost nodes, giving second-order
    boundary rows; Robin means ``du/dn + beta u = 0``.  A pure Neumann
    problem pins node 0 and is mean-corrected after solving.

    Coefficients may be constants, callables ``c(x, y)`` or
    :class:`PiecewiseFunction` objects; they are sampled at the unknowns.
    The update list holds all ``a1`` updates, then ``a2``, then ``a3``.
    """
    boundary = boundary.lower()
    if boundary not in BOUNDARIES:
        raise InputError(f"boundary must be one of {BOUNDARIES}")
    if domain.periodic:
        raise InputError("finite-difference domains are not periodic")
    gx, gy = domain.x_nodes, domain.y_nodes
    if gx.nodes.size != gy.nodes.size:
        raise InputError("node count must be a perfect square (equal axes)")
    hx, hy = gx.steps, gy.steps
    if not (np.allclose(hx, hx[0], rtol=1e-10) and np.allclose(hy, hx[0], rtol=1e-10)):
        raise InputError("finite differences need a uniform grid with equal steps")
    h = float(hx[0])
    if boundary == "dirichlet":
        xs, ys = gx.nodes[1:-1], gy.nodes[1:-1]
    else:
        xs, ys = gx.nodes, gy.nodes
    n = xs.size
    if n < 2:
        raise InputError("grid has too few unknowns")
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel()])

    ghost = boundary != "dirichlet"
    D2 = _axis_rows(n, h, ghost)
    I = np.eye(n)
    S = np.kron(D2, I) + np.kron(I, D2)
    if boundary == "robin":
        if not robin_beta > 0:
            raise ParameterError("robin_beta must be positive")
        edge = np.zeros(n)
        edge[[0, -1]] = 2.0 * h * robin_beta
        S += np.diag(np.kron(edge, np.ones(n)) + np.kron(np.ones(n), edge))

    fvals = _coeff_values(f if f is not None else 0.0, pts)
    F = h * h * fvals

    v1 = _coeff_values(a1, pts)
    v2 = _coeff_values(a2, pts)
    v3 = _coeff_values(a3, pts)
    for name, v in (("a1", v1), ("a2", v2), ("a3", v3)):
        if not np.all(np.isfinite(v)):
            raise InputError(f"{name} is not finite at every node")
    if np.any(v3 < 0):
        raise InputError("a3 must be non-negative")
    adv = max(np.max(np.abs(v1)), np.max(np.abs(v2)))
    if h * adv > 1.0:
        raise ParameterError(f"h * max|a| = {h * adv:.3g} > 1; refine the grid")

    pinned = None
    if boundary == "neumann":
        if np.any(v3 != 0):
            raise ParameterError("pure Neumann with a reaction term is not supported; use robin")
        pinned = 0
        S[0, :] = 0.0
        S[0, 0] = 1.0
        F[0] = 0.0

    updates = []
    for kind, vals, stride in (("a1", v1, n), ("a2", v2, 1)):
        for k in np.flatnonzero(vals):
            if k == pinned:
                continue
            updates.append(_advection_update(k, h * vals[k], stride, n, ghost, kind))
    for k in np.flatnonzero(v3):
        updates.append(RankOneUpdate(h * h * v3[k], int(k), np.array([k]), np.array([1.0]), "a3"))
    return FdSystem(S, F, h, updates, pts, (n, n), boundary, pinned)


def _advection_update(k, alpha, stride, n, ghost, kind):
    """Central difference along the axis with index ``stride``.

    Dirichlet neighbours outside the domain are zero; mirrored ghosts
    cancel the difference on Neumann/Robin boundaries.
    """
    pos = (k // stride) % n
    idx, val = [], []
    if pos + 1 < n:
        idx.append(k + stride)
        val.append(0.5)
    if pos - 1 >= 0:
        idx.append(k - stride)
        val.append(-0.5)
    if ghost and (pos == 0 or pos == n - 1):
        idx, val = [], []
    return RankOneUpdate(float(alpha), int(k), np.array(idx, int), np.array(val, float), kind)


def sherman_morrison_step(state: CascadeState, update: RankOneUpdate,
                          floor=DENOMINATOR_FLOOR, inplace=False) -> CascadeState:
    """``T <- T - alpha / (1 + alpha v^T T e_k) (T e_k)(v^T T)``."""
    T = state.T if inplace else state.T.copy()
    log = state.condition_log if inplace else list(state.condition_log)
    k_next = state.k + 1
    if update.alpha == 0 or update.v_idx.size == 0:
        log.append(1.0)
        if inplace:
            state.k = k_next
            return state
        return CascadeState(T, k_next, log)
    vT = update.v_val @ T[update.v_idx, :]
    den = 1.0 + update.alpha * vT[update.k]
    log.append(float(den))
    if not abs(den) >= floor:
        raise SingularUpdateError(k_next, float(den), floor)
    Tu = T[:, update.k].copy()
    T -= np.outer(Tu, (update.alpha / den) * vT)
    if inplace:
        state.k = k_next
        return state
    return CascadeState(T, k_next, log)


def initial_state(system: FdSystem) -> CascadeState:
    return CascadeState(np.linalg.inv(system.S), 0, [])


def run_cascade(system: FdSystem, order=None, state=None) -> CascadeState:
    """Apply every update (optionally in a permuted ``order``) to ``S^{-1}``."""
    state = initial_state(system) if state is None else state
    ups = system.updates if order is None else [system.updates[i] for i in order]
    for up in ups:
        sherman_morrison_step(state, up, inplace=True)
    return state


def _finish(system, U):
    if system.pinned is not None:
        U = U - U.mean()
    return U


def cascade_solve(system: FdSystem, order=None):
    """``U_N = T_m F`` and the list of update denominators."""
    state = run_cascade(system, order)
    return _finish(system, state.T @ system.F), state.condition_log


def dense_solve(system: FdSystem):
    """Oracle: LU solve of the assembled matrix."""
    return _finish(system, np.linalg.solve(system.full_matrix(), system.F))


def rational_R(x1, x2, x3, x4, x5, floor=DENOMINATOR_FLOOR):
    """``x2 - x1 x4 x5 / (1 + x1 x3)``."""
    x1, x2, x3, x4, x5 = (np.asarray(v, float) for v in (x1, x2, x3, x4, x5))
    den = 1.0 + x1 * x3
    if np.any(np.abs(den) < floor):
        raise SingularUpdateError(0, float(np.min(np.abs(den))), floor)
    out = x2 - x1 * x4 * x5 / den
    return out if out.ndim else float(out)


def rational_R_expanded(x1, x2, x3, x4, x5):
    """``(x2 + x1 x2 x3 - x1 x4 x5) / (1 + x1 x3)``."""
    return (x2 + x1 * x2 * x3 - x1 * x4 * x5) / (1.0 + x1 * x3)


def dump_matrix(path, M, skip_zeros=True):
    """Write ``i j value`` triplets (0-based, shortest round-trip floats)."""
    M = np.asarray(M, float)
    rows, cols = np.nonzero(M) if skip_zeros else np.indices(M.shape).reshape(2, -1)
    lines = [f"{i} {j} {float(M[i, j])!r}\n" for i, j in zip(rows, cols)]
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".matrix-")
    with os.fdopen(fd, "w") as fh:
        fh.writelines(lines)
    os.replace(tmp, path)


def load_matrix(path, shape):
    M = np.zeros(shape)
    with open(path) as fh:
        for line in fh:
            i, j, v = line.split()
            M[int(i), int(j)] = float(v)
    return M


def grid_values(system: FdSystem, U):
    """Reshape a solution vector to ``(n_x, n_y)``."""
    return np.asarray(U).reshape(system.shape)

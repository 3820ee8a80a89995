"""Branch x trunk assembly with exact hat trunks, operator-level errors and
the generic error budget.

A model stores one branch value per output node and the matching nodal
basis as ReLU networks, so ``model(y) = sum_k b_k L_k(y)``.
"""
from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from ._errors import DomainError, InputError, ParameterError
from .advdiff import AdvDiffProblem1D, discrete_operator, exact_solution
from .burgers import BurgersProblem1D, burgers_rational, spectral_reference
from .fourier import FourierExpansion, bochner_riesz
from .grids import Grid1D, Grid2D
from .norms import composite_gauss, error_norm
from .relu import hat_trunk, parallel
from .relu.network import ReluNetwork

MANIFEST_HEADER = "deeponet-manifest v1"


def _hat_bank(grid: Grid1D) -> ReluNetwork:
    """All nodal hats of ``grid`` as one network with ``n_values`` outputs."""
    return parallel(*[hat_trunk(grid, i) for i in range(grid.n_values)])


@dataclass(frozen=True, eq=False)
class DeepONetModel:
    """``sum_k branch_k trunk_k(y)`` with exact hat trunks.

    Parameters
    ----------
    branch_values : ndarray, shape (p,)
        One coefficient per output node.
    grid : Grid1D or Grid2D
        Output grid; trunk ``k`` is the hat of value node ``k`` (tensor
        product of 1D hats in 2D, x-major).
    trunks : list of ReluNetwork
        1D trunk bank per axis; each maps a coordinate to all axis hats.
    metadata : dict
        Free-form description (``m``, operator id, parameters).
    """

    branch_values: np.ndarray
    grid: object
    trunks: list
    metadata: dict = field(default_factory=dict)

    @property
    def p(self) -> int:
        return self.branch_values.size

    @property
    def m(self):
        return self.metadata.get("m")

    def trunk_values(self, y):
        """Matrix ``[trunk_k(y_i)]`` of shape ``(n_points, p)``."""
        if isinstance(self.grid, Grid1D):
            y = np.asarray(y, float).ravel()
            return self.trunks[0](_to_span(self.grid, y)[:, None])
        pts = np.atleast_2d(np.asarray(y, float))
        if pts.shape[1] != 2:
            raise InputError("2D models take points of shape (n, 2)")
        Lx = self.trunks[0](_to_span(self.grid.x_nodes, pts[:, 0])[:, None])
        Ly = self.trunks[1](_to_span(self.grid.y_nodes, pts[:, 1])[:, None])
        return (Lx[:, :, None] * Ly[:, None, :]).reshape(len(pts), -1)

    def __call__(self, y):
        return evaluate_model(self, y)


def _to_span(grid: Grid1D, y):
    if grid.periodic:
        return grid.reduce(y)
    lo, hi = grid.start, grid.stop
    bad = (y < lo) | (y > hi)
    if np.any(bad):
        raise DomainError(f"point {y[bad][0]!r} outside the trunk domain [{lo}, {hi}]")
    return y


def assemble_interpolation_deeponet(branch_values, grid_p, metadata=None) -> DeepONetModel:
    """Piecewise-linear interpolant of ``branch_values`` through exact hats."""
    b = np.asarray(branch_values, float).ravel()
    if isinstance(grid_p, Grid1D):
        trunks = [_hat_bank(grid_p)]
    elif isinstance(grid_p, Grid2D):
        trunks = [_hat_bank(grid_p.x_nodes), _hat_bank(grid_p.y_nodes)]
    else:
        raise InputError("grid_p must be a Grid1D or Grid2D")
    if b.size != grid_p.n_values:
        raise InputError(f"expected {grid_p.n_values} branch values, got {b.size}")
    if not np.all(np.isfinite(b)):
        raise InputError("branch values must be finite")
    b.setflags(write=False)
    return DeepONetModel(b, grid_p, trunks, dict(metadata or {}))


def evaluate_model(model: DeepONetModel, y):
    """``sum_k branch_k trunk_k(y)``; scalar in, scalar out."""
    scalar = np.ndim(y) == 0 or (isinstance(model.grid, Grid2D) and np.ndim(y) == 1)
    out = model.trunk_values(y) @ model.branch_values
    return float(out[0]) if scalar else out


def bochner_riesz_deeponet(branch_values, grid_p: Grid1D, radius, gamma=1.0,
                           quad_order=32) -> DeepONetModel:
    """Spectral alternative for 1D periodic outputs.

    The hat interpolant of ``branch_values`` is expanded in Fourier modes
    (``c_i^k = (1/2pi) int e^{-iky} L_i`` by Gauss-Legendre per cell),
    damped to its Bochner-Riesz mean and re-interpolated at the nodes.
    """
    if not (isinstance(grid_p, Grid1D) and grid_p.periodic):
        raise InputError("the spectral assembly needs a periodic 1D grid")
    b = np.asarray(branch_values, float).ravel()
    if b.size != grid_p.n_values:
        raise InputError(f"expected {grid_p.n_values} branch values, got {b.size}")
    R = int(np.floor(radius))
    ks = np.arange(-R, R + 1)
    y, w = composite_gauss(grid_p.nodes, quad_order)
    full = np.append(b, b[0])
    s = (y - grid_p.nodes[:-1, None]) / grid_p.steps[:, None]
    vals = (1 - s) * full[:-1, None] + s * full[1:, None]
    phase = np.exp(-1j * np.multiply.outer(y.ravel(), ks))
    coef = (w.ravel() * vals.ravel()) @ phase / grid_p.period
    series = FourierExpansion(ks[:, None], coef, float(radius))
    mean = bochner_riesz(series, radius, gamma)
    nodal = mean(grid_p.value_nodes)
    meta = dict(assembly="bochner-riesz", radius=float(radius), gamma=float(gamma))
    return assemble_interpolation_deeponet(nodal, grid_p, meta)


# ---------------------------------------------------------------- budgets

class BudgetTerms(NamedTuple):
    interpolation: float
    trunk: float
    branch: float
    network: float

    @property
    def total(self) -> float:
        return self.interpolation + self.trunk + self.branch + self.network


def error_budget_terms(m, p, d, alpha, N, L, theta, C=1.0, omega2=0.0, h=None) -> BudgetTerms:
    """Right-hand side terms of the generic DeepONet error bound.

    ``C h^alpha`` (input discretization, ``h = m^{-1/d}`` by default),
    ``C omega2`` (output interpolation, supplied by the caller),
    ``p sqrt(m) (N L)^{-2 alpha / m}`` (branch networks) and
    ``p exp(-theta^{1/(1+d)})`` (trunk networks).
    """
    if not 0 < alpha <= 1:
        raise ParameterError("alpha must lie in (0, 1]")
    for name, v in (("m", m), ("p", p), ("d", d), ("N", N), ("L", L), ("theta", theta)):
        if not v > 0:
            raise ParameterError(f"{name} must be positive")
    if omega2 < 0 or C < 0:
        raise ParameterError("C and omega2 must be non-negative")
    h = m ** (-1.0 / d) if h is None else float(h)
    interp = C * h**alpha
    trunk = C * omega2
    with np.errstate(over="ignore", under="ignore"):
        branch = p * np.sqrt(m) * np.exp(-2.0 * alpha / m * (np.log(N) + np.log(L)))
        net = p * np.exp(-np.power(float(theta), 1.0 / (1 + d)))
    return BudgetTerms(float(interp), float(trunk), float(branch), float(net))


def error_budget(m, p, d, alpha, N, L, theta, C=1.0, omega2=0.0, h=None) -> float:
    """Sum of :func:`error_budget_terms` (a bound for planning, not a measurement)."""
    return error_budget_terms(m, p, d, alpha, N, L, theta, C, omega2, h).total


# -------------------------------------------------------- input families

BURGERS_KAPPA = 0.5
BURGERS_TIME = 0.25


def _trig(terms):
    def u(x):
        x = np.asarray(x, float)
        return sum(a * np.sin(k * x + ph) for a, k, ph in terms)
    return u


BURGERS_FAMILY = (
    ("sin", _trig([(1.0, 1, 0.0)])),
    ("sin+cos2", _trig([(0.3, 1, 0.0), (0.5, 2, np.pi / 2)])),
    ("sin+sin3", _trig([(1.0, 1, 0.0), (0.25, 3, 0.0)])),
    ("shifted", _trig([(0.8, 1, 1.0)])),
    ("mixed", _trig([(0.6, 1, -np.pi / 2), (0.2, 2, 0.0)])),
)

ADVDIFF_LENGTH = 1.0
ADVDIFF_FAMILY = (
    ("zero", (0.0, 0.0, 0.0, 0.0)),
    ("unit", (1.0, 1.0, 1.0, 1.0)),
    ("alternating", (1.0, -0.5, 0.8, -1.0)),
    ("steep", (2.0, 0.0, -2.0, 1.0)),
    ("ramp", (-1.5, 0.5, 1.5, -0.5)),
)


def piecewise_speed(cells, L=ADVDIFF_LENGTH):
    """Callable constant on ``len(cells)`` equal pieces of ``[0, L]``."""
    cells = np.asarray(cells, float)

    def a(x):
        j = np.clip(np.floor(np.asarray(x, float) / L * cells.size).astype(int), 0, cells.size - 1)
        return cells[j]
    return a


def advdiff_forcing(x):
    return np.ones_like(np.asarray(x, float))


# ----------------------------------------------------- operator pipelines

def burgers_deeponet(u0: Callable, m, p, kappa=BURGERS_KAPPA, t=BURGERS_TIME) -> DeepONetModel:
    """Branch ``k`` = rational Cole-Hopf operator of ``I_m u0`` at node ``y_k``."""
    problem = BurgersProblem1D.from_callable(u0, m, kappa)
    grid_p = Grid1D.uniform(-np.pi, np.pi, p, periodic=True)
    b = burgers_rational(problem, grid_p.value_nodes, t)
    meta = dict(operator="burgers1d", m=int(m), kappa=float(kappa), t=float(t))
    return assemble_interpolation_deeponet(b, grid_p, meta)


def burgers_reference(u0: Callable, kappa=BURGERS_KAPPA, t=BURGERS_TIME, n_modes=1024):
    return lambda y: spectral_reference(u0, kappa, y, t, n_modes=n_modes)


def advdiff_deeponet(a_cells, m, p, L=ADVDIFF_LENGTH, f=advdiff_forcing) -> DeepONetModel:
    """Branch ``k`` = discrete integral operator at output node ``y_k``."""
    problem = AdvDiffProblem1D.uniform(L, m, piecewise_speed(a_cells, L), f)
    grid_p = Grid1D.uniform(0.0, L, p)
    b = discrete_operator(problem, grid_p.nodes)
    meta = dict(operator="advdiff1d", m=int(m), L=float(L))
    return assemble_interpolation_deeponet(b, grid_p, meta)


def advdiff_reference(a_cells, L=ADVDIFF_LENGTH, f=advdiff_forcing, m_ref=None):
    cells = np.asarray(a_cells, float)
    m_ref = m_ref or 4 * cells.size
    problem = AdvDiffProblem1D.uniform(L, m_ref, piecewise_speed(cells, L), f)
    return lambda y: exact_solution(problem, y)


class OperatorError(NamedTuple):
    error_linf: float
    error_l2: float
    worst_input: str


def operator_error(build_model: Callable, reference: Callable, family: Sequence,
                   domain, grid_nodes=None, resolution=256) -> OperatorError:
    """Sup over ``family`` of the model-vs-reference distance.

    ``family`` is a sequence of ``(name, input)`` pairs; ``build_model`` and
    ``reference`` both map an input to a callable of ``y``.
    """
    worst = ("", -1.0)
    l2 = 0.0
    for name, u in family:
        model, ref = build_model(u), reference(u)
        nodes = grid_nodes if grid_nodes is not None else _model_nodes(model)
        e_inf = error_norm(ref, model, domain, "Linf", nodes, resolution)
        e_l2 = error_norm(ref, model, domain, "L2", nodes, resolution)
        if e_inf > worst[1]:
            worst = (name, e_inf)
        l2 = max(l2, e_l2)
    return OperatorError(worst[1], l2, worst[0])


def _model_nodes(model):
    return model.grid.nodes if isinstance(model, DeepONetModel) and isinstance(model.grid, Grid1D) else None


# --------------------------------------------------------------- manifest

def write_manifest(model: DeepONetModel, directory, name="model"):
    """Write ``<name>.manifest`` plus one trunk network file per axis.

    The manifest lists ``p``, ``m``, the output grid, trunk file references,
    the branch descriptor and the branch values (shortest round-trip).
    """
    os.makedirs(directory, exist_ok=True)
    trunk_files = []
    for ax, net in enumerate(model.trunks):
        fname = f"{name}.trunk{ax}.relu"
        net.save(os.path.join(directory, fname))
        trunk_files.append(fname)
    g = model.grid
    axes = [g] if isinstance(g, Grid1D) else [g.x_nodes, g.y_nodes]
    lines = [MANIFEST_HEADER, f"p {model.p}", f"m {model.m if model.m is not None else 'na'}"]
    for ax, ag in enumerate(axes):
        lines.append(f"grid {ax} {float(ag.start)!r} {float(ag.stop)!r} {ag.cells} "
                     f"{'periodic' if ag.periodic else 'bounded'}")
    lines += [f"trunk {ax} {f}" for ax, f in enumerate(trunk_files)]
    desc = " ".join(f"{k}={v}" for k, v in sorted(model.metadata.items()))
    lines.append(f"branch {desc}".rstrip())
    lines.append(" ".join(["values"] + [repr(float(v)) for v in model.branch_values]))
    path = os.path.join(directory, f"{name}.manifest")
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".manifest-")
    with os.fdopen(fd, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(tmp, path)
    return path


def read_manifest(path) -> DeepONetModel:
    """Rebuild a model written by :func:`write_manifest`."""
    from .relu.network import load

    base = os.path.dirname(os.path.abspath(path))
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if lines[0] != MANIFEST_HEADER:
        raise InputError("not a deeponet manifest")
    grids, trunks, meta, values = [], [], {}, None
    for ln in lines[1:]:
        tag, _, rest = ln.partition(" ")
        if tag == "grid":
            _, a, b, cells, kind = rest.split()
            grids.append(Grid1D.uniform(float(a), float(b), int(cells), periodic=kind == "periodic"))
        elif tag == "trunk":
            trunks.append(load(os.path.join(base, rest.split()[1])))
        elif tag == "branch":
            meta = dict(kv.split("=", 1) for kv in rest.split())
        elif tag == "values":
            values = np.array([float(v) for v in rest.split()])
    grid = grids[0] if len(grids) == 1 else Grid2D(grids[0], grids[1])
    model = assemble_interpolation_deeponet(values, grid, meta)
    return DeepONetModel(model.branch_values, grid, trunks, meta)

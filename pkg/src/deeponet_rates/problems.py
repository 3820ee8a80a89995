"""Problem runners and sweep cells for the command-line driver.

Each problem has typed defaults; ``run_problem`` returns a dict of scalar
results and ``sweep_cell`` returns the per-axis cell function used by
:func:`deeponet_rates.harness.run_sweep`.
"""
from __future__ import annotations

import math
from typing import Callable, Dict

import numpy as np

from ._errors import InputError, ParameterError
from .advdiff import AdvDiffProblem1D, discrete_operator, exact_solution
from .burgers import BurgersProblem1D, burgers_rational, cole_hopf_exact, spectral_reference
from .burgers2d import BurgersProblem2D, cole_hopf_exact_2d, rational_operator_2d
from .deeponet import (
    ADVDIFF_FAMILY,
    BURGERS_FAMILY,
    advdiff_deeponet,
    advdiff_reference,
    burgers_deeponet,
    burgers_reference,
    operator_error,
    piecewise_speed,
    write_manifest,
)
from .fd_cascade import assemble, cascade_solve, dense_solve, dump_matrix
from .forced_burgers import ForcedBurgersConfig, forced_burgers_mc
from .fourier import bochner_riesz, modulus_omega2
from .grids import Grid2D
from .harness import CellResult, write_atomic
from .norms import error_norm
from .relu import blessed_cascade_net, compile_rational_R

PROBLEMS = ("burgers1d", "burgers2d", "burgers-forced", "advdiff1d", "reacdiff2d",
            "advdiff2d", "bochner-riesz", "relu-audit")

BURGERS_INPUTS = dict(BURGERS_FAMILY)
ADVDIFF_SPEEDS = dict(ADVDIFF_FAMILY)

DEFAULTS: Dict[str, dict] = {
    "burgers1d": dict(kappa=0.5, m=64, p=512, t=0.25, x=0.5, u0="sin", linearized=False,
                      mode="point", n_modes=1024),
    "burgers2d": dict(kappa=0.5, m=256, t=0.25, x=0.5, y=-1.0, lattice=16, quad_cells=64),
    "burgers-forced": dict(kappa=0.5, m=64, t=0.25, x=0.5, u0="sin", paths=10000, h_t=0.01,
                           forcing="none", quotient_form=False),
    "advdiff1d": dict(L=1.0, m=64, p=128, x=0.5, a="alternating", a_const=math.nan,
                      f="cos3", f_const=math.nan, mode="point"),
    "reacdiff2d": dict(grid=10, a3="smooth", a3_const=math.nan, f_const=math.nan,
                       boundary="dirichlet", oracle="dense", robin_beta=1.0),
    "advdiff2d": dict(grid=10, a1_const=1.0, a2_const=-0.5, a3_const=0.0, f_const=math.nan,
                      boundary="dirichlet", oracle="dense", robin_beta=1.0),
    "bochner-riesz": dict(R=16, gamma=1.0, f="abs-sin", samples=4096, lattice=8192),
    "relu-audit": dict(epsilon=1e-4, samples=100000, x1_bound=0.01, t_bound=2.0,
                       m=16, epsilon_stage=1e-6, target="rational"),
}


def coerce_params(problem, raw: dict) -> dict:
    """Merge ``raw`` (strings or values) into the problem defaults, typed."""
    if problem not in DEFAULTS:
        raise InputError(f"unknown problem {problem!r}; choose from {', '.join(PROBLEMS)}")
    out = dict(DEFAULTS[problem])
    for key, val in raw.items():
        key = key.replace("-", "_")
        if key not in out:
            raise InputError(f"unknown parameter {key!r} for {problem}")
        ref = out[key]
        if isinstance(val, str):
            if isinstance(ref, bool):
                val = val.strip().lower() in ("1", "true", "yes", "on")
            elif isinstance(ref, int):
                val = int(float(val))
            elif isinstance(ref, float):
                val = float(val)
        out[key] = val
    return out


# ------------------------------------------------------------------ inputs

def _burgers_u0(name):
    if name not in BURGERS_INPUTS:
        raise InputError(f"unknown Burgers input {name!r}; choose from {sorted(BURGERS_INPUTS)}")
    return BURGERS_INPUTS[name]


def _advdiff_speed(params):
    if not math.isnan(params["a_const"]):
        return float(params["a_const"])
    if params["a"] not in ADVDIFF_SPEEDS:
        raise InputError(f"unknown speed {params['a']!r}; choose from {sorted(ADVDIFF_SPEEDS)}")
    return piecewise_speed(ADVDIFF_SPEEDS[params["a"]], params["L"])


def _advdiff_forcing(params):
    if not math.isnan(params["f_const"]):
        c = float(params["f_const"])
        return lambda x: np.full(np.shape(x), c)
    if params["f"] == "cos3":
        return lambda x: np.cos(3 * np.asarray(x, float)) + 1.0
    if params["f"] == "one":
        return lambda x: np.ones(np.shape(x))
    raise InputError(f"unknown forcing {params['f']!r}")


def _forcing_2d(name):
    if name == "none":
        return None
    if name == "cos":
        return lambda x, t: 0.1 * np.cos(x) * np.exp(-t)
    raise InputError(f"unknown forcing {name!r}")


def _potential_2d(kappa):
    return BurgersProblem2D(kappa, lambda x, y: np.cos(x) * np.sin(y),
                            lambda x, y: np.sin(x) * np.cos(y))


# ------------------------------------------------ manufactured FD problems

def manufactured(boundary, a1=0.0, a2=0.0, a3=0.0):
    """Exact ``u`` and matching ``f`` for ``-Lap u + a . grad u + a3 u = f``.

    Dirichlet uses ``sin(pi x) sin(pi y)``; Neumann and Robin-free cases use
    ``cos(pi x) cos(pi y)`` (zero normal derivative, zero mean).
    """
    pi = np.pi

    def coef(c):
        return c if callable(c) else (lambda x, y, c=float(c): np.full(np.shape(x), c))

    c1, c2, c3 = coef(a1), coef(a2), coef(a3)
    if boundary == "dirichlet":
        u = lambda x, y: np.sin(pi * x) * np.sin(pi * y)  # noqa: E731
        ux = lambda x, y: pi * np.cos(pi * x) * np.sin(pi * y)  # noqa: E731
        uy = lambda x, y: pi * np.sin(pi * x) * np.cos(pi * y)  # noqa: E731
    elif boundary == "neumann":
        u = lambda x, y: np.cos(pi * x) * np.cos(pi * y)  # noqa: E731
        ux = lambda x, y: -pi * np.sin(pi * x) * np.cos(pi * y)  # noqa: E731
        uy = lambda x, y: -pi * np.cos(pi * x) * np.sin(pi * y)  # noqa: E731
    else:
        raise InputError("manufactured solutions exist for dirichlet and neumann")

    def f(x, y):
        return 2 * pi * pi * u(x, y) + c1(x, y) * ux(x, y) + c2(x, y) * uy(x, y) + c3(x, y) * u(x, y)

    return u, f


def fd_manufactured_error(cells, boundary="dirichlet", a1=0.0, a2=0.0, a3=0.0, solver="dense"):
    """Max nodal error of the FD solution against the manufactured ``u``."""
    u, f = manufactured(boundary, a1, a2, a3)
    grid = Grid2D.uniform(0.0, 1.0, int(cells))
    system = assemble(grid, a1=a1 or None, a2=a2 or None, a3=a3 or None, f=f, boundary=boundary)
    U = dense_solve(system) if solver == "dense" else cascade_solve(system)[0]
    ref = u(system.points[:, 0], system.points[:, 1])
    if system.pinned is not None:
        ref = ref - ref.mean()
    diff = U - ref
    return float(np.max(np.abs(diff))), float(np.sqrt(np.mean(diff**2))), system


def _smooth_a3(x, y):
    return 1.0 + 0.5 * np.sin(np.pi * x) * np.cos(np.pi * y)


def _fd_system(params, kind, seed=0):
    grid = Grid2D.uniform(0.0, 1.0, int(params["grid"]))
    f = 1.0 if math.isnan(params["f_const"]) else float(params["f_const"])
    bc = params["boundary"]
    if kind == "reacdiff2d":
        if not math.isnan(params["a3_const"]):
            a3 = float(params["a3_const"])
        elif params["a3"] == "smooth":
            a3 = _smooth_a3
        elif params["a3"] == "random":
            rng = np.random.default_rng(seed)
            a3 = lambda x, y: rng.uniform(0.0, 1.0, np.shape(x))  # noqa: E731
        else:
            raise InputError(f"unknown a3 {params['a3']!r}")
        return assemble(grid, a3=a3, f=f, boundary=bc, robin_beta=params["robin_beta"])
    return assemble(grid, a1=params["a1_const"], a2=params["a2_const"],
                    a3=params["a3_const"] or None, f=f, boundary=bc,
                    robin_beta=params["robin_beta"])


# ------------------------------------------------------------ run_problem

def run_problem(problem, params=None, seed=0, dump=None, manifest=None) -> dict:
    """Run one problem and return its scalar results.

    ``dump`` writes a field CSV (or the assembled matrix for FD problems);
    ``manifest`` writes a DeepONet model manifest into that directory.
    """
    p = coerce_params(problem, params or {})
    runner = _RUNNERS[problem]
    return runner(p, seed, dump, manifest)


def _run_burgers1d(p, seed, dump, manifest):
    u0 = _burgers_u0(p["u0"])
    problem = BurgersProblem1D.from_callable(u0, p["m"], p["kappa"])
    g = float(burgers_rational(problem, p["x"], p["t"], linearized=p["linearized"]))
    ref = float(spectral_reference(u0, p["kappa"], p["x"], p["t"], n_modes=p["n_modes"]))
    out = dict(rational=g, spectral=ref, error=abs(g - ref))
    if dump:
        y = np.linspace(-np.pi, np.pi, 257)
        vals = burgers_rational(problem, y, p["t"])
        _dump_field(dump, ("y", "rational", "spectral"),
                    [y, vals, spectral_reference(u0, p["kappa"], y, p["t"])])
    if manifest:
        model = burgers_deeponet(u0, p["m"], p["p"], p["kappa"], p["t"])
        out["manifest"] = write_manifest(model, manifest, "burgers1d")
    return out


def _run_burgers2d(p, seed, dump, manifest):
    side = _square_side(p["m"])
    problem = _potential_2d(p["kappa"])
    r = rational_operator_2d(problem, side, p["x"], p["y"], p["t"])
    e = cole_hopf_exact_2d(problem, p["x"], p["y"], p["t"], p["quad_cells"])
    return dict(u=float(r.u[0, 0]), v=float(r.v[0, 0]), u_exact=float(e.u[0, 0]),
                v_exact=float(e.v[0, 0]),
                error=max(abs(float(r.u[0, 0] - e.u[0, 0])), abs(float(r.v[0, 0] - e.v[0, 0]))))


def _run_forced(p, seed, dump, manifest):
    u0 = _burgers_u0(p["u0"])
    cfg = ForcedBurgersConfig.from_callable(u0, p["m"], p["kappa"], forcing=_forcing_2d(p["forcing"]),
                                            path_count=p["paths"], h_t=p["h_t"], seed=seed,
                                            quotient_form=p["quotient_form"])
    res = forced_burgers_mc(cfg, p["x"], p["t"])
    out = dict(estimate=res.value, std_error=res.std_error, paths=res.path_count)
    if p["forcing"] == "none":
        ref = float(cole_hopf_exact(BurgersProblem1D(cfg.kappa, cfg.u0), p["x"], p["t"]))
        out.update(cole_hopf=ref, z_score=abs(res.value - ref) / res.std_error)
    return out


def _run_advdiff1d(p, seed, dump, manifest):
    problem = AdvDiffProblem1D.uniform(p["L"], p["m"], _advdiff_speed(p), _advdiff_forcing(p))
    ex = float(exact_solution(problem, p["x"]))
    disc = float(discrete_operator(problem, p["x"]))
    if dump:
        y = problem.grid.nodes
        _dump_field(dump, ("x", "discrete", "exact"),
                    [y, discrete_operator(problem, y), exact_solution(problem, y)])
    return dict(exact=ex, discrete=disc, error=abs(ex - disc))


def _run_fd(kind):
    def run(p, seed, dump, manifest):
        system = _fd_system(p, kind, seed)
        U, log = cascade_solve(system)
        out = dict(unknowns=system.size, updates=len(system.updates),
                   u_max=float(np.max(np.abs(U))),
                   min_denominator=float(min(map(abs, log), default=1.0)))
        if p["oracle"] == "dense":
            D = dense_solve(system)
            out["gap"] = float(np.max(np.abs(U - D)))
        if dump:
            dump_matrix(dump, system.full_matrix())
        return out
    return run


def _run_bochner(p, seed, dump, manifest):
    f = _named_function(p["f"])
    R = float(p["R"])
    B = bochner_riesz(f, R, p["gamma"], samples=p["samples"])
    n = int(p["lattice"])
    x = -np.pi + 2 * np.pi * np.arange(n) / n
    err = float(np.sqrt(np.sum((B(x) - f(x)) ** 2) * 2 * np.pi / n))
    w2 = modulus_omega2(f, 1.0 / R, q=2)
    return dict(l2_error=err, omega2=w2, ratio=err / w2)


def _run_relu(p, seed, dump, manifest):
    if p["target"] == "blessed":
        res = _blessed_cell(p, p["m"], seed)
        return dict(error=res.error_linf, width=res.aux1, depth=res.aux2)
    net = compile_rational_R(p["epsilon"], p["x1_bound"], p["t_bound"])
    e_inf, e_rms = _compiled_errors(net, p["samples"], seed)
    if dump:
        net.net.save(dump)
    return dict(max_error=e_inf, rms_error=e_rms, bound=net.error_bound, size=net.size,
                depth=net.depth, width=net.width)


_RUNNERS: Dict[str, Callable] = {
    "burgers1d": _run_burgers1d,
    "burgers2d": _run_burgers2d,
    "burgers-forced": _run_forced,
    "advdiff1d": _run_advdiff1d,
    "reacdiff2d": _run_fd("reacdiff2d"),
    "advdiff2d": _run_fd("advdiff2d"),
    "bochner-riesz": _run_bochner,
    "relu-audit": _run_relu,
}


def _named_function(name):
    if name == "abs-sin":
        return lambda x: np.abs(np.sin(x))
    if name == "sin":
        return np.sin
    raise InputError(f"unknown function {name!r}")


def _square_side(m):
    side = int(round(math.sqrt(m)))
    if side * side != int(m):
        raise ParameterError(f"m = {m} is not a perfect square")
    return side


def _dump_field(path, names, cols):
    lines = [",".join(names)]
    for row in zip(*cols):
        lines.append(",".join(repr(float(v)) for v in row))
    write_atomic(path, "\n".join(lines) + "\n")


def _compiled_errors(net, samples, seed):
    from .fd_cascade import rational_R

    rng = np.random.default_rng(seed)
    X = rng.uniform(net.lower, net.upper, size=(int(samples), 5))
    err = net(X)[:, 0] - rational_R(*X.T)
    return float(np.max(np.abs(err))), float(np.sqrt(np.mean(err**2)))


def _blessed_cell(p, m, seed):
    side = _square_side(m)
    grid = Grid2D.uniform(0.0, 1.0, side + 1)
    rng = np.random.default_rng(seed)
    a3 = rng.uniform(0.0, 1.0, side * side)
    system = assemble(grid, a3=lambda x, y: a3, f=lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y))
    U, _ = cascade_solve(system)
    x1 = p.get("x1_bound_blessed")
    t1 = p.get("t_bound_blessed")
    net = blessed_cascade_net(system, p["epsilon_stage"], x1_bound=x1, t_bound=t1)
    UN = net()
    cap = net.capacity()
    d = UN - U
    return CellResult(float(np.max(np.abs(d))), float(np.sqrt(np.mean(d**2))),
                      cap["width"], cap["depth"])


# ------------------------------------------------------------ sweep cells

def sweep_cell(problem, axis) -> Callable:
    """Cell function ``(params, axis, value, seed) -> CellResult``."""
    key = (problem, axis)
    if key not in _CELLS:
        axes = sorted(a for (pr, a) in _CELLS if pr == problem)
        raise InputError(f"{problem} has no {axis!r} sweep; available: {axes}")
    cell = _CELLS[key]

    def run(params, axis, value, seed):
        return cell(coerce_params(problem, _known(problem, params)), value, seed, params)
    return run


def _known(problem, params):
    return {k: v for k, v in params.items() if k.replace("-", "_") in DEFAULTS[problem]}


def _cell_burgers_m(p, value, seed, raw):
    u0 = _burgers_u0(p["u0"])
    if p["mode"] == "deeponet":
        return _burgers_deeponet_cell(int(value), p["p"], p)
    problem = BurgersProblem1D.from_callable(u0, int(value), p["kappa"])
    g = float(burgers_rational(problem, p["x"], p["t"]))
    ref = float(spectral_reference(u0, p["kappa"], p["x"], p["t"], n_modes=p["n_modes"]))
    l2 = error_norm(lambda y: spectral_reference(u0, p["kappa"], y, p["t"], n_modes=p["n_modes"]),
                    lambda y: burgers_rational(problem, y, p["t"]), (-np.pi, np.pi), "L2",
                    resolution=64)
    return CellResult(abs(g - ref), l2, problem.h, g)


def _burgers_deeponet_cell(m, p_out, p):
    res = operator_error(lambda u: burgers_deeponet(u, m, p_out, p["kappa"], p["t"]),
                         lambda u: burgers_reference(u, p["kappa"], p["t"], p["n_modes"]),
                         BURGERS_FAMILY, (-np.pi, np.pi), resolution=max(m, p_out))
    names = [n for n, _ in BURGERS_FAMILY]
    return CellResult(res.error_linf, res.error_l2, 3 * p_out, names.index(res.worst_input))


def _cell_burgers_p(p, value, seed, raw):
    return _burgers_deeponet_cell(p["m"], int(value), p)


def _cell_burgers2d(p, value, seed, raw):
    side = _square_side(int(value))
    problem = _potential_2d(p["kappa"])
    n = int(p["lattice"])
    pts = -np.pi + 2 * np.pi * (np.arange(n) + 0.37) / n
    r = rational_operator_2d(problem, side, pts, pts, p["t"])
    e = cole_hopf_exact_2d(problem, pts, pts, p["t"], p["quad_cells"])
    eu = np.abs(r.u - e.u)
    ev = np.abs(r.v - e.v)
    linf = float(max(eu.max(), ev.max()))
    l2 = float(np.sqrt(np.mean(eu**2 + ev**2)) * 2 * np.pi)
    return CellResult(linf, l2, float(eu.max()), float(ev.max()))


def _cell_forced(p, value, seed, raw):
    q = dict(p)
    q["paths"] = int(value)
    out = _run_forced(q, seed, None, None)
    ref = out.get("cole_hopf", math.nan)
    err = abs(out["estimate"] - ref)
    return CellResult(err, err, out["std_error"], out["estimate"])


def _cell_advdiff_m(p, value, seed, raw):
    if p["mode"] == "deeponet":
        return _advdiff_deeponet_cell(int(value), p["p"], p)
    problem = AdvDiffProblem1D.uniform(p["L"], int(value), _advdiff_speed(p), _advdiff_forcing(p))
    ex = lambda y: exact_solution(problem, y)  # noqa: E731
    di = lambda y: discrete_operator(problem, y)  # noqa: E731
    dom = (0.0, p["L"])
    linf = error_norm(ex, di, dom, "Linf", problem.grid.nodes)
    l2 = error_norm(ex, di, dom, "L2", problem.grid.nodes)
    return CellResult(linf, l2, float(di(p["x"])), float(ex(p["x"])))


def _advdiff_deeponet_cell(m, p_out, p):
    f = _advdiff_forcing(p)
    res = operator_error(lambda a: advdiff_deeponet(a, m, p_out, p["L"], f),
                         lambda a: advdiff_reference(a, p["L"], f),
                         ADVDIFF_FAMILY, (0.0, p["L"]), resolution=max(m, p_out))
    names = [n for n, _ in ADVDIFF_FAMILY]
    return CellResult(res.error_linf, res.error_l2, 3 * (p_out + 1), names.index(res.worst_input))


def _cell_advdiff_p(p, value, seed, raw):
    return _advdiff_deeponet_cell(p["m"], int(value), p)


def _fd_cell(kind):
    def cell(p, value, seed, raw):
        bc = p["boundary"]
        if kind == "reacdiff2d":
            a1 = a2 = 0.0
            a3 = 0.0 if bc == "neumann" else (_smooth_a3 if math.isnan(p["a3_const"]) else p["a3_const"])
        else:
            a1 = lambda x, y: p["a1_const"] * (1.0 + 0.5 * y)  # noqa: E731
            a2 = lambda x, y: p["a2_const"] * (1.0 - 0.5 * x)  # noqa: E731
            a3 = 0.0 if bc == "neumann" else p["a3_const"]
        linf, l2, system = fd_manufactured_error(int(value), bc, a1, a2, a3)
        gap = math.nan
        if system.size <= 400:
            gap = float(np.max(np.abs(cascade_solve(system)[0] - dense_solve(system))))
        return CellResult(linf, l2, 1.0 / int(value), gap)
    return cell


def _cell_bochner(p, value, seed, raw):
    q = dict(p)
    q["R"] = float(value)
    out = _run_bochner(q, seed, None, None)
    return CellResult(out["l2_error"], out["l2_error"], out["omega2"], out["ratio"])


def _cell_relu_theta(p, value, seed, raw):
    net = compile_rational_R(10.0 ** (-float(value)), p["x1_bound"], p["t_bound"])
    e_inf, e_rms = _compiled_errors(net, p["samples"], seed)
    return CellResult(e_inf, e_rms, net.size, net.depth)


def _cell_relu_m(p, value, seed, raw):
    q = dict(p)
    q["x1_bound_blessed"] = raw.get("x1_bound_blessed")
    q["t_bound_blessed"] = raw.get("t_bound_blessed")
    return _blessed_cell(q, int(value), seed)


_CELLS = {
    ("burgers1d", "m"): _cell_burgers_m,
    ("burgers1d", "p"): _cell_burgers_p,
    ("burgers2d", "m"): _cell_burgers2d,
    ("burgers-forced", "N_paths"): _cell_forced,
    ("advdiff1d", "m"): _cell_advdiff_m,
    ("advdiff1d", "p"): _cell_advdiff_p,
    ("reacdiff2d", "m"): _fd_cell("reacdiff2d"),
    ("advdiff2d", "m"): _fd_cell("advdiff2d"),
    ("bochner-riesz", "R"): _cell_bochner,
    ("relu-audit", "theta_size"): _cell_relu_theta,
    ("relu-audit", "m"): _cell_relu_m,
}

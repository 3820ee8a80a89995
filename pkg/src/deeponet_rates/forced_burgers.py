"""Monte Carlo evaluation of the forced periodic Burgers equation.

``u_t + u u_x = kappa u_xx + f`` is mapped by Cole-Hopf to
``v_t = kappa v_xx - F v`` with ``F = (1/2kappa) int f dx``.  Feynman-Kac
writes ``v`` and ``v_x`` as path expectations over ``X_s = x + sqrt(2kappa) B_s``
and the ratio ``-2 kappa v_x / v`` becomes a ratio of path sums.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from ._errors import InputError, NumericalError, ParameterError
from .burgers import KAPPA_MIN
from .grids import Grid1D, PiecewiseFunction, antiderivative, interpolate, sample_input

BLOCK_PATHS = 4096


@dataclass(frozen=True, eq=False)
class ForcedBurgersConfig:
    """Inputs of the path estimator.

    Parameters
    ----------
    kappa : float
        Viscosity.
    u0 : PiecewiseFunction
        Piecewise-linear periodic initial condition (nodal values ``u_{0,i}``).
    forcing : callable or None
        ``f(x, t)``; sampled at the ``u0`` grid nodes on every time level and
        interpolated linearly in ``x``.  ``None`` means ``f = 0``.
    path_count : int
        Number of Brownian paths ``N``.
    h_t : float
        Time step of the path lattice.
    seed : int
        Root seed of the counter-based generator.
    quotient_form : bool
        Replace ``a`` by ``(exp(a h) - 1) / h`` in the numerator weights, the
        finite-difference form that makes every term an exponential.
    """

    kappa: float
    u0: PiecewiseFunction
    forcing: Optional[Callable] = None
    path_count: int = 10_000
    h_t: float = 0.01
    seed: int = 0
    quotient_form: bool = False

    def __post_init__(self):
        if not self.kappa >= KAPPA_MIN:
            raise ParameterError(f"kappa must be >= {KAPPA_MIN}")
        if int(self.path_count) < 2:
            raise ParameterError("path_count must be at least 2")
        if not self.h_t > 0:
            raise ParameterError("h_t must be positive")
        g = self.u0.grid
        if not isinstance(g, Grid1D) or not g.periodic or self.u0.order != 1:
            raise InputError("u0 must be an order-1 function on a periodic 1D grid")

    @classmethod
    def from_callable(cls, u0, m, kappa, **kw):
        grid = Grid1D.uniform(-np.pi, np.pi, m, periodic=True)
        return cls(kappa, sample_input(u0, grid, order=1), **kw)


class MonteCarloResult(NamedTuple):
    value: float
    std_error: float
    path_count: int


def path_generator(seed, block):
    """Independent Philox stream for one block of paths."""
    return np.random.Generator(np.random.Philox(key=(int(block) << 64) | int(seed)))


def _forcing_levels(config, t_star, steps):
    """Piecewise-linear-in-x forcing at the reversed time levels ``t* - s_n``."""
    g = config.u0.grid
    dt = t_star / steps
    levels = []
    for n in range(steps):
        tau = t_star - n * dt
        vals = np.broadcast_to(np.asarray(config.forcing(g.value_nodes, tau), float), (g.n_values,))
        if not np.all(np.isfinite(vals)):
            raise InputError(f"non-finite forcing sample at time {tau}")
        levels.append(PiecewiseFunction(g, vals.copy(), 1))
    return levels


def _block_terms(config, x_star, t_star, steps, levels, rng, n):
    kappa = config.kappa
    dt = t_star / steps
    scale = np.sqrt(2.0 * kappa * dt)
    X = np.full(n, float(x_star))
    log_w = np.zeros(n)
    f_int = np.zeros(n)
    if levels is None:
        X = X + np.sqrt(2.0 * kappa * t_star) * rng.standard_normal(n)
    else:
        # left-endpoint sums over s_n = n dt
        for lev in levels:
            log_w -= antiderivative(lev, X) / (2.0 * kappa) * dt
            f_int += interpolate(lev, X) * dt
            X = X + scale * rng.standard_normal(n)
    log_w -= antiderivative(config.u0, X) / (2.0 * kappa)
    u_end = interpolate(config.u0, X)
    if config.quotient_form:
        hx = config.u0.grid.h
        a = u_end / (2.0 * kappa)
        b = f_int / (2.0 * kappa)
        payload = 2.0 * kappa * (np.expm1(a * hx) / hx + np.expm1(b * dt) / dt)
    else:
        payload = u_end + f_int
    return log_w, payload


def forced_burgers_mc(config: ForcedBurgersConfig, x_star, t_star) -> MonteCarloResult:
    """Ratio estimator of ``u(x*, t*)`` with a delta-method standard error.

    Paths are drawn in blocks of ``BLOCK_PATHS``, each from its own Philox
    stream, so the result depends only on ``seed`` and ``path_count``.
    """
    if not t_star > 0:
        raise ParameterError("t_star must be positive")
    N = int(config.path_count)
    steps = max(1, int(np.ceil(t_star / config.h_t - 1e-9)))
    levels = None if config.forcing is None else _forcing_levels(config, t_star, steps)
    log_w, payload = [], []
    for block, start in enumerate(range(0, N, BLOCK_PATHS)):
        n = min(BLOCK_PATHS, N - start)
        lw, pl = _block_terms(config, x_star, t_star, steps, levels,
                              path_generator(config.seed, block), n)
        log_w.append(lw)
        payload.append(pl)
    log_w = np.concatenate(log_w)
    payload = np.concatenate(payload)
    # common factor cancels in the ratio
    w = np.exp(log_w - log_w.max())
    den = np.sum(w)
    if not den > 0 or not np.isfinite(den):
        raise NumericalError("path-weight sum is not positive")
    value = float(np.sum(w * payload) / den)
    resid = w * (payload - value)
    wbar = den / N
    se = float(np.sqrt(np.sum(resid * resid) / (N * (N - 1))) / wbar)
    return MonteCarloResult(value, se, N)

"""Solution operators of the periodic viscous Burgers equation on [-pi, pi).

The Cole-Hopf substitution ``u = -2 kappa v_x / v`` turns Burgers into the
heat equation.  For a piecewise-linear initial condition ``u0`` the heat
datum ``v0 = exp(-(1/2kappa) int u0)`` is known in closed form per cell, and
replacing it by interpolants gives a rational function of the nodal values
``v_j = prod_{i<=j} V_i`` (the finite-dimensional operator ``G_m``).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import ndtr

from ._errors import InputError, NumericalError, ParameterError
from .grids import Grid1D, PiecewiseFunction, antiderivative, sample_input
from .norms import composite_gauss, refined_edges

KAPPA_MIN = 1e-3
MEAN_TOL = 1e-12
# exp(-z^2/2) < 1e-16 beyond z = sqrt(2 ln 1e16)
_TAIL_Z = np.sqrt(2.0 * np.log(1e16))


@dataclass(frozen=True, eq=False)
class BurgersProblem1D:
    """Periodic Burgers data: viscosity and a zero-mean piecewise-linear ``u0``."""

    kappa: float
    u0: PiecewiseFunction
    M0: Optional[float] = None
    M1: Optional[float] = None

    def __post_init__(self):
        if not self.kappa >= KAPPA_MIN:
            raise ParameterError(f"kappa must be >= {KAPPA_MIN}, got {self.kappa}")
        g = self.u0.grid
        if not isinstance(g, Grid1D) or not g.periodic or self.u0.order != 1:
            raise InputError("u0 must be an order-1 function on a periodic 1D grid")
        full = self.u0.full_values()
        mean = float(np.sum(0.5 * g.steps * (full[:-1] + full[1:]))) / g.period
        if abs(mean) > MEAN_TOL * max(1.0, float(np.max(np.abs(full)))):
            raise InputError(
                f"u0 has mean {mean:.3e} over one period; shift it first with "
                "galilean_shift (u(x,t) = v(x - mean*t, t) + mean)"
            )
        sup = float(np.max(np.abs(full)))
        slope = float(np.max(np.abs(np.diff(full) / g.steps)))
        M0 = sup if self.M0 is None else float(self.M0)
        M1 = slope if self.M1 is None else float(self.M1)
        if sup > M0 * (1 + 1e-12) or slope > M1 * (1 + 1e-12):
            raise InputError("u0 violates its declared bounds M0 / M1")
        object.__setattr__(self, "M0", M0)
        object.__setattr__(self, "M1", M1)

    @classmethod
    def from_callable(cls, f, m, kappa, **bounds):
        """Hat interpolant of ``f`` on ``m`` uniform cells of [-pi, pi]."""
        grid = Grid1D.uniform(-np.pi, np.pi, m, periodic=True)
        return cls(kappa, sample_input(f, grid, order=1), **bounds)

    @property
    def grid(self) -> Grid1D:
        return self.u0.grid

    @property
    def h(self) -> float:
        return self.grid.h

    def v0(self, y):
        """Exact heat datum ``exp(-(1/2kappa) int_{x_0}^y u0)``."""
        return np.exp(-antiderivative(self.u0, y) / (2.0 * self.kappa))


def galilean_shift(f, m, kappa):
    """Split a nonzero-mean initial condition into mean and zero-mean parts.

    Returns ``(problem, mean, lift)`` where ``problem`` carries ``u0 - mean``
    and ``lift(solver)`` turns a solver ``(x, t) -> v`` of the zero-mean
    problem into the solution ``u(x, t) = v(x - mean * t, t) + mean``.
    """
    grid = Grid1D.uniform(-np.pi, np.pi, m, periodic=True)
    raw = sample_input(f, grid, order=1)
    full = raw.full_values()
    mean = float(np.sum(0.5 * grid.steps * (full[:-1] + full[1:]))) / grid.period
    problem = BurgersProblem1D(kappa, PiecewiseFunction(grid, raw.values - mean, 1))

    def lift(solver):
        return lambda x, t: solver(np.asarray(x) - mean * t, t) + mean

    return problem, mean, lift


@dataclass(frozen=True, eq=False)
class ColeHopfState:
    """Multiplicative factors ``V_j`` and nodal heat data ``v_j = prod V_i``."""

    V: np.ndarray
    v0_nodes: np.ndarray

    @classmethod
    def from_problem(cls, problem: BurgersProblem1D, linearized=False):
        """Build ``V_0 = 1``, ``V_j = exp(-(u_j + u_{j-1}) h_j / (4 kappa))``.

        With ``linearized=True`` the exponentials are replaced by their
        first-order Taylor polynomials ``1 - (u_j + u_{j-1}) h_j / (4 kappa)``.
        """
        full = problem.u0.full_values()
        h = problem.grid.steps
        m = problem.grid.cells
        arg = (full[1:m] + full[: m - 1]) * h[: m - 1] / (4.0 * problem.kappa)
        V = np.ones(m)
        V[1:] = 1.0 - arg if linearized else np.exp(-arg)
        if np.any(V <= 0):
            raise NumericalError("non-positive Cole-Hopf factor; refine the grid")
        return cls(V, np.cumprod(V))


@dataclass(frozen=True, eq=False)
class KernelCoefficients:
    """Kernel weights of the rational operator at one or many ``(x, t)``.

    ``c1`` and ``c2`` have shape ``(..., m)``; ``c1`` weights the numerator
    (already multiplied by ``-2 kappa``) and ``c2`` the denominator.
    """

    c1: np.ndarray
    c2: np.ndarray
    x: np.ndarray
    t: float


def n_kernel_shifts(t, kappa, period=2 * np.pi):
    """Periodization half-width ``L*``: Gaussian tail below 1e-16, at least 3."""
    sigma = np.sqrt(2.0 * kappa * t)
    return max(3, int(np.ceil(_TAIL_Z * sigma / period)) + 1)


def _check_time(t, kappa):
    if not t > 0:
        raise ParameterError(f"time must be positive, got {t}")
    if not kappa > 0:
        raise ParameterError(f"kappa must be positive, got {kappa}")


def heat_kernel(x, y, t, kappa, derivative=0):
    """Free-space heat kernel ``K(x, y, t)`` or its x-derivative."""
    _check_time(t, kappa)
    z = np.asarray(y, float) - np.asarray(x, float)
    s2 = 2.0 * kappa * t
    k = np.exp(-z * z / (2.0 * s2)) / np.sqrt(2.0 * np.pi * s2)
    return k if derivative == 0 else z / s2 * k


def heat_kernel_periodized(x, y, t, kappa, derivative=0, n_shifts=None, period=2 * np.pi):
    """``sum_{|l| <= L*} K(x, y + l * period, t)`` (or of ``d/dx K``)."""
    _check_time(t, kappa)
    if derivative not in (0, 1):
        raise ParameterError("derivative must be 0 or 1")
    L = n_kernel_shifts(t, kappa, period) if n_shifts is None else int(n_shifts)
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    out = np.zeros(np.broadcast(x, y).shape)
    # sum from the far shifts inward so the dominant term is added last
    for l in sorted(range(-L, L + 1), key=abs, reverse=True):
        out = out + heat_kernel(x, y + l * period, t, kappa, derivative)
    return out


def _gauss_interval_moments(za, zb, sigma):
    """Moments ``int z^k phi_sigma(z) dz`` over ``[za, zb]`` for k = 0, 1, 2."""
    sa, sb = za / sigma, zb / sigma
    upper = np.where(sa > 0, ndtr(-sa) - ndtr(-sb), ndtr(sb) - ndtr(sa))
    g = lambda z: np.exp(-0.5 * (z / sigma) ** 2) / (np.sqrt(2 * np.pi) * sigma)
    ga, gb = g(za), g(zb)
    s2 = sigma * sigma
    I0 = upper
    I1 = s2 * (ga - gb)
    I2 = s2 * I0 + s2 * (za * ga - zb * gb)
    return I0, I1, I2


def cell_kernel_moments(edges, x, t, kappa, period=2 * np.pi, n_shifts=None):
    """Periodized kernel integrals over each cell ``[e_j, e_{j+1}]``.

    Returns four arrays of shape ``x.shape + (cells,)``::

        K0 = int K,            K1 = int K (y - e_j),
        D0 = int dK/dx,        D1 = int dK/dx (y - e_j)

    all in closed form (normal CDF and Gaussian values per shift).
    """
    _check_time(t, kappa)
    edges = np.asarray(edges, float)
    x = np.asarray(x, float)[..., None]
    a, b = edges[:-1], edges[1:]
    sigma = np.sqrt(2.0 * kappa * t)
    s2 = sigma * sigma
    L = n_kernel_shifts(t, kappa, period) if n_shifts is None else int(n_shifts)
    K0 = K1 = D0 = D1 = 0.0
    for l in sorted(range(-L, L + 1), key=abs, reverse=True):
        # z = y + l*period - x, and y - a = z + c with c = x - l*period - a
        za = a + l * period - x
        zb = b + l * period - x
        c = -za
        I0, I1, I2 = _gauss_interval_moments(za, zb, sigma)
        K0 = K0 + I0
        K1 = K1 + c * I0 + I1
        D0 = D0 + I1 / s2
        D1 = D1 + (c * I1 + I2) / s2
    return K0, K1, D0, D1


def kernel_coefficients(grid: Grid1D, x, t, kappa, n_shifts=None) -> KernelCoefficients:
    """Weights ``c1_j`` (hat-weighted ``dK/dx`` integrals times ``-2 kappa``)
    and ``c2_j`` (``K`` integrated over ``[x_j, x_{j+1})``)."""
    _check_time(t, kappa)
    if not grid.periodic:
        raise InputError("kernel coefficients need a periodic grid")
    K0, _, D0, D1 = cell_kernel_moments(grid.nodes, x, t, kappa, grid.period, n_shifts)
    h = grid.steps
    rise = D1 / h  # weight (y - x_j)/h_j on cell j, belongs to node j+1
    fall = D0 - rise  # weight (x_{j+1} - y)/h_j, belongs to node j
    c1 = -2.0 * kappa * (fall + np.roll(rise, 1, axis=-1))
    return KernelCoefficients(c1=c1, c2=K0, x=np.asarray(x, float), t=float(t))


def hat_kernel_weights(grid: Grid1D, x, t, kappa, n_shifts=None):
    """``(int K L_j, int dK/dx L_j, int_{x_j}^{x_{j+1}} K)`` for the periodic
    hat basis ``L_j``; each array has shape ``x.shape + (m,)``."""
    _check_time(t, kappa)
    K0, K1, D0, D1 = cell_kernel_moments(grid.nodes, x, t, kappa, grid.period, n_shifts)
    h = grid.steps
    k_rise = K1 / h
    d_rise = D1 / h
    khat = (K0 - k_rise) + np.roll(k_rise, 1, axis=-1)
    dhat = (D0 - d_rise) + np.roll(d_rise, 1, axis=-1)
    return khat, dhat, K0


def rational_operator_1d(state: ColeHopfState, coeffs: KernelCoefficients):
    """``G_m = (sum_j v_j c1_j) / (sum_j v_j c2_j)``."""
    v = state.v0_nodes
    if coeffs.c1.shape[-1] != v.size:
        raise InputError("coefficient count does not match the Cole-Hopf state")
    den = coeffs.c2 @ v
    if np.any(den <= 0):
        raise NumericalError("rational operator denominator is not positive")
    return (coeffs.c1 @ v) / den


def burgers_rational(problem: BurgersProblem1D, x, t, linearized=False):
    """Convenience wrapper: ``G_m(u_{0,m}; x, t)`` for an array of ``x``."""
    state = ColeHopfState.from_problem(problem, linearized=linearized)
    coeffs = kernel_coefficients(problem.grid, x, t, problem.kappa)
    return rational_operator_1d(state, coeffs)


def _exact_quadrature(problem, quad_refine, order=16):
    edges = refined_edges(problem.grid.nodes, quad_refine)
    y, w = composite_gauss(edges, order)
    y, w = y.ravel(), w.ravel()
    return y, w * problem.v0(y)


def cole_hopf_exact(problem: BurgersProblem1D, x, t, quad_refine=4, chunk=256):
    """Reference ``G(u0)(x, t)`` from the exact ``v0`` and periodized kernel.

    ``v0`` is integrated against the kernel with a 16-point Gauss-Legendre
    rule on every cell split ``quad_refine`` times.
    """
    if quad_refine < 1:
        raise ParameterError("quad_refine must be >= 1")
    kappa = problem.kappa
    _check_time(t, kappa)
    y, wv = _exact_quadrature(problem, quad_refine)
    x = np.asarray(x, float)
    flat = x.ravel()
    out = np.empty(flat.size)
    floor = np.exp(-np.pi * problem.M0 / kappa) * 0.5
    for s in range(0, flat.size, chunk):
        xs = flat[s : s + chunk, None]
        num = heat_kernel_periodized(xs, y, t, kappa, 1) @ wv
        den = heat_kernel_periodized(xs, y, t, kappa, 0) @ wv
        if np.any(den < floor):
            raise NumericalError("Cole-Hopf denominator below its positivity floor")
        out[s : s + chunk] = -2.0 * kappa * num / den
    return out.reshape(x.shape)


def _spectral_heat(v0_samples, start, period, kappa, x, t):
    n = v0_samples.size
    vhat = np.fft.rfft(v0_samples) / n
    k = 2 * np.pi * np.fft.rfftfreq(n, d=period / n)
    vhat = vhat * np.exp(-kappa * k * k * t)
    weight = np.full(k.size, 2.0)
    weight[0] = 1.0
    if n % 2 == 0:
        weight[-1] = 1.0
    x = np.asarray(x, float)
    phase = np.exp(1j * np.multiply.outer(x - start, k))
    v = (phase * (weight * vhat)).real.sum(axis=-1)
    vx = (phase * (1j * k * weight * vhat)).real.sum(axis=-1)
    return -2.0 * kappa * vx / v


def cole_hopf_spectral(problem: BurgersProblem1D, x, t, n_modes=1024):
    """Independent spectral route: solve the heat equation exactly in Fourier
    space from ``n_modes`` samples of ``v0`` and return ``-2 kappa v_x / v``."""
    _check_time(t, problem.kappa)
    g = problem.grid
    ys = g.start + g.period * np.arange(n_modes) / n_modes
    return _spectral_heat(problem.v0(ys), g.start, g.period, problem.kappa, x, t)


def spectral_reference(u0, kappa, x, t, n_modes=1024, start=-np.pi, period=2 * np.pi):
    """Spectral Cole-Hopf solution for a smooth zero-mean callable ``u0``.

    The antiderivative of ``u0`` is taken in Fourier space, so no grid
    interpolation enters the reference.
    """
    _check_time(t, kappa)
    ys = start + period * np.arange(n_modes) / n_modes
    uhat = np.fft.fft(np.asarray(u0(ys), float))
    if abs(uhat[0]) / n_modes > 1e-10 * max(1.0, np.abs(uhat).max() / n_modes):
        raise InputError("u0 must have zero mean over one period")
    k = 2 * np.pi * np.fft.fftfreq(n_modes, d=period / n_modes)
    Uhat = np.zeros_like(uhat)
    Uhat[1:] = uhat[1:] / (1j * k[1:])
    U = np.fft.ifft(Uhat).real
    U0 = U - U[0]
    return _spectral_heat(np.exp(-U0 / (2.0 * kappa)), start, period, kappa, x, t)

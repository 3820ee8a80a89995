"""Fourier expansions on ``[-pi, pi)^d``, Bochner-Riesz means and moduli of
smoothness."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ._errors import InputError, ParameterError

OMEGA2_SHIFTS = 64


def _multi_indices(d, R):
    """All integer ``k`` in ``Z^d`` with ``|k| <= R``, in lexicographic order."""
    r = int(np.floor(R))
    ks = [k for k in itertools.product(range(-r, r + 1), repeat=d) if sum(c * c for c in k) <= R * R]
    return np.array(ks, dtype=int).reshape(-1, d)


@dataclass(frozen=True, eq=False)
class FourierExpansion:
    """Truncated Fourier series ``sum_k c_k exp(i k.x)`` on ``[-pi, pi)^d``.

    ``indices`` lists every multi-index with ``|k| <= radius``;
    ``coefficients`` holds the matching complex coefficients.
    """

    indices: np.ndarray
    coefficients: np.ndarray
    radius: float
    gamma: float = 0.0

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=int)
        if idx.ndim != 2:
            raise InputError("indices must be a 2D array of multi-indices")
        coef = np.asarray(self.coefficients, dtype=complex)
        if coef.shape != (idx.shape[0],):
            raise InputError("one coefficient per multi-index is required")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "coefficients", coef)

    @property
    def dim(self) -> int:
        return self.indices.shape[1]

    @classmethod
    def from_callable(cls, f, radius, dim=1, samples=None):
        """Coefficients of ``f`` up to ``radius`` from equispaced FFT samples.

        ``samples`` defaults to ``4 * ceil(radius)`` points per axis.
        """
        if radius <= 0:
            raise ParameterError("radius must be positive")
        n = samples or 4 * int(np.ceil(radius))
        n = max(n, 2 * int(np.floor(radius)) + 1)
        x = -np.pi + 2 * np.pi * np.arange(n) / n
        if dim == 1:
            vals = np.asarray(f(x), dtype=float)
        elif dim == 2:
            X, Y = np.meshgrid(x, x, indexing="ij")
            vals = np.asarray(f(X, Y), dtype=float)
        else:
            raise InputError("only d = 1 and d = 2 are supported")
        spec = np.fft.fftn(vals) / vals.size
        idx = _multi_indices(dim, radius)
        # the samples start at -pi, so shift phases back to the x = 0 origin
        phase = np.exp(1j * np.pi * idx.sum(axis=1))
        coef = spec[tuple((idx % n).T)] * phase
        return cls(idx, coef, float(radius))

    def __call__(self, *x):
        if len(x) != self.dim:
            raise InputError(f"expected {self.dim} coordinate arrays")
        pts = np.broadcast_arrays(*[np.asarray(c, dtype=float) for c in x])
        shape = pts[0].shape
        flat = np.stack([p.ravel() for p in pts], axis=1)
        phase = flat @ self.indices.T
        out = np.exp(1j * phase) @ self.coefficients
        return out.real.reshape(shape)

    def coefficient(self, k):
        k = np.atleast_1d(k)
        hit = np.flatnonzero(np.all(self.indices == k, axis=1))
        return self.coefficients[hit[0]] if hit.size else 0.0


def bochner_riesz(f, radius, gamma, dim=1, samples=None) -> FourierExpansion:
    """Bochner-Riesz mean of order ``gamma`` and radius ``radius``.

    ``f`` is either a :class:`FourierExpansion` (typically of wider support)
    or a callable sampled by FFT.  Coefficients are damped by
    ``(1 - |k|^2 / R^2)^gamma`` and dropped outside ``|k| <= R``.
    """
    if radius <= 0:
        raise ParameterError("Bochner-Riesz radius must be positive")
    if gamma < 0:
        raise ParameterError("Bochner-Riesz exponent must be non-negative")
    if not isinstance(f, FourierExpansion):
        f = FourierExpansion.from_callable(f, radius, dim=dim, samples=samples)
    k2 = np.sum(f.indices**2, axis=1).astype(float)
    keep = k2 <= radius * radius
    damp = np.power(np.clip(1.0 - k2[keep] / radius**2, 0.0, None), gamma)
    if gamma == 0:
        damp = np.ones_like(damp)
    return FourierExpansion(f.indices[keep], f.coefficients[keep] * damp, float(radius), float(gamma))


def modulus_omega2(f, t, q=np.inf, sample_count=4096, domain=(-np.pi, np.pi), periodic=True,
                   shifts=OMEGA2_SHIFTS):
    """Sampled second-order modulus of smoothness of a 1D function.

    Estimates ``sup_{|h| <= t} ||f(. + h) + f(. - h) - 2 f(.)||_{L^q}`` by
    scanning ``shifts`` equispaced values of ``h`` in ``[0, t]``.  Because
    the second difference is even in ``h`` this covers negative shifts too.
    The result is a lower bound on the true supremum.

    On non-periodic domains the norm is taken over the points ``x`` with
    ``x +- h`` inside the domain.
    """
    if t < 0:
        raise ParameterError("t must be non-negative")
    if t == 0:
        return 0.0
    a, b = map(float, domain)
    best = 0.0
    for h in np.linspace(0.0, t, shifts + 1)[1:]:
        if periodic:
            x = a + (b - a) * np.arange(sample_count) / sample_count
            dx = (b - a) / sample_count
        else:
            lo, hi = a + h, b - h
            if hi < lo:
                continue
            x = np.linspace(lo, hi, sample_count)
            # lattice through the midpoint keeps symmetric kinks on the grid
            x = np.union1d(x, [0.5 * (lo + hi)])
            dx = None
        d2 = np.abs(f(x + h) + f(x - h) - 2.0 * f(x))
        if np.isinf(q):
            val = float(np.max(d2))
        elif periodic:
            val = float((np.sum(d2**q) * dx) ** (1.0 / q))
        else:
            val = float(np.trapezoid(d2**q, x) ** (1.0 / q))
        best = max(best, val)
    return best

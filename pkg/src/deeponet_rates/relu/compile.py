"""Compile ``R(x1..x5) = x2 - x1 x4 x5 / (1 + x1 x3)`` into one ReLU network
and wire it entrywise into the Sherman-Morrison cascade network."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .._errors import EvaluationError, ParameterError
from .builder import affine, chain, compose, identity, parallel, select, stack
from .gadgets import (
    BoxedNetwork,
    product_error_bound,
    product_gadget,
    reciprocal_error_bound,
    reciprocal_gadget,
)

EPS_RANGE = (1e-8, 1e-1)
K_MAX = 40


def _min_k(err_fn, target):
    for k in range(1, K_MAX + 1):
        if err_fn(k) <= target:
            return k
    raise ParameterError(f"no gadget depth up to {K_MAX} reaches {target:.3g}")


@dataclass(frozen=True, eq=False)
class CompiledRational(BoxedNetwork):
    """Network for ``R`` on the box ``|x1| <= x1_bound``, ``|x2..x5| <= t_bound``."""

    epsilon: float = 0.0
    error_bound: float = 0.0
    depths: dict = field(default_factory=dict)

    @property
    def size(self):
        return self.net.size

    @property
    def width(self):
        return self.net.width

    @property
    def depth(self):
        return self.net.depth


def _budget(x1_bound, t_bound, ks):
    """Worst-case error of the compiled net for gadget depths ``ks``."""
    X1, C1 = x1_bound, t_bound
    e_p = product_error_bound(ks["p"], X1, C1)
    z_max = X1 * C1 + e_p
    e_r = reciprocal_error_bound(ks["r"], 0.5)
    d_r = e_r + e_p / (1 - z_max) ** 2
    e_q = product_error_bound(ks["q"], C1, C1)
    Q = C1 * C1 + e_q
    Rb = 1 / (1 - z_max) + e_r
    e_w = product_error_bound(ks["w"], Q, Rb)
    W = Q * Rb + e_w
    e_z = product_error_bound(ks["z"], X1, W)
    total = e_z + X1 * (e_w + Rb * e_q + Q * d_r)
    return total, dict(Q=Q, R=Rb, W=W)


def compile_rational_R(epsilon, x1_bound=0.01, t_bound=2.0) -> CompiledRational:
    """Build ``N_R`` with guaranteed max error ``<= epsilon`` on its box.

    ``p = x1 x3``, ``r = 1 / (1 + p)`` (Newton gadget), ``q = x4 x5``,
    ``w = q r``, ``z = x1 w`` and ``y = x2 - z``.  The error budget is split
    evenly over the ``z`` product, the ``w`` product, the ``q`` product and
    the reciprocal path (itself split between ``p`` and the Newton gadget);
    each gadget takes the smallest depth meeting its share.
    """
    lo, hi = EPS_RANGE
    if not lo < epsilon < hi:
        raise ParameterError(f"epsilon must lie in ({lo:g}, {hi:g})")
    X1, C1 = float(x1_bound), float(t_bound)
    if not (X1 > 0 and C1 > 0):
        raise ParameterError("box bounds must be positive")
    if X1 * C1 > 0.25:
        raise ParameterError("x1_bound * t_bound must be <= 1/4 so that |x1 x3| stays small")
    share = epsilon / 4
    Q0, R0 = C1 * C1 * 1.01, 1 / (1 - 0.26) + 0.01
    ks = {}
    ks["z"] = _min_k(lambda k: product_error_bound(k, X1, Q0 * R0 * 1.01), share)
    ks["w"] = _min_k(lambda k: X1 * product_error_bound(k, Q0, R0), share)
    ks["q"] = _min_k(lambda k: X1 * R0 * product_error_bound(k, C1, C1), share)
    ks["r"] = _min_k(lambda k: X1 * Q0 * reciprocal_error_bound(k, 0.5), share / 2)
    ks["p"] = _min_k(lambda k: X1 * Q0 * product_error_bound(k, X1, C1) / 0.74**2, share / 2)
    total, b = _budget(X1, C1, ks)
    if total > epsilon:
        raise ParameterError("internal error budget exceeded")

    P_p = product_gadget(ks["p"], X1, C1)
    P_q = product_gadget(ks["q"], C1, C1)
    P_w = product_gadget(ks["w"], b["R"], b["Q"])  # inputs arrive as (r, q)
    P_z = product_gadget(ks["z"], X1, b["W"])
    recip = reciprocal_gadget(ks["r"], 0.5)

    # (x1..x5) -> (x1, x2, p, q)
    s1 = parallel(select(5, [0, 1]), compose(P_p, select(5, [0, 2])), compose(P_q, select(5, [3, 4])))
    # -> (x1, x2, r, q)
    s2 = stack(identity(2), recip, identity(1))
    # -> (x1, x2, w)
    s3 = stack(identity(2), P_w)
    # (x1, x2, w) -> (x2, x1, w) -> (x2, z) -> y
    reorder = affine(np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]))
    s4 = stack(identity(1), P_z)
    out = affine(np.array([[1.0, -1.0]]))
    net = chain(s1, s2, s3, reorder, s4, out)
    lower = np.array([-X1, -C1, -C1, -C1, -C1])
    upper = -lower
    return CompiledRational(net, lower, upper, float(epsilon), float(total), ks)


@dataclass(frozen=True, eq=False)
class BlessedCascadeNet:
    """Stage-wise ReLU evaluation of the cascade ``T_m = G_m(...G_1(T_0))``.

    Stage ``k`` feeds, for every entry ``(i, j)``, the five inputs
    ``(alpha_k, T_ij, (v^T T)_k, T_ik, (v^T T)_j)`` into the compiled
    network for ``R``.  ``T_0 = S^{-1}`` is a constant.
    """

    system: object
    compiled: CompiledRational
    T0: np.ndarray
    scales: np.ndarray

    @property
    def n(self) -> int:
        return self.T0.shape[0]

    @property
    def stages(self) -> int:
        return len(self.system.updates)

    def wiring(self, k):
        """Sparse 5-row selector ``W_{k,ij}`` as index/weight lists per input."""
        up = self.system.updates[k]
        return up.k, up.v_idx, up.v_val

    def capacity(self):
        """Width, depth and size of the network as one ReLU graph.

        Every stage holds one copy of ``N_R`` per matrix entry and carries
        the unused coefficients through identity pairs.
        """
        n2 = self.n * self.n
        width = n2 * self.compiled.width + 2 * self.stages
        depth = self.stages * self.compiled.depth
        size = self.stages * n2 * self.compiled.size + 4 * self.stages * depth
        return dict(width=width, depth=depth, size=size, width_depth=width * depth)

    def transform_inverse(self, coefficients=None):
        """``T_m^N`` from the coefficient vector (one value per update).

        Raises :class:`EvaluationError` naming the stage and entry when a
        stage input leaves the compiled network's box.
        """
        ups = self.system.updates
        if coefficients is None:
            alphas = np.array([u.alpha for u in ups])
        else:
            c = np.asarray(coefficients, float).ravel()
            if c.size != len(ups):
                raise ParameterError(f"expected {len(ups)} coefficients, got {c.size}")
            alphas = self.scales * c
        T = self.T0.copy()
        lo, hi = self.compiled.lower, self.compiled.upper
        n = self.n
        for s, up in enumerate(ups):
            if up.v_idx.size == 0:
                continue
            vT = up.v_val @ T[up.v_idx, :]
            X = np.empty((n, n, 5))
            X[..., 0] = alphas[s]
            X[..., 1] = T
            X[..., 2] = vT[up.k]
            X[..., 3] = T[:, up.k][:, None]
            X[..., 4] = vT[None, :]
            bad = (X < lo - 1e-12) | (X > hi + 1e-12)
            if np.any(bad):
                i, j, c = np.argwhere(bad)[0]
                raise EvaluationError(
                    f"stage k={s + 1}: input {c + 1} of entry (i={i}, j={j}) is "
                    f"{X[i, j, c]:.6g}, outside [{lo[c]:.6g}, {hi[c]:.6g}]"
                )
            T = self.compiled.net(X.reshape(-1, 5)).reshape(n, n)
        return T

    def __call__(self, coefficients=None):
        """``U^N = T_m^N F``."""
        U = self.transform_inverse(coefficients) @ self.system.F
        if self.system.pinned is not None:
            U = U - U.mean()
        return U


def blessed_cascade_net(system, epsilon_stage, x1_bound=None, t_bound=None, t_margin=1.1):
    """Wire a compiled ``N_R`` into every cascade stage of ``system``.

    By default the box is ``|x1| <= max |alpha_k|`` and
    ``|T entries| <= 1.1 max|S^{-1}|``.  Passing ``x1_bound`` and ``t_bound``
    fixes the box, so that a sweep over grids shares one compiled ``N_R``.
    """
    T0 = np.linalg.inv(system.S)
    if t_bound is None:
        t_bound = t_margin * float(np.max(np.abs(T0)))
    if x1_bound is None:
        alphas = [abs(u.alpha) for u in system.updates]
        x1_bound = max(max(alphas, default=0.0), 1e-12)
    compiled = compile_rational_R(epsilon_stage, x1_bound=x1_bound, t_bound=t_bound)
    scales = np.array([system.h**2 if u.kind == "a3" else system.h for u in system.updates])
    return BlessedCascadeNet(system, compiled, T0, scales)

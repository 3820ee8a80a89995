"""scikit-learn style wrappers around the constructive operators.

Branch estimators map sampled inputs ``X`` of shape ``(n_samples, m)`` to
coefficients at the output nodes; :class:`HatTrunk` maps output points to
nodal basis values; :class:`DeepONet` combines the two.  Nothing is learned:
``fit`` validates shapes and freezes the output grid.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin, clone
from sklearn.utils.validation import check_array, check_is_fitted

from ._errors import InputError, ParameterError
from .advdiff import AdvDiffProblem1D, discrete_operator, exact_solution
from .burgers import BurgersProblem1D, burgers_rational
from .fd_cascade import assemble, cascade_solve, dense_solve
from .grids import Grid1D, Grid2D, PiecewiseFunction
from .relu import blessed_cascade_net, hat_trunk, parallel


def _check_width(X, expected, what):
    X = check_array(X, dtype=float)
    if X.shape[1] != expected:
        raise InputError(f"{what}: expected {expected} columns, got {X.shape[1]}")
    return X


class BurgersRationalBranch(TransformerMixin, BaseEstimator):
    """Rational Cole-Hopf operator evaluated at ``p`` periodic output nodes.

    Parameters
    ----------
    m : int
        Input cells on [-pi, pi); rows of ``X`` hold the ``m`` nodal values.
    p : int
        Output cells; ``transform`` returns ``p`` values per row.
    kappa, t : float
        Viscosity and output time.
    linearized : bool
        Use first-order Taylor factors instead of exponentials.
    """

    def __init__(self, m=64, p=64, kappa=0.5, t=0.25, linearized=False):
        self.m = m
        self.p = p
        self.kappa = kappa
        self.t = t
        self.linearized = linearized

    def fit(self, X, y=None):
        if int(self.m) < 2 or int(self.p) < 2:
            raise ParameterError("m and p must be at least 2")
        _check_width(X, self.m, "BurgersRationalBranch")
        self.input_grid_ = Grid1D.uniform(-np.pi, np.pi, int(self.m), periodic=True)
        self.output_grid_ = Grid1D.uniform(-np.pi, np.pi, int(self.p), periodic=True)
        return self

    def transform(self, X):
        check_is_fitted(self, "output_grid_")
        X = _check_width(X, self.m, "BurgersRationalBranch")
        y = self.output_grid_.value_nodes
        out = np.empty((X.shape[0], y.size))
        for r, row in enumerate(X):
            problem = BurgersProblem1D(self.kappa, PiecewiseFunction(self.input_grid_, row, 1))
            out[r] = burgers_rational(problem, y, self.t, linearized=self.linearized)
        return out


class AdvDiffRationalBranch(TransformerMixin, BaseEstimator):
    """Integral-form solution of ``-u'' + a u' = f`` at ``p + 1`` nodes of [0, L].

    Rows of ``X`` are the ``m`` cell values of a piecewise-constant ``a``.
    ``method="discrete"`` uses the rational operator, ``"exact"`` the
    closed-form integrals.
    """

    def __init__(self, m=64, p=64, L=1.0, f=1.0, method="discrete"):
        self.m = m
        self.p = p
        self.L = L
        self.f = f
        self.method = method

    def fit(self, X, y=None):
        if self.method not in ("discrete", "exact"):
            raise ParameterError("method must be 'discrete' or 'exact'")
        if not self.L > 0:
            raise ParameterError("L must be positive")
        _check_width(X, self.m, "AdvDiffRationalBranch")
        self.input_grid_ = Grid1D.uniform(0.0, self.L, int(self.m))
        self.output_grid_ = Grid1D.uniform(0.0, self.L, int(self.p))
        return self

    def transform(self, X):
        check_is_fitted(self, "output_grid_")
        X = _check_width(X, self.m, "AdvDiffRationalBranch")
        f = self.f
        if not callable(f):
            c = float(f)
            f = lambda x: np.full(np.shape(x), c)  # noqa: E731
        op = discrete_operator if self.method == "discrete" else exact_solution
        y = self.output_grid_.nodes
        return np.vstack([op(AdvDiffProblem1D(self.input_grid_, row, f), y) for row in X])


class CascadeBranch(TransformerMixin, BaseEstimator):
    """Reaction-diffusion solution on the unit square from nodal ``a3``.

    Rows of ``X`` hold ``a3`` at the ``m`` interior unknowns (Dirichlet
    boundary, x-major).  ``solver`` is ``"cascade"``, ``"dense"`` or
    ``"blessed"`` (stage-wise ReLU network with ``epsilon_stage``).
    """

    def __init__(self, cells=8, f=1.0, solver="cascade", epsilon_stage=1e-6):
        self.cells = cells
        self.f = f
        self.solver = solver
        self.epsilon_stage = epsilon_stage

    def _system(self, a3):
        return assemble(self.domain_, a3=_NodalCoefficient(a3), f=self.f)

    def fit(self, X, y=None):
        if self.solver not in ("cascade", "dense", "blessed"):
            raise ParameterError("solver must be 'cascade', 'dense' or 'blessed'")
        if int(self.cells) < 3:
            raise ParameterError("cells must be at least 3")
        self.domain_ = Grid2D.uniform(0.0, 1.0, int(self.cells))
        self.n_unknowns_ = (int(self.cells) - 1) ** 2
        _check_width(X, self.n_unknowns_, "CascadeBranch")
        return self

    def transform(self, X):
        check_is_fitted(self, "domain_")
        X = _check_width(X, self.n_unknowns_, "CascadeBranch")
        out = np.empty_like(X)
        for r, row in enumerate(X):
            system = self._system(row)
            if self.solver == "dense":
                out[r] = dense_solve(system)
            elif self.solver == "blessed":
                out[r] = blessed_cascade_net(system, self.epsilon_stage)()
            else:
                out[r] = cascade_solve(system)[0]
        return out


class _NodalCoefficient:
    """Callable returning stored nodal values in the order they are queried."""

    def __init__(self, values):
        self.values = np.asarray(values, float)

    def __call__(self, x, y):
        if np.size(x) != self.values.size:
            raise InputError(f"expected {np.size(x)} nodal values, got {self.values.size}")
        return self.values


class HatTrunk(TransformerMixin, BaseEstimator):
    """Exact nodal hat basis on ``p`` uniform cells of ``[start, stop]``.

    ``transform`` returns ``(n_points, n_values)`` basis values, computed by
    one ReLU network holding every hat.
    """

    def __init__(self, p=64, start=-np.pi, stop=np.pi, periodic=True):
        self.p = p
        self.start = start
        self.stop = stop
        self.periodic = periodic

    def fit(self, X=None, y=None):
        if int(self.p) < 2:
            raise ParameterError("p must be at least 2")
        self.grid_ = Grid1D.uniform(self.start, self.stop, int(self.p), periodic=self.periodic)
        self.network_ = parallel(*[hat_trunk(self.grid_, i) for i in range(self.grid_.n_values)])
        return self

    def transform(self, X):
        check_is_fitted(self, "network_")
        y = check_array(np.asarray(X, float).reshape(-1, 1), dtype=float).ravel()
        if self.periodic:
            y = self.grid_.reduce(y)
        else:
            self.grid_.reduce(y)  # raises on points outside the span
        return self.network_(y[:, None])


class DeepONet(RegressorMixin, BaseEstimator):
    """``G(u)(y) = sum_k branch_k(u) trunk_k(y)``.

    Parameters
    ----------
    branch : transformer
        Maps ``(n_samples, m)`` inputs to ``(n_samples, p)`` coefficients.
    trunk : transformer
        Maps output points to ``(n_points, p)`` basis values.
    points : array-like, optional
        Default output points for :meth:`predict`.
    """

    def __init__(self, branch=None, trunk=None, points=None):
        self.branch = branch
        self.trunk = trunk
        self.points = points

    def fit(self, X, y=None):
        if self.branch is None or self.trunk is None:
            raise ParameterError("both a branch and a trunk estimator are required")
        X = check_array(X, dtype=float)
        self.branch_ = clone(self.branch).fit(X)
        self.trunk_ = clone(self.trunk).fit(None)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X, points=None):
        """Output values of shape ``(n_samples, n_points)``."""
        check_is_fitted(self, "branch_")
        pts = self.points if points is None else points
        if pts is None:
            raise InputError("no output points given")
        B = self.branch_.transform(X)
        T = self.trunk_.transform(np.asarray(pts, float))
        if B.shape[1] != T.shape[1]:
            raise InputError(f"branch gives {B.shape[1]} terms, trunk {T.shape[1]}")
        return B @ T.T

    def score(self, X, y, sample_weight=None):
        """Negative max absolute error against ``y`` sampled at ``points``."""
        return -float(np.max(np.abs(self.predict(X) - np.asarray(y, float))))

"""Constructive DeepONet approximations of PDE solution operators.

Subpackages and modules:

``grids``, ``norms``, ``fourier``
    grids, piecewise interpolation, quadrature, Fourier and Bochner-Riesz tools
``burgers``, ``forced_burgers``, ``burgers2d``
    Cole-Hopf rational operators, path estimators and 2D solutions
``advdiff``
    integral-form operators for 1D advection-diffusion
``fd_cascade``
    finite differences and the Sherman-Morrison cascade
``relu``
    sparse ReLU networks, exact constructions and gadgets
``deeponet``, ``estimators``
    branch x trunk assembly and scikit-learn wrappers
``harness``, ``problems``, ``acceptance``, ``cli``
    sweeps, slope fits and the command-line driver
"""
from ._errors import (
    DeepONetRatesError,
    DomainError,
    EvaluationError,
    InputError,
    NumericalError,
    ParameterError,
    SingularUpdateError,
    ValidationError,
)
from .grids import Grid1D, Grid2D, PiecewiseFunction, interpolate, sample_input
from .deeponet import DeepONetModel, assemble_interpolation_deeponet, error_budget, evaluate_model
from .estimators import (
    AdvDiffRationalBranch,
    BurgersRationalBranch,
    CascadeBranch,
    DeepONet,
    HatTrunk,
)
from .harness import ConvergenceReport, SweepSpec, fit_slope, run_sweep

__version__ = "0.1.0"

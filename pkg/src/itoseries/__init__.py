"""Approximation of iterated Ito stochastic integrals by multiple Fourier series."""

__version__ = "0.1.0"

from .basis import BasisKind, Interval, eval_basis, gauss_legendre, integrate_basis
from .coefficients import (
    CoefficientTensor,
    Constant,
    GeneralKernel,
    KernelSpec,
    PowerOfElapsed,
    Tabulated,
    build_tensor,
    fourier_coefficient,
    kernel_eval,
    kernel_l2_norm_sq,
    truncation_residual,
)
from .combinatorics import enumerate_pair_partitions, j_grouping, multiplicity_structure
from .errors import DomainError, ItoSeriesError, MemoryBudgetError, QuadratureError
from .expansion import (
    GaussianTable,
    approximate_integral,
    mse_estimate,
    sample_table,
    term_hermite,
    term_partition,
    term_recurrence,
)
from .hermite import hermite, hermite2

__all__ = [
    "BasisKind", "Interval", "eval_basis", "gauss_legendre", "integrate_basis",
    "CoefficientTensor", "Constant", "GeneralKernel", "KernelSpec", "PowerOfElapsed", "Tabulated",
    "build_tensor", "fourier_coefficient", "kernel_eval", "kernel_l2_norm_sq", "truncation_residual",
    "enumerate_pair_partitions", "j_grouping", "multiplicity_structure",
    "DomainError", "ItoSeriesError", "MemoryBudgetError", "QuadratureError",
    "GaussianTable", "approximate_integral", "mse_estimate", "sample_table",
    "term_hermite", "term_partition", "term_recurrence",
    "hermite", "hermite2",
]

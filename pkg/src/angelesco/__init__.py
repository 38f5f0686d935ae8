"""Hermite-Pade polynomials and logarithmic equilibrium for Angelesco systems.

Subpackages mirror the pipeline: series generation, Hermite-Pade linear
algebra, zero-counting measures and transforms, scalar/vector
equilibrium solvers, quadratic-differential geometry, and the study
harness with its CLI.
"""

from .scalars import EXACT, Scalar, bigfloat
from .series import (
    JacobiDensity,
    JacobiSpec,
    LaurentSeries,
    MarkovSpec,
    MomentOracle,
    PolynomialDensity,
    expand_jacobi,
    expand_markov,
)
from .hermite_pade import (
    DegreeVector,
    HPFirst,
    HPSecond,
    normalize,
    remainder_series,
    solve_first_kind,
    solve_second_kind,
)

__all__ = [
    "EXACT",
    "Scalar",
    "bigfloat",
    "LaurentSeries",
    "JacobiSpec",
    "MarkovSpec",
    "PolynomialDensity",
    "JacobiDensity",
    "MomentOracle",
    "expand_jacobi",
    "expand_markov",
    "DegreeVector",
    "HPFirst",
    "HPSecond",
    "solve_first_kind",
    "solve_second_kind",
    "remainder_series",
    "normalize",
]

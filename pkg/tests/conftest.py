import numpy as np
import pytest
from fractions import Fraction

from angelesco.measures import IntervalSet
from angelesco.series import MarkovSpec, PolynomialDensity, expand_markov


@pytest.fixture(scope="session")
def angelesco_pair_specs():
    """Unit densities on [-2,-1] and [1,2] (the standard test family)."""
    return [
        MarkovSpec((Fraction(-2), Fraction(-1)), PolynomialDensity([1])),
        MarkovSpec((Fraction(1), Fraction(2)), PolynomialDensity([1])),
    ]


@pytest.fixture(scope="session")
def angelesco_pair_series(angelesco_pair_specs):
    """Long exact expansions, shared across tests."""
    return [expand_markov(s, 120) for s in angelesco_pair_specs]


@pytest.fixture(scope="session")
def pair_interval_sets():
    return (IntervalSet(((-2.0, -1.0),)), IntervalSet(((1.0, 2.0),)))


@pytest.fixture(scope="session")
def arcsine_grid():
    """Fine arcsine reference measure on [-1, 1] as a GridMeasure."""
    from angelesco.measures import GridMeasure

    M = 2000
    th = (2 * np.arange(M) + 1) * np.pi / (2 * M)
    nodes = tuple(sorted(np.cos(th)))
    return GridMeasure(IntervalSet(((-1.0, 1.0),)), nodes, (1.0 / M,) * M)

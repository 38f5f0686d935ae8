import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from angelesco.scalars import EXACT, ScalarKindError, bigfloat
from angelesco.series import (
    JacobiDensity,
    JacobiSpec,
    LaurentSeries,
    MarkovSpec,
    MomentOracle,
    PolynomialDensity,
    SeriesError,
    expand_jacobi,
    expand_markov,
    markov_value,
    polynomial_multiply,
    series_add,
    series_mul,
    series_scale,
)
from oracles import jacobi_product_oracle, quad_moment


class TestExpandJacobi:
    def test_matches_binomial_product_oracle(self):
        spec = JacobiSpec((1, -1), (Fraction(1, 2), Fraction(-1, 2)))
        f = expand_jacobi(spec, 3)
        oracle = jacobi_product_oracle(spec.points, spec.exponents, 3)
        assert list(f.coeffs) == oracle
        assert f[0] == 1

    @pytest.mark.parametrize("points,exponents", [
        ((1, -1, 2), (Fraction(1, 3), Fraction(1, 3), Fraction(-2, 3))),
        ((0, 1), (Fraction(3, 2), Fraction(-3, 2))),
        ((Fraction(1, 2), -2, 3, 5), (Fraction(1, 2), Fraction(1, 2),
                                      Fraction(-1, 4), Fraction(-3, 4))),
    ])
    def test_recurrence_vs_product_families(self, points, exponents):
        spec = JacobiSpec(points, exponents)
        f = expand_jacobi(spec, 40)
        assert list(f.coeffs) == jacobi_product_oracle(points, exponents, 40)

    @settings(max_examples=25, deadline=None)
    @given(st.data())
    def test_recurrence_vs_product_property(self, data):
        p = data.draw(st.integers(2, 4))
        pts = data.draw(
            st.lists(
                st.fractions(min_value=-3, max_value=3, max_denominator=4),
                min_size=p, max_size=p, unique=True,
            )
        )
        alphas = data.draw(
            st.lists(
                st.fractions(min_value=-2, max_value=2, max_denominator=3)
                .filter(lambda a: a.denominator > 1),
                min_size=p - 1, max_size=p - 1,
            )
        )
        last = -sum(alphas)
        if last.denominator == 1:
            alphas[-1] += Fraction(1, 5)
            last = -sum(alphas)
        spec = JacobiSpec(tuple(pts), tuple(alphas) + (last,))
        N = data.draw(st.integers(0, 25))
        f = expand_jacobi(spec, N)
        assert list(f.coeffs) == jacobi_product_oracle(spec.points, spec.exponents, N)

    def test_real_spec_gives_real_coefficients(self):
        spec = JacobiSpec((2, -3), (Fraction(1, 2), Fraction(-1, 2)))
        f = expand_jacobi(spec, 20)
        assert all(isinstance(c, Fraction) for c in f.coeffs)

    def test_conjugation_symmetry(self):
        spec = JacobiSpec((1 + 1j, 1 - 2j), (0.5, -0.5))
        f = expand_jacobi(spec, 15, bigfloat(128))
        g = expand_jacobi(spec.conjugate(), 15, bigfloat(128))
        for a, b in zip(f.coeffs, g.coeffs):
            assert abs(mpmath.conj(a) - b) < 1e-30

    def test_rejections(self):
        with pytest.raises(SeriesError):
            JacobiSpec((1, -1), (1, -1))  # integer exponents
        with pytest.raises(SeriesError):
            JacobiSpec((1, 1), (Fraction(1, 2), Fraction(-1, 2)))  # coincident
        with pytest.raises(SeriesError):
            JacobiSpec((1, -1), (Fraction(1, 2), Fraction(1, 2)))  # sum != 0
        spec = JacobiSpec((1j, -1j), (0.5, -0.5))
        with pytest.raises(ScalarKindError):
            expand_jacobi(spec, 4, EXACT)  # complex data in exact mode


class TestExpandMarkov:
    def test_arcsine_moments(self):
        spec = MarkovSpec((-1, 1), JacobiDensity(Fraction(-1, 2), Fraction(-1, 2)))
        f = expand_markov(spec, 6)
        assert f[0] == 0
        assert f[1] == 1 and f[2] == 0 and f[3] == Fraction(1, 2)

    def test_unit_density_moments(self):
        spec = MarkovSpec((0, 1), PolynomialDensity([1]))
        f = expand_markov(spec, 8)
        assert [f[j + 1] for j in range(8)] == [Fraction(1, j + 1) for j in range(8)]

    def test_shifted_density_matches_quadrature(self):
        # density 1 + x^2 on [0, 1] shifted to [c, c+1]
        c = Fraction(3, 2)
        spec = MarkovSpec((c, c + 1), PolynomialDensity(
            # p(x - c) = 1 + (x - c)^2
            [1 + c * c, -2 * c, 1]
        ))
        for j in range(6):
            exact = float(spec.moment(j))
            quad = quad_moment(lambda x: 1 + (x - 1.5) ** 2, (1.5, 2.5), j)
            assert exact == pytest.approx(quad, abs=1e-12)

    def test_hankel_rejects_indefinite(self):
        bad = MarkovSpec((0, 1), MomentOracle((Fraction(1), Fraction(0),
                                               Fraction(-1))))
        with pytest.raises(SeriesError):
            expand_markov(bad, 3)

    def test_point_mass_passes_hankel(self):
        spec = MarkovSpec((1, 3), MomentOracle(lambda j: Fraction(2) ** j))
        f = expand_markov(spec, 10)
        assert f[1] == 1 and f[2] == 2 and f[3] == 4

    def test_markov_value_closed_form(self):
        spec = MarkovSpec((0, 1), PolynomialDensity([1]))
        val = markov_value(spec, 2.0)
        assert abs(complex(val) - math.log(2)) < 1e-25


class TestSeriesArithmetic:
    def test_additive_identity(self):
        f = expand_markov(MarkovSpec((0, 1), PolynomialDensity([1])), 10)
        zero = LaurentSeries((Fraction(0),) * 11)
        assert series_add(f, zero).coeffs == f.coeffs

    def test_multiplicative_identity(self):
        f = expand_markov(MarkovSpec((0, 1), PolynomialDensity([1])), 10)
        one = LaurentSeries((Fraction(1),) + (Fraction(0),) * 10)
        assert series_mul(f, one).coeffs == f.coeffs

    def test_inverse_exponent_product_is_one(self):
        spec = JacobiSpec((1, -1), (Fraction(1, 2), Fraction(-1, 2)))
        inv = JacobiSpec((1, -1), (Fraction(-1, 2), Fraction(1, 2)))
        f = expand_jacobi(spec, 30)
        g = expand_jacobi(inv, 30)
        prod = series_mul(f, g)
        assert prod[0] == 1
        assert all(c == 0 for c in prod.coeffs[1:])

    def test_scale_and_truncation_tracking(self):
        f = expand_markov(MarkovSpec((0, 1), PolynomialDensity([1])), 10)
        g = series_scale(f, Fraction(3))
        assert g.order == 10
        assert g[1] == 3
        h = series_mul(f.truncate(4), g)
        assert h.order == 4

    def test_kind_mixing_rejected(self):
        f = expand_markov(MarkovSpec((0, 1), PolynomialDensity([1])), 5)
        g = f.promote(bigfloat(128))
        with pytest.raises(ScalarKindError):
            series_add(f, g)
        assert series_add(g, g).order == 5

    def test_polynomial_multiply_splits_poly_and_tail(self):
        # f = 1/(z-2): (z-2) * f == 1 exactly
        spec = MarkovSpec((1, 3), MomentOracle(lambda j: Fraction(2) ** j))
        f = expand_markov(spec, 12)
        poly_part, tail = polynomial_multiply([-2, 1], f)
        assert poly_part == [1]
        assert all(c == 0 for c in tail.coeffs)

    def test_exact_determinism(self):
        spec = JacobiSpec((1, -1, 3), (Fraction(1, 2), Fraction(1, 6),
                                       Fraction(-2, 3)))
        a = expand_jacobi(spec, 30)
        b = expand_jacobi(spec, 30)
        assert a.coeffs == b.coeffs


class TestSerialization:
    def test_exact_roundtrip(self):
        f = expand_markov(MarkovSpec((0, 1), PolynomialDensity([1])), 6)
        doc = f.to_json()
        assert doc["kind"] == "exact-rational"
        assert doc["order"] == 6
        assert doc["coeffs"][1] == [1, 1]
        g = LaurentSeries.from_json(doc)
        assert g.coeffs == f.coeffs

    def test_bigfloat_roundtrip(self):
        spec = JacobiSpec((1 + 1j, -1 - 1j), (0.5, -0.5))
        f = expand_jacobi(spec, 5, bigfloat(192))
        doc = f.to_json()
        assert doc["precision_bits"] == 192
        g = LaurentSeries.from_json(doc)
        for a, b in zip(f.coeffs, g.coeffs):
            assert abs(a - b) < 1e-40

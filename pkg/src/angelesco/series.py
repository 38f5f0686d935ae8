"""Laurent expansions at infinity for the function classes used here.

Two generators are provided:

* ``expand_jacobi``: products prod (z - a_j)^(alpha_j) with exponent sum
  zero, normalized to 1 at infinity.  Computed by the linear recurrence
  obtained from A f' = B f with A = prod (z - a_j) and
  B = sum_j alpha_j prod_{i != j} (z - a_i); cost O(p N) per series and
  exact over the rationals.
* ``expand_markov``: Cauchy transforms of positive measures on a real
  interval, f(z) = sum_j m_j z^{-j-1} with m_j the moments.

Series are immutable; every operation tracks the truncation order and
never extends it silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Callable, Sequence

import mpmath

from .polynomials import poly_from_roots, poly_mul, trim
from .scalars import EXACT, Scalar, ScalarKindError, same_kind, coeff_from_json, coeff_to_json


class SeriesError(ValueError):
    pass


@dataclass(frozen=True)
class LaurentSeries:
    """Truncated expansion sum_{m=0}^{order} coeffs[m] * z^(-m)."""

    coeffs: tuple
    scalar: Scalar = EXACT

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        if not self.coeffs:
            raise SeriesError("a series needs at least the z^0 coefficient")

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, m: int):
        return self.coeffs[m]

    def truncate(self, order: int) -> "LaurentSeries":
        if order > self.order:
            raise SeriesError(f"cannot extend truncation order {self.order} to {order}")
        return LaurentSeries(self.coeffs[: order + 1], self.scalar)

    def promote(self, scalar: Scalar) -> "LaurentSeries":
        """Explicit conversion into another scalar context."""
        return LaurentSeries(tuple(scalar.coerce(c) for c in self.coeffs), scalar)

    def to_json(self) -> dict:
        doc = self.scalar.to_json()
        doc["coeffs"] = [coeff_to_json(c, self.scalar) for c in self.coeffs]
        doc["order"] = self.order
        return doc

    @staticmethod
    def from_json(doc: dict) -> "LaurentSeries":
        scalar = Scalar.from_json(doc)
        coeffs = [coeff_from_json(it, scalar) for it in doc["coeffs"]]
        if len(coeffs) != doc["order"] + 1:
            raise SeriesError("coefficient count does not match declared order")
        return LaurentSeries(coeffs, scalar)


def series_add(f: LaurentSeries, g: LaurentSeries) -> LaurentSeries:
    scalar = same_kind(f.scalar, g.scalar)
    n = min(f.order, g.order)
    return LaurentSeries([f[m] + g[m] for m in range(n + 1)], scalar)


def series_scale(f: LaurentSeries, c) -> LaurentSeries:
    c = f.scalar.coerce(c)
    return LaurentSeries([c * x for x in f.coeffs], f.scalar)


def series_mul(f: LaurentSeries, g: LaurentSeries) -> LaurentSeries:
    """Cauchy product, exact up to the minimum of the two orders."""
    scalar = same_kind(f.scalar, g.scalar)
    n = min(f.order, g.order)
    out = []
    for m in range(n + 1):
        acc = scalar.zero()
        for i in range(m + 1):
            acc += f[i] * g[m - i]
        out.append(acc)
    return LaurentSeries(out, scalar)


def polynomial_multiply(poly: Sequence, f: LaurentSeries):
    """Multiply an ascending-coefficient polynomial into a series.

    Returns ``(poly_part, tail)`` where ``poly_part`` holds the coefficients
    of z^0..z^deg and ``tail`` is the fractional part as a LaurentSeries
    whose index m stores the coefficient of z^(-m); tail[0] is zero by
    construction.  The tail order is the largest m for which every needed
    series coefficient exists: f.order - deg(poly).
    """
    q = trim([f.scalar.coerce(c) for c in poly])
    d = len(q) - 1
    if f.order < d:
        raise SeriesError("series truncation too short for this polynomial factor")
    poly_part = []
    for i in range(d + 1):
        acc = f.scalar.zero()
        for j in range(i, d + 1):
            acc += q[j] * f[j - i]
        poly_part.append(acc)
    poly_part = trim(poly_part)
    tail_order = f.order - d
    tail = [f.scalar.zero()]
    for m in range(1, tail_order + 1):
        acc = f.scalar.zero()
        for j in range(d + 1):
            acc += q[j] * f[j + m]
        tail.append(acc)
    return poly_part, LaurentSeries(tail, f.scalar)


# ---------------------------------------------------------------------------
# generalized Jacobi products
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JacobiSpec:
    """Branch data for f(z) = prod (z - a_j)^(alpha_j), f(infinity) = 1.

    Exponents must be non-integer and sum to zero, points pairwise
    distinct with p >= 2.
    """

    points: tuple
    exponents: tuple

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "exponents", tuple(self.exponents))
        if len(self.points) != len(self.exponents):
            raise SeriesError("points and exponents must pair up")
        if len(self.points) < 2:
            raise SeriesError("need at least two branch points")
        if len(set(map(complex, self.points))) != len(self.points):
            raise SeriesError("branch points must be pairwise distinct")
        for a in self.exponents:
            if _is_integral(a):
                raise SeriesError(f"integer exponent {a} gives a rational factor; rejected")
        if not _sums_to_zero(self.exponents):
            raise SeriesError("exponents must sum to zero (normalization at infinity)")

    @property
    def branch_count(self) -> int:
        return len(self.points)

    def is_rational(self) -> bool:
        return all(isinstance(a, Rational) for a in self.points) and all(
            isinstance(a, Rational) for a in self.exponents
        )

    def conjugate(self) -> "JacobiSpec":
        return JacobiSpec(
            tuple(_conj(a) for a in self.points),
            tuple(_conj(a) for a in self.exponents),
        )


def _is_integral(a) -> bool:
    if isinstance(a, Rational):
        return Fraction(a).denominator == 1
    z = complex(a)
    return abs(z.imag) == 0 and float(z.real).is_integer()


def _sums_to_zero(vals) -> bool:
    if all(isinstance(v, Rational) for v in vals):
        return sum(Fraction(v) for v in vals) == 0
    total = sum(complex(v) for v in vals)
    scale = max(1.0, max(abs(complex(v)) for v in vals))
    return abs(total) <= 1e-12 * scale


def _conj(a):
    if isinstance(a, Rational):
        return a
    return complex(a).conjugate()


def expand_jacobi(spec: JacobiSpec, order: int, scalar: Scalar = None) -> LaurentSeries:
    """Truncated expansion of the normalized generalized Jacobi product."""
    if order < 0:
        raise SeriesError("order must be nonnegative")
    if scalar is None:
        scalar = EXACT if spec.is_rational() else Scalar("big-float-complex")
    if scalar.exact and not spec.is_rational():
        raise ScalarKindError("exact-rational mode needs rational points and exponents")

    pts = [scalar.coerce(a) for a in spec.points]
    alf = [scalar.coerce(a) for a in spec.exponents]
    one = scalar.one()
    p = len(pts)

    # A = prod (z - a_j);  B = A * f'/f = sum_j alpha_j prod_{i != j} (z - a_i)
    A = poly_from_roots(pts, one)
    B = [scalar.zero()] * p
    for j in range(p):
        part = poly_from_roots(pts[:j] + pts[j + 1 :], one)
        for i, c in enumerate(part):
            B[i] += alf[j] * c
    # exponent sum zero kills the z^(p-1) term of B
    B = B[: p - 1] + [scalar.zero()]

    # Matching coefficients of z^(p-1-n) in A f' = B f yields, with A monic,
    #   n c_n = sum_{i<p} (p-n-i) A_i c_{i-p+n} - sum_i B_i c_{i-p+1+n}
    coeffs = [one]
    for n in range(1, order + 1):
        acc = scalar.zero()
        for i in range(p):
            k = i - p + n
            if 0 <= k < n:
                acc += (p - n - i) * A[i] * coeffs[k]
        for i in range(p - 1):
            k = i - p + 1 + n
            if 0 <= k < n:
                acc -= B[i] * coeffs[k]
        coeffs.append(acc / n if not scalar.exact else acc / Fraction(n))
    return LaurentSeries(coeffs, scalar)


# ---------------------------------------------------------------------------
# Markov-type functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PolynomialDensity:
    """Density p(x) dx on the interval, p with rational coefficients."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(Fraction(c) for c in self.coeffs))


@dataclass(frozen=True)
class JacobiDensity:
    """Density proportional to (x-a)^alpha (b-x)^beta, normalized to ``mass``.

    Both exponents must exceed -1.  Moments are exact rationals whenever
    alpha, beta, mass and the endpoints are rational.
    """

    alpha: Fraction
    beta: Fraction
    mass: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "alpha", Fraction(self.alpha))
        object.__setattr__(self, "beta", Fraction(self.beta))
        object.__setattr__(self, "mass", Fraction(self.mass))
        if self.alpha <= -1 or self.beta <= -1:
            raise SeriesError("Jacobi exponents must exceed -1")
        if self.mass <= 0:
            raise SeriesError("total mass must be positive")


@dataclass(frozen=True)
class MomentOracle:
    """Explicit moments m_j = integral x^j dsigma, as a sequence or callable."""

    moments: object

    def __call__(self, j: int):
        if callable(self.moments):
            return self.moments(j)
        return self.moments[j]


@dataclass(frozen=True)
class MarkovSpec:
    """Cauchy transform of a positive measure on a real interval [a, b]."""

    interval: tuple
    density: object  # PolynomialDensity | JacobiDensity | MomentOracle

    def __post_init__(self):
        a, b = self.interval
        if not (isinstance(a, Rational) and isinstance(b, Rational)):
            a, b = float(a), float(b)
        if not a < b:
            raise SeriesError("interval must satisfy a < b")
        object.__setattr__(self, "interval", (a, b))

    def moment(self, j: int) -> Fraction:
        return _markov_moment(self, j)

    def moments(self, count: int) -> list:
        return [self.moment(j) for j in range(count)]

    def check_positive(self, order: int):
        """Hankel positivity of the moment sequence up to the truncation order.

        Rejects the spec when some leading principal minor of
        (m_{i+j})_{i,j<=k} is nonpositive for 2k <= order - 1.
        """
        mom = self.moments(max(order, 1))
        if mom[0] <= 0:
            raise SeriesError("measure has nonpositive total mass")
        kmax = (len(mom) - 1) // 2
        h = [[Fraction(mom[i + j]) for j in range(kmax + 1)] for i in range(kmax + 1)]
        if not _hankel_positive(h):
            raise SeriesError("moment sequence fails the Hankel positivity test")


def _hankel_positive(h) -> bool:
    # pivoted LDL positive-semidefinite test, exact over the rationals;
    # point masses (singular but PSD Hankel matrices) must pass
    n = len(h)
    m = [row[:] for row in h]
    idx = list(range(n))
    for k in range(n):
        pk = max(range(k, n), key=lambda i: m[idx[i]][idx[i]])
        idx[k], idx[pk] = idx[pk], idx[k]
        piv = m[idx[k]][idx[k]]
        if piv < 0:
            return False
        if piv == 0:
            return all(
                m[idx[i]][idx[j]] == 0
                for i in range(k, n)
                for j in range(k, n)
            )
        for i in range(k + 1, n):
            fac = m[idx[i]][idx[k]] / piv
            for j in range(k + 1, n):
                m[idx[i]][idx[j]] -= fac * m[idx[k]][idx[j]]
    return True


@lru_cache(maxsize=None)
def _beta_power_moment(alpha: Fraction, beta: Fraction, k: int) -> Fraction:
    """E[B^k] for B ~ Beta(alpha+1, beta+1), exact over the rationals."""
    acc = Fraction(1)
    for i in range(k):
        acc *= (alpha + 1 + i) / (alpha + beta + 2 + i)
    return acc


def _markov_moment(spec: MarkovSpec, j: int) -> Fraction:
    a, b = spec.interval
    d = spec.density
    if isinstance(d, MomentOracle):
        return Fraction(d(j))
    a, b = Fraction(a), Fraction(b)
    if isinstance(d, PolynomialDensity):
        acc = Fraction(0)
        for i, c in enumerate(d.coeffs):
            acc += c * (b ** (i + j + 1) - a ** (i + j + 1)) / (i + j + 1)
        return acc
    if isinstance(d, JacobiDensity):
        # x = a + (b-a) B with B Beta-distributed
        acc = Fraction(0)
        for k in range(j + 1):
            acc += (
                math.comb(j, k)
                * a ** (j - k)
                * (b - a) ** k
                * _beta_power_moment(d.alpha, d.beta, k)
            )
        return d.mass * acc
    raise SeriesError(f"unknown density descriptor {type(d).__name__}")


def expand_markov(spec: MarkovSpec, order: int, scalar: Scalar = EXACT) -> LaurentSeries:
    """Expansion f(z) = sum_j m_j z^(-j-1); coeffs[0] = 0, coeffs[j+1] = m_j."""
    if order < 0:
        raise SeriesError("order must be nonnegative")
    spec.check_positive(order)
    mom = spec.moments(order)
    coeffs = [scalar.zero()] + [scalar.coerce(m) for m in mom]
    return LaurentSeries(coeffs[: order + 1], scalar)


# ---------------------------------------------------------------------------
# pointwise values (contour quadrature and probe studies)
# ---------------------------------------------------------------------------


def markov_value(spec: MarkovSpec, z, prec_bits: int = 256):
    """f(z) = integral d sigma(t) / (z - t) for z off the interval.

    Closed form for polynomial densities through the recurrence
    I_m = z I_{m-1} - (b^m - a^m)/m with I_0 = log((z-a)/(z-b));
    Gauss-Jacobi quadrature otherwise.  Returns an mpmath complex.
    """
    a, b = spec.interval
    with Scalar("big-float-complex", prec_bits).workprec():
        zz = mpmath.mpc(z)
        af, bf = _to_mp(a), _to_mp(b)
        d = spec.density
        if isinstance(d, PolynomialDensity):
            val = mpmath.mpc(0)
            im = mpmath.log((zz - af) / (zz - bf))
            for m, c in enumerate(d.coeffs):
                if m > 0:
                    im = zz * im - (bf ** m - af ** m) / m
                if c:
                    val += _to_mp(c) * im
            return val
        if isinstance(d, JacobiDensity):
            nodes, weights = _gauss_jacobi_cache(float(d.alpha), float(d.beta), 200)
            total = mpmath.mpc(0)
            half = (bf - af) / 2
            mid = (af + bf) / 2
            for x, w in zip(nodes, weights):
                total += w / (zz - (mid + half * x))
            # nodes/weights are on [-1,1] with weight (1-x)^a (1+x)^b; rescale
            # so the measure carries the requested total mass
            wsum = sum(weights)
            return total * _to_mp(d.mass) / wsum
        raise SeriesError("moment-oracle specs have no pointwise evaluation rule")


@lru_cache(maxsize=None)
def _gauss_jacobi_cache(alpha: float, beta: float, n: int):
    from scipy.special import roots_jacobi

    # scipy's convention: weight (1-x)^alpha (1+x)^beta; our alpha sits at the
    # left endpoint, so swap
    x, w = roots_jacobi(n, beta, alpha)
    return tuple(x.tolist()), tuple(w.tolist())


def _to_mp(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x) if not isinstance(x, complex) else mpmath.mpc(x)


def jacobi_values_on_path(spec: JacobiSpec, path, prec_bits: int = 256):
    """Values of the Jacobi product along a discrete path, branch-tracked.

    The branch at path[0] uses principal logarithms; subsequent points
    continue each factor's logarithm by the increment of smallest phase.
    Consecutive path points must stay well clear of the branch set.
    """
    with Scalar("big-float-complex", prec_bits).workprec():
        pts = [mpmath.mpc(a) for a in _as_numbers(spec.points)]
        alf = [_to_mp(a) for a in _as_numbers(spec.exponents)]
        logs = [mpmath.log(mpmath.mpc(path[0]) - a) for a in pts]
        out = [mpmath.exp(sum(al * lg for al, lg in zip(alf, logs)))]
        prev = mpmath.mpc(path[0])
        for z in path[1:]:
            zz = mpmath.mpc(z)
            for i, a in enumerate(pts):
                logs[i] += mpmath.log((zz - a) / (prev - a))
            out.append(mpmath.exp(sum(al * lg for al, lg in zip(alf, logs))))
            prev = zz
        return out


def _as_numbers(vals):
    return [
        Fraction(v) if isinstance(v, Rational) else complex(v)
        for v in vals
    ]

"""Dense univariate polynomials over either scalar domain.

Coefficients are stored ascending (coeffs[i] multiplies z**i) and are
duck-typed: Fraction, mpmath numbers, and Python complex all work.
Serialized form is the ascending coefficient array in the same encoding
as Laurent-series coefficients.
"""

from __future__ import annotations

from fractions import Fraction

from .scalars import Scalar, coeff_from_json, coeff_to_json


def trim(coeffs):
    """Drop trailing zero coefficients (canonical representation)."""
    coeffs = list(coeffs)
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return coeffs


def degree(coeffs) -> int:
    """Degree of the trimmed polynomial; -1 for the zero polynomial."""
    c = trim(coeffs)
    if len(c) == 1 and c[0] == 0:
        return -1
    return len(c) - 1


def is_zero(coeffs) -> bool:
    return all(c == 0 for c in coeffs)


def poly_eval(coeffs, z):
    acc = 0 * z
    for c in reversed(list(coeffs)):
        acc = acc * z + c
    return acc


def poly_add(a, b):
    n = max(len(a), len(b))
    out = []
    for i in range(n):
        x = a[i] if i < len(a) else 0
        y = b[i] if i < len(b) else 0
        out.append(x + y)
    return out


def poly_scale(a, c):
    return [c * x for x in a]


def poly_mul(a, b):
    if is_zero(a) or is_zero(b):
        return [0 * (a[0] + b[0])] if a and b else [0]
    out = [0 * (a[0] * b[0])] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return out


def poly_deriv(a):
    if len(a) <= 1:
        return [0 * a[0]] if a else [0]
    return [i * a[i] for i in range(1, len(a))]


def poly_from_roots(roots, one=1):
    out = [one]
    for r in roots:
        out = poly_mul(out, [-r, one])
    return out


def monic(coeffs):
    c = trim(coeffs)
    lead = c[-1]
    if lead == 0:
        raise ZeroDivisionError("zero polynomial has no monic form")
    return [x / lead for x in c]


def poly_to_json(coeffs, scalar: Scalar) -> list:
    return [coeff_to_json(c, scalar) for c in coeffs]


def poly_from_json(items, scalar: Scalar) -> list:
    return [coeff_from_json(it, scalar) for it in items]


def as_complex(coeffs) -> list:
    """Lossy conversion to Python complex, for numeric downstream work."""
    out = []
    for c in coeffs:
        if isinstance(c, Fraction):
            out.append(complex(c.numerator / c.denominator))
        else:
            out.append(complex(c))
    return out

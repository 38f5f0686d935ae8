"""Scalar arithmetic contexts.

Two coefficient domains are supported everywhere in the series and
Hermite-Pade layers:

* ``exact-rational``: ``fractions.Fraction`` over the (real) rationals.
  Bit-identical results across runs; the default whenever all inputs are
  rational.
* ``big-float-complex``: ``mpmath.mpc`` carrying a configurable mantissa
  (default 256 bits).

Mixing the two kinds without an explicit promotion is an error.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import mpmath

EXACT_KIND = "exact-rational"
BIGFLOAT_KIND = "big-float-complex"

# mpmath's working precision is process-global; serialize precision-sensitive
# sections so concurrent study workers cannot interleave precision changes.
_MP_LOCK = threading.RLock()


class ScalarKindError(TypeError):
    """Raised on unsupported scalar kinds or implicit exact/float mixing."""


@dataclass(frozen=True)
class Scalar:
    """Arithmetic context: which coefficient domain to compute in."""

    kind: str = EXACT_KIND
    precision_bits: int = 256

    def __post_init__(self):
        if self.kind not in (EXACT_KIND, BIGFLOAT_KIND):
            raise ScalarKindError(f"unknown scalar kind {self.kind!r}")
        if self.kind == BIGFLOAT_KIND and self.precision_bits < 53:
            raise ValueError("precision_bits must be at least 53")

    @property
    def exact(self) -> bool:
        return self.kind == EXACT_KIND

    def zero(self):
        return Fraction(0) if self.exact else self._mpc(0)

    def one(self):
        return Fraction(1) if self.exact else self._mpc(1)

    def _mpc(self, x):
        with _MP_LOCK, mpmath.workprec(self.precision_bits):
            if isinstance(x, Fraction):
                return mpmath.mpc(x.numerator) / x.denominator
            return mpmath.mpc(x)

    def coerce(self, x):
        """Bring ``x`` into this context; reject floats in exact mode."""
        if self.exact:
            if isinstance(x, Rational):
                return Fraction(x)
            raise ScalarKindError(
                f"cannot coerce {type(x).__name__} into exact-rational mode; "
                "promote the series to big-float-complex explicitly"
            )
        return self._mpc(x)

    def workprec(self):
        """Context manager pinning mpmath precision (and the module lock)."""
        return _PrecGuard(self.precision_bits)

    def to_json(self) -> dict:
        doc = {"kind": self.kind}
        if not self.exact:
            doc["precision_bits"] = self.precision_bits
        return doc

    @staticmethod
    def from_json(doc: dict) -> "Scalar":
        return Scalar(doc["kind"], doc.get("precision_bits", 256))


class _PrecGuard:
    def __init__(self, bits):
        self._bits = bits
        self._ctx = None

    def __enter__(self):
        _MP_LOCK.acquire()
        self._ctx = mpmath.workprec(self._bits)
        return self._ctx.__enter__()

    def __exit__(self, *exc):
        try:
            return self._ctx.__exit__(*exc)
        finally:
            _MP_LOCK.release()


EXACT = Scalar(EXACT_KIND)


def bigfloat(precision_bits: int = 256) -> Scalar:
    return Scalar(BIGFLOAT_KIND, precision_bits)


def same_kind(*scalars: Scalar) -> Scalar:
    """Common context of several operands; never promotes silently."""
    first = scalars[0]
    for other in scalars[1:]:
        if other.kind != first.kind:
            raise ScalarKindError(
                "operands mix exact-rational and big-float-complex scalars; "
                "promote explicitly"
            )
        if not first.exact and other.precision_bits != first.precision_bits:
            first = first if first.precision_bits >= other.precision_bits else other
    return first


def coeff_to_json(value, scalar: Scalar):
    if scalar.exact:
        f = Fraction(value)
        return [f.numerator, f.denominator]
    with scalar.workprec():
        z = mpmath.mpc(value)
        return [mpmath.nstr(z.real, mpmath.mp.dps, strip_zeros=False),
                mpmath.nstr(z.imag, mpmath.mp.dps, strip_zeros=False)]


def coeff_from_json(item, scalar: Scalar):
    if scalar.exact:
        num, den = item
        return Fraction(int(num), int(den))
    with scalar.workprec():
        return mpmath.mpc(mpmath.mpf(item[0]), mpmath.mpf(item[1]))

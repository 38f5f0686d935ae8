"""Simultaneous polynomial root finding (Aberth-Ehrlich) in mpmath.

Hermite-Pade denominators cluster their zeros near interval endpoints,
so the iteration runs in extended precision with companion-matrix
starting values.  Exact rational coefficients are converted at the
working precision; results are deterministic.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath
import numpy as np

from .polynomials import trim
from .scalars import Scalar


class RootFindingError(RuntimeError):
    def __init__(self, message, partial_roots=None, residuals=None):
        super().__init__(message)
        self.partial_roots = partial_roots or []
        self.residuals = residuals or []


def _to_mpc(c):
    if isinstance(c, Fraction):
        return mpmath.mpc(c.numerator) / c.denominator
    return mpmath.mpc(c)


def find_roots(coeffs, precision: float = 1e-12, prec_bits: int = 256, max_iter: int = 400):
    """All roots with multiplicity of an ascending-coefficient polynomial.

    Each returned root satisfies |p(z)| <= precision * scale(z) with
    scale(z) = sum |a_i| max(1,|z|)^i.  Raises RootFindingError with the
    partial state when the iteration fails to converge.
    """
    c = trim(list(coeffs))
    deg = len(c) - 1
    if deg < 0 or all(x == 0 for x in c):
        raise ValueError("zero polynomial has no roots to report")
    if deg == 0:
        return []

    work = Scalar("big-float-complex", max(prec_bits, 128))
    with work.workprec():
        a = [_to_mpc(x) for x in c]
        lead = a[-1]
        a = [x / lead for x in a]
        if deg == 1:
            return [-a[0]]

        z = _initial_guesses(a)
        eps = mpmath.mpf(2) ** (-(work.precision_bits - 16))
        scale0 = max(abs(x) for x in a)

        for _ in range(max_iter):
            max_step = mpmath.mpf(0)
            znew = list(z)
            for i in range(deg):
                p, dp = _horner_pair(a, z[i])
                if p == 0:
                    continue
                if dp == 0:
                    znew[i] = z[i] + mpmath.mpc("1e-3") * (1 + abs(z[i]))
                    max_step = mpmath.mpf("inf")
                    continue
                newton = p / dp
                acc = mpmath.mpc(0)
                for j in range(deg):
                    if j != i:
                        acc += 1 / (z[i] - z[j])
                denom = 1 - newton * acc
                step = newton / denom if denom != 0 else newton
                znew[i] = z[i] - step
                rel = abs(step) / max(mpmath.mpf(1), abs(znew[i]))
                if rel > max_step:
                    max_step = rel
            z = znew
            if max_step < eps * 100:
                break

        roots = sorted(z, key=lambda t: (mpmath.mpf(t.real), mpmath.mpf(t.imag)))
        residuals = [abs(_horner_pair(a, r)[0]) for r in roots]
        bad = []
        for r, res in zip(roots, residuals):
            sc = _residual_scale(a, r)
            if res > precision * sc:
                bad.append((complex(r), float(res / sc)))
        if bad:
            raise RootFindingError(
                f"{len(bad)} roots miss the residual bound {precision}: {bad[:4]}",
                partial_roots=[complex(r) for r in roots],
                residuals=[float(r) for r in residuals],
            )
        _ = scale0
        return roots


def _horner_pair(a, z):
    p = mpmath.mpc(0)
    dp = mpmath.mpc(0)
    for c in reversed(a):
        dp = dp * z + p
        p = p * z + c
    return p, dp


def _residual_scale(a, z):
    m = max(mpmath.mpf(1), abs(z))
    acc = mpmath.mpf(0)
    pw = mpmath.mpf(1)
    for c in a:
        acc += abs(c) * pw
        pw *= m
    return acc


def _initial_guesses(a):
    deg = len(a) - 1
    try:
        cf = np.array([complex(x) for x in a], dtype=complex)
        if np.all(np.isfinite(cf)):
            comp = np.zeros((deg, deg), dtype=complex)
            comp[1:, :-1] = np.eye(deg - 1)
            comp[:, -1] = -cf[:-1]
            eig = np.linalg.eigvals(comp)
            # deterministic order; nudge exact ties apart
            order = np.lexsort((eig.imag, eig.real))
            guesses = [mpmath.mpc(eig[i]) for i in order]
            for i in range(1, len(guesses)):
                if guesses[i] == guesses[i - 1]:
                    guesses[i] += mpmath.mpc("1e-6") * (i + 1)
            return guesses
    except (OverflowError, ValueError):
        pass
    radius = 1 + max(abs(x) for x in a[:-1])
    return [
        radius * mpmath.exp(2j * mpmath.pi * (k + mpmath.mpf("0.35")) / deg)
        for k in range(deg)
    ]

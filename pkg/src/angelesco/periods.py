"""Line integrals of square-root differentials along straight segments.

Everything in the S-curve layer reduces to integrals of the form

    integral over [z0, z1] of  prod_i (t - r_i)^(e_i)  dt,

with exponents e_i = +1/2 or -1/2.  The substitution
t = midpoint + half * sin(theta) removes endpoint square-root
singularities analytically (half-power factors anchored at an endpoint
combine with the cos(theta) Jacobian into analytic functions of theta),
and every other factor's logarithm is continued along the node sequence,
so no branch cut of a library sqrt is ever crossed.

The overall sign of a value is deterministic (principal phases at the
first node) but carries no meaning across calls; real-part period
conditions are sign-agnostic, and callers needing a coherent branch
along a multi-segment path match values at the junctions.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SqrtRatio:
    """The multivalued function sqrt(prod (z - num_i) / prod (z - den_j))."""

    num_roots: tuple
    den_roots: tuple

    def __post_init__(self):
        object.__setattr__(self, "num_roots", tuple(complex(r) for r in self.num_roots))
        object.__setattr__(self, "den_roots", tuple(complex(r) for r in self.den_roots))

    def all_roots(self):
        return self.num_roots + self.den_roots

    def principal_value(self, z):
        """One of the two values, via principal logarithms."""
        z = complex(z)
        acc = 0.0j
        for r in self.num_roots:
            acc += 0.5 * cmath.log(z - r)
        for r in self.den_roots:
            acc -= 0.5 * cmath.log(z - r)
        return cmath.exp(acc)


_GL_CACHE = {}


def _gauss_legendre(n):
    if n not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(n)
        _GL_CACHE[n] = (x, w)
    return _GL_CACHE[n]


def _endpoint_match(r, z, scale):
    return abs(r - z) <= 1e-12 * scale


def segment_integral(fun: SqrtRatio, z0, z1, nodes: int = 160, extra_poly=None,
                     return_end_value: bool = False):
    """integral of fun (optionally times a polynomial) over [z0, z1].

    Roots of the differential may coincide with either endpoint; they
    are folded into the Jacobian analytically.  Interior roots on the
    open segment are not allowed.  With ``return_end_value`` the fun
    value at the Gauss node nearest z1 is returned alongside, which lets
    callers align the branch across consecutive segments.
    """
    z0, z1 = complex(z0), complex(z1)
    mid = (z0 + z1) / 2
    half = (z1 - z0) / 2
    scale = max(abs(z0), abs(z1), 1.0)
    x, w = _gauss_legendre(nodes)
    theta = (math.pi / 2) * x
    jac = math.pi / 2
    sin_t = np.sin(theta)
    ts = mid + half * sin_t

    log_vals = np.zeros(len(ts), dtype=complex)  # log of fun minus endpoint factors
    prefactor = np.ones(len(ts), dtype=complex)
    phi = cmath.phase(half) if half != 0 else 0.0

    for roots, sgn in ((fun.num_roots, 0.5), (fun.den_roots, -0.5)):
        for r in roots:
            if _endpoint_match(r, z0, scale):
                # t - z0 = half (1 + sin)
                base = np.power(np.abs(half) * (1.0 + sin_t), sgn)
                prefactor *= base * cmath.exp(1j * sgn * phi)
            elif _endpoint_match(r, z1, scale):
                # t - z1 = half (sin - 1) = |half| (1 - sin) e^{i(phi+pi)}
                base = np.power(np.abs(half) * (1.0 - sin_t), sgn)
                prefactor *= base * cmath.exp(1j * sgn * (phi + math.pi))
            else:
                log_vals += sgn * _tracked_log(ts, r)

    fun_vals = prefactor * np.exp(log_vals)
    vals = fun_vals
    if extra_poly is not None:
        pv = np.zeros(len(ts), dtype=complex)
        for c in reversed(list(extra_poly)):
            pv = pv * ts + complex(c)
        vals = fun_vals * pv
    integrand = vals * half * np.cos(theta)
    total = complex(np.sum(w * integrand) * jac)
    if return_end_value:
        return total, complex(fun_vals[-1]), complex(ts[-1])
    return total


def _tracked_log(ts, r):
    """log(t - r) continued along the node sequence (no cut crossing)."""
    vals = ts - r
    if np.any(vals == 0):
        raise ValueError(f"root {r} lies on the integration segment")
    out = np.empty(len(ts), dtype=complex)
    out[0] = cmath.log(vals[0])
    ratios = vals[1:] / vals[:-1]
    out[1:] = out[0] + np.cumsum(np.log(ratios))
    return out


def tracked_values(fun: SqrtRatio, points):
    """Branch of fun along a polyline, continuous from the first point."""
    points = [complex(p) for p in points]
    vals = [fun.principal_value(points[0])]
    for z in points[1:]:
        v = fun.principal_value(z)
        prev = vals[-1]
        vals.append(v if abs(v - prev) <= abs(-v - prev) else -v)
    return vals


def infinity_tail(fun: SqrtRatio, z0, nodes: int = 200):
    """integral from z0 to infinity (along the ray through z0 from 0) of
    fun(t) - 1/t dt, for deg(num) - deg(den) = -2 and the branch with
    t*fun(t) -> 1.

    Substituting t = z0/v maps the ray to v in (0, 1]; the integrand is
    smooth at v = 0.
    """
    z0 = complex(z0)
    x, w = _gauss_legendre(nodes)
    v = (x + 1.0) / 2.0
    jac = 0.5
    ts = z0 / v
    # branch with t*fun ~ +1 at infinity: sqrt of (t^2 prod num / prod den)
    m = len(fun.num_roots)
    logs = np.zeros(len(ts), dtype=complex)
    for r in fun.num_roots:
        logs += _tracked_log(ts, r)
    for r in fun.den_roots:
        logs -= _tracked_log(ts, r)
    logs += 2 * np.log(ts)  # deg gap is exactly -2
    vals = np.exp(0.5 * logs)
    # fix the global sign so that values approach +1 far out
    far = vals[np.argmin(v)]
    if far.real < 0:
        vals = -vals
    fvals = vals / ts
    integrand = (fvals - 1.0 / ts) * (-z0 / v ** 2)
    # v runs 0..1 but the path runs from infinity to z0; flip orientation
    total = complex(np.sum(w * integrand) * jac)
    _ = m
    return -total, complex(fvals[np.argmax(v)])


def capacity_from_qd(e_points, v_roots, nodes: int = 200):
    """Logarithmic capacity of the S-configuration of -(V/A) dz^2.

    Uses g(z) = Re integral of sqrt(V/A) and the expansion
    g = log|z| - log(cap) + o(1): integrate from a branch point out to a
    far anchor, add the analytic tail, and read off the constant.
    """
    e_points = [complex(a) for a in e_points]
    v_roots = [complex(v) for v in v_roots]
    fun = SqrtRatio(tuple(v_roots), tuple(e_points))
    centroid = sum(e_points) / len(e_points)
    a0 = max(e_points, key=lambda a: (abs(a - centroid), a.real, a.imag))
    direction = a0 - centroid
    if direction == 0:
        direction = complex(1.0)
    direction /= abs(direction)
    R = 8.0 * (max(abs(a) for a in e_points) + 1.0)
    z_far = a0 + R * direction
    if abs(z_far) < R / 2:  # keep the tail ray (through the origin) sane
        z_far = complex(R)

    seg, end_val, t_end = segment_integral(fun, a0, z_far, nodes=nodes,
                                           return_end_value=True)
    # branch with Re(t * fun) > 0 near infinity is the g-function branch
    plus = fun.principal_value(t_end)
    if (t_end * plus).real < 0:
        plus = -plus
    if abs(end_val - plus) > abs(end_val + plus):
        seg = -seg
    tail, _ = infinity_tail(fun, z_far, nodes=nodes)
    c = seg + tail - cmath.log(z_far)
    return math.exp(-c.real)

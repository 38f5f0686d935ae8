"""First- and second-kind Hermite-Pade polynomials from truncated series.

First kind: polynomials q_0, q_1..q_s with deg q_k <= d_k such that
R = q_0 + sum_k q_k f_k vanishes through the coefficient of z^-(N-1),
N = sum d_k + s.  The N-1 homogeneous conditions (coefficients of
z^-1..z^-(N-1) of sum q_k f_k) act on the N unknown coefficients of
q_1..q_s; q_0 absorbs the nonnegative powers.  Generically the kernel is
one-dimensional and the first surviving remainder coefficient sits at
index N.

Second kind: a common denominator P of degree <= n s with
P f_k - Ptilde_k = O(z^-(n+1)) for every k; n s conditions on n s + 1
unknowns.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

import mpmath

from .kernels import kernel_basis, reduce_kernel_lexicographic
from .polynomials import is_zero, poly_from_json, poly_to_json, trim
from .scalars import Scalar, same_kind
from .series import LaurentSeries, SeriesError


class TruncationError(ValueError):
    """Input series too short; carries the required orders."""

    def __init__(self, message, required):
        super().__init__(message)
        self.required = required


class DegenerateKernelError(RuntimeError):
    pass


@dataclass(frozen=True)
class DegreeVector:
    degrees: tuple

    def __post_init__(self):
        object.__setattr__(self, "degrees", tuple(int(d) for d in self.degrees))
        if any(d < 0 for d in self.degrees):
            raise ValueError("degrees must be nonnegative")
        if self.order_target < 2:
            raise ValueError("need sum(d_k) + s >= 2")

    def __len__(self):
        return len(self.degrees)

    def __iter__(self):
        return iter(self.degrees)

    def __getitem__(self, k):
        return self.degrees[k]

    @property
    def order_target(self) -> int:
        """N = sum d_k + s, the number of unknown coefficients."""
        return sum(self.degrees) + len(self.degrees)

    @staticmethod
    def diagonal(n: int, s: int) -> "DegreeVector":
        return DegreeVector((n,) * s)


@dataclass(frozen=True)
class HPFirst:
    """First-kind solution; polynomial coefficients ascending."""

    q0: tuple
    q: tuple  # q_1..q_s
    degrees: DegreeVector
    achieved_order: object  # int, or None when zero to truncation
    kernel_dim: int
    scalar: Scalar
    normalization: str = "raw"

    @property
    def leading_coefficients(self):
        """c_k = coefficient of z^(d_k) in q_k (the degree-bound slot)."""
        return tuple(qk[dk] for qk, dk in zip(self.q, self.degrees))

    def scaled(self, c, label=None) -> "HPFirst":
        c = self.scalar.coerce(c)
        return replace(
            self,
            q0=tuple(c * x for x in self.q0),
            q=tuple(tuple(c * x for x in qk) for qk in self.q),
            normalization=label or self.normalization,
        )

    def to_json(self) -> dict:
        return {
            "kind": "hp-first",
            "scalar": self.scalar.to_json(),
            "degrees": list(self.degrees),
            "q0": poly_to_json(self.q0, self.scalar),
            "q": [poly_to_json(qk, self.scalar) for qk in self.q],
            "achieved_order": self.achieved_order,
            "kernel_dim": self.kernel_dim,
            "normalization": self.normalization,
        }

    @staticmethod
    def from_json(doc: dict) -> "HPFirst":
        scalar = Scalar.from_json(doc["scalar"])
        return HPFirst(
            q0=tuple(poly_from_json(doc["q0"], scalar)),
            q=tuple(tuple(poly_from_json(qk, scalar)) for qk in doc["q"]),
            degrees=DegreeVector(doc["degrees"]),
            achieved_order=doc["achieved_order"],
            kernel_dim=doc["kernel_dim"],
            scalar=scalar,
            normalization=doc.get("normalization", "raw"),
        )


@dataclass(frozen=True)
class HPSecond:
    """Common denominator P with numerators, P f_k - Ptilde_k small."""

    P: tuple
    numerators: tuple
    n: int
    kernel_dim: int
    scalar: Scalar

    def to_json(self) -> dict:
        return {
            "kind": "hp-second",
            "scalar": self.scalar.to_json(),
            "n": self.n,
            "P": poly_to_json(self.P, self.scalar),
            "numerators": [poly_to_json(p, self.scalar) for p in self.numerators],
            "kernel_dim": self.kernel_dim,
        }


def first_kind_required_orders(d: DegreeVector):
    """Minimum truncation per series: building row j=N-1 needs f_k[N-1+d_k]."""
    N = d.order_target
    return [N - 1 + dk for dk in d]


def solve_first_kind(series, d: DegreeVector) -> HPFirst:
    series = list(series)
    if len(series) != len(d):
        raise ValueError("one degree per series component")
    scalar = same_kind(*[f.scalar for f in series])
    required = first_kind_required_orders(d)
    short = [k for k, f in enumerate(series) if f.order < required[k]]
    if short:
        raise TruncationError(
            f"series {short} truncated below the required orders {required}",
            required,
        )

    N = d.order_target
    offsets = _offsets(d)
    rows = []
    for j in range(1, N):
        row = [scalar.zero()] * N
        for k, f in enumerate(series):
            for i in range(d[k] + 1):
                row[offsets[k] + i] = f[i + j]
        rows.append(row)

    basis, rank = kernel_basis(rows, scalar)
    kernel_dim = len(basis)
    if kernel_dim == 0:
        raise DegenerateKernelError(
            "homogeneous system reports a zero kernel; this cannot happen for "
            f"consistent dimensions (rank {rank} of {N - 1}x{N})"
        )
    if kernel_dim == 1:
        vec = basis[0]
    else:
        vec = reduce_kernel_lexicographic(basis, _degree_priority(d), scalar)

    q = tuple(
        tuple(scalar.coerce(vec[offsets[k] + i]) for i in range(d[k] + 1))
        for k in range(len(d))
    )
    q0 = _polynomial_part_negated(q, series, scalar)
    hp = HPFirst(q0, q, d, None, kernel_dim, scalar)
    achieved = _achieved_order(hp, series)
    return replace(hp, achieved_order=achieved)


def _offsets(d: DegreeVector):
    offsets = []
    acc = 0
    for dk in d:
        offsets.append(acc)
        acc += dk + 1
    return offsets


def _degree_priority(d: DegreeVector):
    """Coordinate order for the kernel tie-break: kill q_s's top slots first."""
    offsets = _offsets(d)
    order = []
    for k in range(len(d) - 1, -1, -1):
        for i in range(d[k], -1, -1):
            order.append(offsets[k] + i)
    return order


def _polynomial_part_negated(q, series, scalar):
    dmax = max(len(qk) - 1 for qk in q)
    out = []
    for i in range(dmax + 1):
        acc = scalar.zero()
        for qk, f in zip(q, series):
            for j in range(i, len(qk)):
                acc += qk[j] * f[j - i]
        out.append(-acc)
    return tuple(trim(out))


def remainder_coefficient(hp: HPFirst, series, j: int):
    """Coefficient of z^-j in R = q_0 + sum q_k f_k (j >= 1)."""
    acc = hp.scalar.zero()
    for qk, f in zip(hp.q, series):
        if len(qk) - 1 + j > f.order:
            raise TruncationError(
                f"remainder coefficient {j} needs series order {len(qk) - 1 + j}",
                [len(qk) - 1 + j for qk in hp.q],
            )
        for i, c in enumerate(qk):
            acc += c * f[i + j]
    return acc


def remainder_series(hp: HPFirst, series, order: int) -> LaurentSeries:
    """Expansion of the remainder through z^-order.

    The leading admissible nonzero index is N = sum d_k + s; everything
    below it vanishes by construction (exactly so in exact mode).
    """
    max_order = min(f.order - (len(qk) - 1) for qk, f in zip(hp.q, series))
    if order > max_order:
        raise TruncationError(
            f"remainder order {order} needs series orders "
            f"{[len(qk) - 1 + order for qk in hp.q]}",
            [len(qk) - 1 + order for qk in hp.q],
        )
    coeffs = [hp.scalar.zero()]
    for j in range(1, order + 1):
        coeffs.append(remainder_coefficient(hp, series, j))
    return LaurentSeries(coeffs, hp.scalar)


def _achieved_order(hp: HPFirst, series):
    max_order = min(f.order - (len(qk) - 1) for qk, f in zip(hp.q, series))
    tol = None
    if not hp.scalar.exact:
        tol = mpmath.mpf(2) ** (-(hp.scalar.precision_bits // 2))
        scale = max(
            (abs(c) for qk in hp.q for c in qk), default=mpmath.mpf(1)
        )
    for j in range(1, max_order + 1):
        r = remainder_coefficient(hp, series, j)
        if hp.scalar.exact:
            if r != 0:
                return j
        elif abs(r) > tol * scale:
            return j
    return None


def normalize(hp: HPFirst, policy: str) -> HPFirst:
    """Rescale the kernel vector; zero sets are untouched.

    ``unit_c1`` sets the degree-bound coefficient of q_1 to one,
    ``monic_k`` (k = 1..s) makes q_k monic in its degree-bound slot, and
    ``spherical`` scales the largest coefficient magnitude to one.  When
    the reference coefficient vanishes the policy falls back to
    spherical and the applied label records that.
    """
    cs = hp.leading_coefficients
    if policy == "unit_c1":
        ref, label = cs[0], "unit_c1"
    elif policy.startswith("monic_"):
        k = int(policy.split("_", 1)[1])
        if not 1 <= k <= len(hp.q):
            raise ValueError(f"no component {k} for policy {policy}")
        ref, label = cs[k - 1], policy
    elif policy == "spherical":
        ref, label = None, "spherical"
    else:
        raise ValueError(f"unknown normalization policy {policy!r}")

    if label != "spherical":
        if _is_nonzero(ref, hp.scalar):
            return hp.scaled(_invert(ref, hp.scalar), label)
        label = f"spherical (fallback from {label}: reference coefficient zero)"

    mags = [abs(c) for qk in (hp.q0,) + hp.q for c in qk]
    m = max(mags)
    if m == 0:
        raise DegenerateKernelError("cannot normalize the zero solution")
    if hp.scalar.exact:
        big = max((c for qk in (hp.q0,) + hp.q for c in qk), key=abs)
        return hp.scaled(1 / abs(Fraction(big)), label)
    return hp.scaled(1 / m, label)


def _is_nonzero(c, scalar: Scalar) -> bool:
    if scalar.exact:
        return c != 0
    return abs(c) > mpmath.mpf(2) ** (-(scalar.precision_bits // 2))


def _invert(c, scalar: Scalar):
    return 1 / c if scalar.exact else mpmath.mpc(1) / c


def second_kind_required_order(n: int, s: int) -> int:
    return n * s + n + 2


def solve_second_kind(series, n: int) -> HPSecond:
    series = list(series)
    s = len(series)
    if n < 1:
        raise ValueError("n must be at least 1")
    scalar = same_kind(*[f.scalar for f in series])
    required = second_kind_required_order(n, s)
    short = [k for k, f in enumerate(series) if f.order < required]
    if short:
        raise TruncationError(
            f"series {short} truncated below the required order {required}",
            [required] * s,
        )

    ncols = n * s + 1
    rows = []
    for f in series:
        for j in range(1, n + 1):
            rows.append([f[i + j] for i in range(ncols)])

    basis, rank = kernel_basis(rows, scalar)
    kernel_dim = len(basis)
    if kernel_dim == 0:
        raise DegenerateKernelError(
            f"zero kernel in a {n * s}x{ncols} homogeneous system"
        )
    if kernel_dim == 1:
        vec = basis[0]
    else:
        # analogous tie-break: minimize deg P
        vec = reduce_kernel_lexicographic(
            basis, list(range(ncols - 1, -1, -1)), scalar
        )

    P = trim([scalar.coerce(c) for c in vec])
    if is_zero(P):
        raise DegenerateKernelError("kernel produced the zero denominator")
    lead = P[-1]
    P = tuple(c / lead for c in P)

    numerators = []
    dP = len(P) - 1
    for f in series:
        part = []
        for i in range(dP + 1):
            acc = scalar.zero()
            for j in range(i, dP + 1):
                acc += P[j] * f[j - i]
            part.append(acc)
        numerators.append(tuple(trim(part)))
    return HPSecond(P, tuple(numerators), n, kernel_dim, scalar)


def second_kind_defects(hp: HPSecond, series):
    """Coefficients of z^-1..z^-n of P f_k - Ptilde_k, per component.

    All of them are required to vanish; in exact mode they are exactly
    zero.
    """
    out = []
    for f in series:
        comp = []
        for j in range(1, hp.n + 1):
            acc = hp.scalar.zero()
            for i, c in enumerate(hp.P):
                acc += c * f[i + j]
            comp.append(acc)
        out.append(comp)
    return out

"""Zero-counting measures, grid measures, potentials and transforms.

Conventions (used consistently across the package):

* logarithmic potential  U^mu(z) = -integral log|z - x| dmu(x)
* Cauchy transform       C^mu(z) = integral (x - z)^(-1) dmu(x),
  so for the counting measure of a degree-n polynomial p,
  C(z) = -p'(z) / (n p(z)).

Grid measures carry their support intervals; the cell width around each
node (midpoint cells clipped to the interval) is the "spacing" used both
by the self-energy convention and by the on-support exclusion zone.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .rootfinding import find_roots
from .polynomials import trim


class MeasureError(ValueError):
    pass


@dataclass(frozen=True)
class IntervalSet:
    """Ordered disjoint closed real intervals."""

    intervals: tuple

    def __post_init__(self):
        ivs = tuple((float(a), float(b)) for a, b in self.intervals)
        if not ivs:
            raise MeasureError("interval set must be nonempty")
        for a, b in ivs:
            if not a < b:
                raise MeasureError(f"degenerate interval [{a}, {b}]")
        ivs = tuple(sorted(ivs))
        for (a1, b1), (a2, b2) in zip(ivs, ivs[1:]):
            if b1 >= a2:
                raise MeasureError("intervals must be pairwise disjoint")
        object.__setattr__(self, "intervals", ivs)

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self):
        return len(self.intervals)

    def contains(self, x: float) -> bool:
        return any(a <= x <= b for a, b in self.intervals)

    def component_of(self, x: float):
        for idx, (a, b) in enumerate(self.intervals):
            if a <= x <= b:
                return idx
        return None

    def to_json(self):
        return [list(iv) for iv in self.intervals]


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finite atomic measure; atoms may repeat to encode multiplicity."""

    atoms: tuple  # ((location complex, mass > 0), ...)

    def __post_init__(self):
        atoms = tuple((complex(z), float(m)) for z, m in self.atoms)
        if any(m <= 0 for _, m in atoms):
            raise MeasureError("atom masses must be positive")
        object.__setattr__(self, "atoms", atoms)

    @property
    def total_mass(self) -> float:
        return sum(m for _, m in self.atoms)

    def is_real(self, tol: float = 1e-9) -> bool:
        scale = max(1.0, max(abs(z) for z, _ in self.atoms))
        return all(abs(z.imag) <= tol * scale for z, _ in self.atoms)

    def to_json(self):
        return {"atoms": [[z.real, z.imag, m] for z, m in self.atoms]}

    @staticmethod
    def from_json(doc):
        return DiscreteMeasure(tuple((complex(re, im), m) for re, im, m in doc["atoms"]))


@dataclass(frozen=True)
class GridMeasure:
    """Nonnegative masses on fixed nodes inside declared intervals."""

    intervals: IntervalSet
    nodes: tuple
    weights: tuple
    declared_mass: float = None

    def __post_init__(self):
        nodes = tuple(float(x) for x in self.nodes)
        weights = np.asarray(self.weights, dtype=float)
        if len(nodes) != len(weights):
            raise MeasureError("nodes and weights must align")
        if np.any(weights < -1e-12 * max(1.0, float(np.max(np.abs(weights))))):
            raise MeasureError("grid weights must be nonnegative")
        weights = np.maximum(weights, 0.0)
        declared = self.declared_mass
        total = float(np.sum(weights))
        if declared is None:
            declared = total
        elif abs(total - declared) > 1e-10 * max(1.0, abs(declared)):
            raise MeasureError(
                f"total mass {total} differs from declared {declared}"
            )
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", tuple(float(w) for w in weights))
        object.__setattr__(self, "declared_mass", float(declared))

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.weights))

    @property
    def spacings(self) -> tuple:
        return _cell_widths(self.nodes, self.intervals)

    def min_spacing(self) -> float:
        return min(self.spacings)

    def node_array(self):
        return np.asarray(self.nodes)

    def weight_array(self):
        return np.asarray(self.weights)

    def density_estimates(self):
        return tuple(
            w / h for w, h in zip(self.weights, self.spacings)
        )

    def to_json(self):
        return {
            "grid": {
                "nodes": list(self.nodes),
                "weights": list(self.weights),
                "intervals": self.intervals.to_json(),
            }
        }

    @staticmethod
    def from_json(doc):
        g = doc["grid"]
        return GridMeasure(
            IntervalSet(tuple(tuple(iv) for iv in g["intervals"])),
            tuple(g["nodes"]),
            tuple(g["weights"]),
        )


def _cell_widths(nodes, intervals: IntervalSet):
    widths = [0.0] * len(nodes)
    order = sorted(range(len(nodes)), key=lambda i: nodes[i])
    pos = 0
    for a, b in intervals:
        group = []
        while pos < len(order) and a - 1e-12 <= nodes[order[pos]] <= b + 1e-12:
            group.append(order[pos])
            pos += 1
        if not group:
            continue
        xs = [nodes[i] for i in group]
        bounds = [a] + [(x1 + x2) / 2 for x1, x2 in zip(xs, xs[1:])] + [b]
        for i, idx in enumerate(group):
            widths[idx] = bounds[i + 1] - bounds[i]
    if pos != len(nodes):
        raise MeasureError("grid nodes fall outside the declared intervals")
    return tuple(widths)


# ---------------------------------------------------------------------------
# roots and counting measures
# ---------------------------------------------------------------------------


def roots(poly, precision: float = 1e-12, prec_bits: int = 256):
    """Multiset of roots (mpmath complex) with residual guarantees."""
    return find_roots(poly, precision=precision, prec_bits=prec_bits)


def counting_measure(poly, precision: float = 1e-12, prec_bits: int = 256) -> DiscreteMeasure:
    c = trim(list(poly))
    deg = len(c) - 1
    if deg < 1:
        raise MeasureError("counting measure needs degree at least 1")
    zs = roots(c, precision=precision, prec_bits=prec_bits)
    return DiscreteMeasure(tuple((complex(z), 1.0 / deg) for z in zs))


# ---------------------------------------------------------------------------
# potential / Cauchy transform
# ---------------------------------------------------------------------------


def potential(mu, z) -> float:
    """U^mu(z) = -integral log|z-x| dmu; +infinity at atoms."""
    zz = complex(z)
    if isinstance(mu, DiscreteMeasure):
        acc = 0.0
        for x, m in mu.atoms:
            d = abs(zz - x)
            if d == 0.0:
                return float("inf")
            acc -= m * np.log(d)
        return acc
    if isinstance(mu, GridMeasure):
        d = np.abs(zz - mu.node_array())
        if np.any(d == 0.0):
            return float("inf")
        return float(-np.dot(mu.weight_array(), np.log(d)))
    raise MeasureError(f"unsupported measure type {type(mu).__name__}")


def cauchy_transform(mu, z) -> complex:
    """C^mu(z) = integral (x-z)^(-1) dmu(x), z off the support."""
    zz = complex(z)
    if isinstance(mu, DiscreteMeasure):
        mind = min(abs(zz - x) for x, _ in mu.atoms)
        if mind == 0.0:
            raise MeasureError("Cauchy transform evaluated on an atom")
        return sum(m / (x - zz) for x, m in mu.atoms)
    if isinstance(mu, GridMeasure):
        nodes = mu.node_array()
        d = np.abs(zz - nodes)
        nearest = int(np.argmin(d))
        if d[nearest] <= mu.spacings[nearest]:
            raise MeasureError(
                "probe within one grid spacing of the support; move it off"
            )
        return complex(np.sum(mu.weight_array() / (nodes - zz)))
    raise MeasureError(f"unsupported measure type {type(mu).__name__}")


# ---------------------------------------------------------------------------
# discrepancies
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiscrepancyReport:
    sup_cauchy_error: float
    kolmogorov: float = None
    kolmogorov_per_component: tuple = None


def _mass_positions(mu):
    if isinstance(mu, DiscreteMeasure):
        if not mu.is_real():
            return None
        return sorted((x.real, m) for x, m in mu.atoms)
    if isinstance(mu, GridMeasure):
        return sorted(zip(mu.nodes, mu.weights))
    return None


def kolmogorov_distance(mu, nu, intervals: IntervalSet = None) -> tuple:
    """Sup-distance of local mass CDFs, per interval component, summed.

    Both measures must be supported on the real line.  With no declared
    intervals the whole line is a single component (the plain Kolmogorov
    distance).
    """
    pm, pn = _mass_positions(mu), _mass_positions(nu)
    if pm is None or pn is None:
        raise MeasureError("Kolmogorov distance needs real-supported measures")
    if intervals is None:
        lo = min(pm[0][0], pn[0][0]) - 1.0
        hi = max(pm[-1][0], pn[-1][0]) + 1.0
        comps = [(lo, hi)]
    else:
        comps = list(intervals)
    per = []
    for a, b in comps:
        am = [(x, m) for x, m in pm if a - 1e-12 <= x <= b + 1e-12]
        an = [(x, m) for x, m in pn if a - 1e-12 <= x <= b + 1e-12]
        events = sorted({x for x, _ in am} | {x for x, _ in an})
        fm = fn = 0.0
        im = jn = 0
        worst = 0.0
        for x in events:
            worst = max(worst, abs(fm - fn))  # left limit
            while im < len(am) and am[im][0] <= x:
                fm += am[im][1]
                im += 1
            while jn < len(an) and an[jn][0] <= x:
                fn += an[jn][1]
                jn += 1
            worst = max(worst, abs(fm - fn))
        per.append(worst)
    return sum(per), tuple(per)


def discrepancy(mu, nu, probes, intervals: IntervalSet = None) -> DiscrepancyReport:
    """Sup of |C^mu - C^nu| over probes, plus Kolmogorov for real supports."""
    probes = list(probes)
    if not probes:
        raise MeasureError("empty probe set")
    sup = 0.0
    for z in probes:
        sup = max(sup, abs(cauchy_transform(mu, z) - cauchy_transform(nu, z)))
    kol = kol_per = None
    try:
        kol, kol_per = kolmogorov_distance(mu, nu, intervals)
    except MeasureError:
        pass
    return DiscrepancyReport(float(sup), kol, kol_per)


def cdf_table_csv(mu, intervals: IntervalSet = None) -> str:
    """CSV of the mass CDF (position, cumulative mass, component)."""
    pm = _mass_positions(mu)
    if pm is None:
        raise MeasureError("CDF export needs a real-supported measure")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["position", "cdf", "component"])
    acc = 0.0
    for x, m in pm:
        acc += m
        comp = intervals.component_of(x) if intervals is not None else 0
        writer.writerow([repr(float(x)), repr(float(acc)), comp])
    return buf.getvalue()

"""Quadratic-differential geometry for S-curves and Chebotarev continua.

The differential -(V/A) dz^2 with A monic (roots = the prescribed point
set) and V monic of degree deg A - 2 defines the geometry.  The
continuum of minimal capacity through the point set is the union of
critical trajectories once the real parts of the arm integrals
integral of sqrt(V/A) between the critical points all vanish; those are
the period conditions solved here by damped Newton over candidate
Steiner topologies, with traced trajectories confirming the discovered
combinatorics.

The g-function block works on hyperelliptic data: for X of even degree
with distinct roots, the monic Y with Re(cycle periods of Y/sqrt(X)) = 0
is the solution of a real-linear system in Y's free coefficients, with
the elementary periods taken along a chain through the sorted roots.
"""

from __future__ import annotations

import cmath
import itertools
import math
import random
from dataclasses import dataclass, replace

import numpy as np

from .periods import SqrtRatio, capacity_from_qd, segment_integral, tracked_values
from .polynomials import poly_from_roots, poly_mul, trim
from .rootfinding import find_roots


class SCurveError(RuntimeError):
    def __init__(self, message, last_iterate=None, residuals=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residuals = residuals


class NonGenericConfiguration(SCurveError):
    """V-zeros collided or the traced structure is not a generic tree."""


@dataclass(frozen=True)
class QDSpec:
    """Polynomial pair (A, V), both monic, deg V = deg A - 2."""

    A: tuple  # ascending coefficients, monic
    V: tuple

    def __post_init__(self):
        A = tuple(complex(c) for c in self.A)
        V = tuple(complex(c) for c in self.V)
        if abs(A[-1] - 1) > 1e-9 or abs(V[-1] - 1) > 1e-9:
            raise SCurveError("A and V must be monic")
        if len(V) != len(A) - 2:
            raise SCurveError("need deg V = deg A - 2")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "V", V)

    @staticmethod
    def from_points(e_points, v_roots) -> "QDSpec":
        A = tuple(complex(c) for c in poly_from_roots([complex(a) for a in e_points], 1.0))
        V = tuple(complex(c) for c in poly_from_roots([complex(v) for v in v_roots], 1.0))
        return QDSpec(A, V)

    @property
    def e_points(self):
        return tuple(complex(r) for r in find_roots(list(self.A), prec_bits=128))

    @property
    def v_roots(self):
        if len(self.V) == 1:
            return ()
        return tuple(complex(r) for r in find_roots(list(self.V), prec_bits=128))

    def sqrt_ratio(self) -> SqrtRatio:
        return SqrtRatio(self.v_roots, self.e_points)

    def to_json(self):
        return {"A": [[c.real, c.imag] for c in self.A],
                "V": [[c.real, c.imag] for c in self.V]}


@dataclass(frozen=True)
class Trajectory:
    points: tuple
    endpoints: tuple  # two (kind, index) pairs, kind in {"a", "v", "unresolved"}
    arclength: float
    re_drift: float  # max |Re integral| variation along the polyline

    def to_json(self):
        return {
            "points": [[z.real, z.imag] for z in self.points],
            "endpoints": [list(ep) for ep in self.endpoints],
            "arclength": self.arclength,
            "re_drift": self.re_drift,
        }


@dataclass(frozen=True)
class ChebotarevResult:
    V: tuple  # ascending monic coefficients
    v_roots: tuple
    arcs: tuple  # Trajectory objects
    period_residuals: tuple
    combinatorics: tuple  # ((end_a, end_b, kind), ...) with kind "a-v" | "v-v" | "a-a"
    capacity: float
    e_points: tuple
    double_roots: tuple = ()

    def to_json(self):
        return {
            "V": [[c.real, c.imag] for c in self.V],
            "v_roots": [[v.real, v.imag] for v in self.v_roots],
            "arcs": [t.to_json() for t in self.arcs],
            "period_residuals": list(self.period_residuals),
            "combinatorics": [list(c) for c in self.combinatorics],
            "capacity": self.capacity,
            "e_points": [[a.real, a.imag] for a in self.e_points],
            "double_roots": [[u.real, u.imag] for u in self.double_roots],
        }


# ---------------------------------------------------------------------------
# Steiner topologies (candidate arc structures)
# ---------------------------------------------------------------------------


def _steiner_topologies(p: int):
    """Full Steiner trees on terminals 0..p-1; steiner nodes get ids >= p.

    Built by inserting one terminal at a time into every edge; gives the
    1, 3, 15, ... enumeration.  Practical for p <= 6.
    """
    if p == 2:
        return [[(0, 1)]]
    if p == 3:
        return [[(0, 3), (1, 3), (2, 3)]]
    smaller = _steiner_topologies(p - 1)
    out = []
    for edges in smaller:
        for idx in range(len(edges)):
            renamed = [
                (u if u < p - 1 else u + 1, v if v < p - 1 else v + 1)
                for u, v in edges
            ]
            x, y = renamed[idx]
            s = p + (p - 2) - 1  # next free steiner id
            rest = [ed for i, ed in enumerate(renamed) if i != idx]
            out.append(rest + [(x, s), (y, s), (p - 1, s)])
    return out


def _relax_steiner_positions(e_points, edges, p, iters=40):
    """Initial guesses: each steiner point relaxes to its neighbor mean."""
    n_steiner = max((max(u, v) for u, v in edges), default=1) - p + 1
    centroid = sum(e_points) / len(e_points)
    pos = {p + i: centroid for i in range(n_steiner)}
    nbrs = {p + i: [] for i in range(n_steiner)}
    for u, v in edges:
        for a, b in ((u, v), (v, u)):
            if a >= p:
                nbrs[a].append(b)
    for _ in range(iters):
        for s in sorted(nbrs):
            vals = [e_points[b] if b < p else pos[b] for b in nbrs[s]]
            pos[s] = sum(vals) / len(vals)
    return [pos[p + i] for i in range(n_steiner)]


# ---------------------------------------------------------------------------
# period conditions and Newton
# ---------------------------------------------------------------------------


def _edge_endpoint(node, e_points, vs):
    if node < len(e_points):
        return e_points[node]
    return list(vs)[node - len(e_points)]


def _period_residuals(e_points, vs, edges, nodes=160):
    """Re of sqrt(V/A) integrals over the given straight condition arcs."""
    fun = SqrtRatio(tuple(vs), tuple(e_points))
    out = []
    for u, v in edges:
        z0 = _edge_endpoint(u, e_points, vs)
        z1 = _edge_endpoint(v, e_points, vs)
        out.append(segment_integral(fun, z0, z1, nodes=nodes).real)
    return out


def _newton_periods(e_points, unknowns0, residual_fn, max_iter=60, tol=1e-13):
    """Damped Newton on Re-period conditions; unknowns are complex points."""
    x = np.array(
        [c for z in unknowns0 for c in (z.real, z.imag)], dtype=float
    )

    def as_points(xv):
        return [complex(xv[2 * i], xv[2 * i + 1]) for i in range(len(xv) // 2)]

    def F(xv):
        return np.array(residual_fn(as_points(xv)), dtype=float)

    scale = max(abs(a) for a in e_points) + 1.0
    f = F(x)
    for _ in range(max_iter):
        nrm = np.max(np.abs(f)) if len(f) else 0.0
        if nrm < tol:
            return as_points(x), f
        h = 1e-7 * scale
        J = np.zeros((len(f), len(x)))
        for j in range(len(x)):
            xp = x.copy()
            xp[j] += h
            J[:, j] = (F(xp) - f) / h
        try:
            step = np.linalg.solve(J, f) if J.shape[0] == J.shape[1] else \
                np.linalg.lstsq(J, f, rcond=None)[0]
        except np.linalg.LinAlgError:
            raise SCurveError("singular period Jacobian", as_points(x), list(f))
        lam = 1.0
        for _ in range(30):
            xn = x - lam * step
            fn = F(xn)
            if np.max(np.abs(fn)) < nrm:
                break
            lam *= 0.5
        else:
            raise SCurveError(
                "period Newton stalled", as_points(x), list(f)
            )
        x, f = xn, fn
    if np.max(np.abs(f)) < tol * 100:
        return as_points(x), f
    raise SCurveError("period Newton did not converge", as_points(x), list(f))


# ---------------------------------------------------------------------------
# trajectory tracing
# ---------------------------------------------------------------------------


def _initial_directions(spec_points, vs, doubles, z0, scale):
    """Trajectory ray directions leaving a critical point of -(V/A)dz^2."""
    e_points = list(spec_points)
    num = list(vs) + [u for u in doubles for _ in range(2)]

    def local_coeff(z):
        acc = 0.0j
        for r in num:
            if abs(r - z) > 1e-10 * scale:
                acc += cmath.log(z - r)
        for r in e_points:
            if abs(r - z) > 1e-10 * scale:
                acc -= cmath.log(z - r)
        return acc

    for a in e_points:
        if abs(z0 - a) <= 1e-10 * scale:
            c = cmath.exp(local_coeff(a))
            phi = math.pi - cmath.phase(c)
            return [cmath.exp(1j * phi)]
    for v in vs:
        if abs(z0 - v) <= 1e-10 * scale:
            c = cmath.exp(local_coeff(v))
            return [
                cmath.exp(1j * (math.pi * (1 + 2 * k) - cmath.phase(c)) / 3)
                for k in range(3)
            ]
    for u in doubles:
        if abs(z0 - u) <= 1e-10 * scale:
            c = cmath.exp(local_coeff(u))
            return [
                cmath.exp(1j * (math.pi * (1 + 2 * k) / 4 - cmath.phase(c) / 4))
                for k in range(4)
            ]
    raise SCurveError(f"{z0} is not a critical point of the differential")


def trace_trajectories(spec: QDSpec, start, tolerance: float = 1e-12,
                       max_steps: int = 20000):
    """All critical trajectories leaving a zero of A*V.

    Arclength-parameterized stepping along i * conj(w)/|w| for the
    tracked branch w of sqrt(V/A), with a projection step that keeps the
    accumulated Re integral pinned to zero; stops at another critical
    point, at the escape radius, or on step underflow (endpoint kind
    "unresolved").
    """
    e_points = list(spec.e_points)
    vs = list(spec.v_roots)
    scale = max(abs(a) for a in e_points) + 1.0
    escape = 4.0 * scale
    fun = spec.sqrt_ratio()
    crit = [("a", i, a) for i, a in enumerate(e_points)]
    crit += [("v", i, v) for i, v in enumerate(vs)]
    z0 = complex(start)
    dirs = _initial_directions(e_points, vs, (), z0, scale)

    start_kind = None
    for kind, idx, zc in crit:
        if abs(z0 - zc) <= 1e-10 * scale:
            start_kind = (kind, idx)
    out = []
    for d in dirs:
        out.append(_trace_one(fun, crit, z0, start_kind, d, scale, escape,
                              tolerance, max_steps))
    return out


def _trace_one(fun, crit, z0, start_kind, direction, scale, escape,
               tolerance, max_steps):
    h0 = 2e-3 * scale
    z = z0 + h0 * direction
    pts = [z0, z]
    w = fun.principal_value(z)
    arclength = h0
    phase = 0.0
    endpoint = ("unresolved", None)
    heading = direction
    h_next = 5e-3 * scale
    for _ in range(max_steps):
        # nearest critical point and capture
        dist = min(abs(z - zc) for _, _, zc in crit)
        for kind, idx, zc in crit:
            if abs(z - zc) < max(2.5e-3 * scale, 3 * tolerance):
                if (kind, idx) != start_kind or arclength > 10 * h0:
                    endpoint = (kind, idx)
                    pts.append(zc)
                    break
        if endpoint[0] != "unresolved":
            break
        if abs(z) > escape:
            endpoint = ("unresolved", None)
            break

        def vel(zz, wref):
            wv = fun.principal_value(zz)
            if abs(wv - wref) > abs(wv + wref):
                wv = -wv
            return 1j * np.conj(wv) / abs(wv), wv

        def rk4(z0, w0, head, h):
            v1, w1 = vel(z0, w0)
            if (v1 * np.conj(head)).real < 0:
                v1 = -v1
            k1 = h * v1
            v2, _ = vel(z0 + 0.5 * k1, w1)
            if (v2 * np.conj(v1)).real < 0:
                v2 = -v2
            k2 = h * v2
            v3, _ = vel(z0 + 0.5 * k2, w1)
            if (v3 * np.conj(v1)).real < 0:
                v3 = -v3
            k3 = h * v3
            v4, _ = vel(z0 + k3, w1)
            if (v4 * np.conj(v1)).real < 0:
                v4 = -v4
            k4 = h * v4
            z1 = z0 + (k1 + 2 * k2 + 2 * k3 + k4) / 6
            _, w1n = vel(z1, w1)
            return z1, w1n

        h = min(h_next, 0.25 * dist, 0.02 * scale)
        if h < 1e-9 * scale:
            break
        # step doubling: accept the halved step, adapt h to the local error
        for _ in range(30):
            z_full, _ = rk4(z, w, heading, h)
            z_h1, w_h1 = rk4(z, w, heading, h / 2)
            z_half, w_half = rk4(z_h1, w_h1, z_h1 - z, h / 2)
            err = abs(z_full - z_half) / 15.0
            if err <= tolerance * scale or h <= 1e-9 * scale:
                break
            h *= 0.5
        znew, wnew = z_half, w_half
        if err > 0:
            h_next = min(0.02 * scale,
                         0.9 * h * (tolerance * scale / err) ** 0.2)
        else:
            h_next = 0.02 * scale
        # project back onto the level line of the accumulated Re integral;
        # the chord integral is path-independent, so it senses exactly the
        # endpoint deviation (up to quadrature error)
        phase += _chord_re_integral(fun, z, znew, w)
        corr = -phase * np.conj(wnew) / abs(wnew) ** 2
        if abs(corr) < 0.5 * h:
            znew = znew + corr
            phase = 0.0
        heading = znew - z
        heading /= abs(heading)
        arclength += abs(znew - z)
        z, w = znew, wnew
        pts.append(z)
    drift = _polyline_re_drift(fun, pts)
    return Trajectory(tuple(pts), (start_kind or ("unresolved", None), endpoint),
                      float(arclength), float(drift))


_GL8 = np.polynomial.legendre.leggauss(8)


def _chord_re_integral(fun, z0, z1, wref):
    """Re integral of the tracked branch over the straight chord [z0, z1]."""
    xs, ws = _GL8
    mid = (z0 + z1) / 2
    half = (z1 - z0) / 2
    acc = 0.0
    wprev = wref
    for x, wt in zip(xs, ws):
        t = mid + half * x
        w = fun.principal_value(t)
        if abs(w - wprev) > abs(w + wprev):
            w = -w
        acc += wt * (w * half).real
        wprev = w
    return acc


def _polyline_re_drift(fun, pts):
    """Max |Re integral of sqrt(V/A)| at the resolved polyline vertices.

    The first and last hops (analytic launch from, and snap onto, a
    critical point) are excluded; chord integrals between vertices are
    path independent, so the vertex values measure how far the traced
    points leave the trajectory's level line.
    """
    inner = pts[1:-1]
    if len(inner) < 2:
        return 0.0
    wref = fun.principal_value(inner[0])
    worst = acc = 0.0
    for z0, z1 in zip(inner[:-1], inner[1:]):
        acc += _chord_re_integral(fun, z0, z1, wref)
        wref = fun.principal_value(z1)
        worst = max(worst, abs(acc))
    return worst


# ---------------------------------------------------------------------------
# Chebotarev solve
# ---------------------------------------------------------------------------


def chebotarev_solve(e_points, seed: int = 0, nodes: int = 160,
                     residual_tol: float = 1e-10) -> ChebotarevResult:
    """Minimal-capacity continuum through a finite point set.

    Solves the Re-period conditions by Newton over candidate Steiner
    topologies (weighted-centroid starts, then seeded multistart), keeps
    the verified solutions, and returns the one of least capacity.  The
    discovered combinatorics comes from traced trajectories, not from
    the assumed topology.
    """
    e_points = [complex(a) for a in e_points]
    p = len(e_points)
    if p < 2:
        raise SCurveError("need at least two points")
    if len({(round(a.real, 12), round(a.imag, 12)) for a in e_points}) != p:
        raise SCurveError("points must be pairwise distinct")
    if p == 2:
        return _two_point_result(e_points, nodes)

    rng = random.Random(seed)
    scale = max(abs(a) for a in e_points) + 1.0
    candidates = []
    failures = []
    for edges in _steiner_topologies(p):
        starts = [np.array(_relax_steiner_positions(e_points, edges, p))]
        for _ in range(8):
            starts.append(
                starts[0]
                + 0.15 * scale * np.array(
                    [complex(rng.gauss(0, 1), rng.gauss(0, 1))
                     for _ in range(p - 2)]
                )
            )
        cond_edges = _condition_edges(edges, p)
        for s0 in starts:
            try:
                vs, fvec = _newton_periods(
                    e_points,
                    list(s0),
                    lambda vs: _period_residuals(e_points, vs, cond_edges,
                                                 nodes=nodes),
                )
            except SCurveError as err:
                failures.append(err)
                continue
            try:
                result = _verify_and_package(e_points, vs, nodes, residual_tol)
            except SCurveError as err:
                failures.append(err)
                continue
            candidates.append(result)
            break  # this topology solved; no need for more starts
    if not candidates:
        last = failures[-1] if failures else None
        raise SCurveError(
            f"no topology produced a verified solution for {e_points}",
            getattr(last, "last_iterate", None),
            getattr(last, "residuals", None),
        )
    return min(candidates, key=lambda r: r.capacity)


def _condition_edges(edges, p):
    """All arcs except one dependent one (prefer dropping a v-v arc)."""
    vv = [ed for ed in edges if ed[0] >= p and ed[1] >= p]
    drop = vv[-1] if vv else edges[-1]
    return [ed for ed in edges if ed != drop]


def _two_point_result(e_points, nodes):
    a, b = e_points
    fun = SqrtRatio((), (a, b))
    res = abs(segment_integral(fun, a, b, nodes=nodes).real)
    pts = tuple(a + (b - a) * t for t in np.linspace(0, 1, 64))
    arc = Trajectory(pts, (("a", 0), ("a", 1)), float(abs(b - a)), 0.0)
    return ChebotarevResult(
        V=(1.0,),
        v_roots=(),
        arcs=(arc,),
        period_residuals=(float(res),),
        combinatorics=((0, 1, "a-a"),),
        capacity=float(abs(b - a)) / 4.0,
        e_points=tuple(e_points),
    )


def _verify_and_package(e_points, vs, nodes, residual_tol,
                        doubles=()) -> ChebotarevResult:
    p = len(e_points)
    scale = max(abs(a) for a in e_points) + 1.0
    all_zeros = list(vs) + list(doubles)
    for i in range(len(all_zeros)):
        for j in range(i + 1, len(all_zeros)):
            if abs(all_zeros[i] - all_zeros[j]) < 1e-6 * scale:
                raise NonGenericConfiguration(
                    "collided V-zeros suggest a non-generic configuration",
                    all_zeros,
                )
    for v in all_zeros:
        if min(abs(v - a) for a in e_points) < 1e-8 * scale:
            raise NonGenericConfiguration("V-zero collided with a branch point",
                                          all_zeros)

    spec = QDSpec.from_points(
        e_points, list(vs) + [u for u in doubles for _ in range(2)]
    )
    arcs, combos = _discover_arcs(spec, e_points, vs, doubles)
    fun = SqrtRatio(tuple(list(vs) + [u for u in doubles for _ in range(2)]),
                    tuple(e_points))
    residuals = []
    for (i, j, kind) in combos:
        ends = _combo_endpoints(i, j, kind, e_points, vs, doubles)
        residuals.append(abs(segment_integral(fun, ends[0], ends[1],
                                              nodes=nodes).real))
    if max(residuals) > residual_tol:
        raise SCurveError(
            f"verified-arc period residuals exceed {residual_tol}",
            list(vs), residuals,
        )
    if not doubles:
        n_av = sum(1 for c in combos if c[2] == "a-v")
        n_vv = sum(1 for c in combos if c[2] == "v-v")
        if n_av != p or n_vv != p - 3:
            raise NonGenericConfiguration(
                f"arc census ({n_av} a-v, {n_vv} v-v) is not the generic "
                f"({p}, {p - 3})",
                list(vs),
            )
    V = trim(list(spec.V))
    return ChebotarevResult(
        V=tuple(V),
        v_roots=tuple(vs),
        arcs=tuple(arcs),
        period_residuals=tuple(residuals),
        combinatorics=tuple(combos),
        capacity=capacity_from_qd(e_points, list(vs) + [u for u in doubles
                                                        for _ in range(2)]),
        e_points=tuple(e_points),
        double_roots=tuple(doubles),
    )


def _combo_endpoints(i, j, kind, e_points, vs, doubles):
    def node(tag, idx):
        return e_points[idx] if tag == "a" else (list(vs) + list(doubles))[idx]

    ka, kb = kind.split("-")
    return node(ka, i), node(kb, j)


def _discover_arcs(spec, e_points, vs, doubles):
    """Trace rays from every simple V-zero and branch point; pair them up."""
    arcs = []
    combos = []
    seen = set()
    sources = [("v", i, v) for i, v in enumerate(vs)]
    sources += [("a", i, a) for i, a in enumerate(e_points)]
    for kind, idx, z in sources:
        for traj in trace_trajectories(spec, z):
            (k0, i0), (k1, i1) = traj.endpoints
            if k1 == "unresolved":
                raise SCurveError(
                    f"trajectory from {kind}{idx} escaped or stalled; "
                    "combinatorics not confirmed",
                    list(vs),
                )
            key = frozenset([(k0, i0), (k1, i1)])
            if key in seen:
                continue
            seen.add(key)
            # order the pair canonically: a before v, then index
            pair = sorted([(k0, i0), (k1, i1)],
                          key=lambda t: (t[0] != "a", t[1]))
            label = f"{pair[0][0]}-{pair[1][0]}"
            arcs.append(traj)
            combos.append((pair[0][1], pair[1][1], label))
    return arcs, combos


# ---------------------------------------------------------------------------
# fused partitions (two-component minimal capacity)
# ---------------------------------------------------------------------------


def fuse_partition(e_points, partition, seed: int = 0, nodes: int = 160,
                   residual_tol: float = 1e-10) -> ChebotarevResult:
    """Minimal-capacity pair of continua for a two-part partition.

    V acquires a double zero (the saddle of the level function between
    the components) in place of a v-v pair; the condition system keeps
    all within-component arcs plus one connector path through the
    double zero, one condition being dropped as dependent.
    """
    e_points = [complex(a) for a in e_points]
    parts = [sorted(idx) for idx in partition]
    if len(parts) == 1:
        if sorted(parts[0]) != list(range(len(e_points))):
            raise SCurveError("trivial partition must cover all points")
        return chebotarev_solve(e_points, seed=seed, nodes=nodes,
                                residual_tol=residual_tol)
    if len(parts) != 2:
        raise SCurveError("only two-part partitions are supported")
    if any(len(pt) < 2 for pt in parts):
        raise SCurveError("both parts need at least 2 points")
    if sorted(parts[0] + parts[1]) != list(range(len(e_points))):
        raise SCurveError("partition must cover the point set exactly")

    pts = [[e_points[i] for i in part] for part in parts]
    cents = [sum(ps) / len(ps) for ps in pts]

    # component trees: 3-point parts get one steiner point, 2-point none
    comp_edges = []
    comp_vcount = []
    for ps in pts:
        if len(ps) == 2:
            comp_edges.append([(0, 1)])
            comp_vcount.append(0)
        elif len(ps) == 3:
            comp_edges.append([(0, 3), (1, 3), (2, 3)])
            comp_vcount.append(1)
        else:
            raise SCurveError("fusion implemented for parts of size 2 or 3")

    nv = sum(comp_vcount)

    def unpack(unknowns):
        vs_parts = []
        pos = 0
        for c in comp_vcount:
            vs_parts.append(list(unknowns[pos:pos + c]))
            pos += c
        u = unknowns[pos]
        return vs_parts, u

    # terminals closest to the other component anchor the connector
    anchors = [min(ps, key=lambda z: abs(z - cents[1 - i]))
               for i, ps in enumerate(pts)]

    def residual_fn(unknowns):
        vs_parts, u = unpack(unknowns)
        vs = [v for part in vs_parts for v in part]
        num = tuple(vs) + (u, u)
        fun = SqrtRatio(num, tuple(e_points))
        res = []
        for ci, (ps, edges) in enumerate(zip(pts, comp_edges)):
            local = vs_parts[ci]
            for (x, y) in edges:
                z0 = ps[x] if x < len(ps) else local[x - len(ps)]
                z1 = ps[y] if y < len(ps) else local[y - len(ps)]
                res.append(segment_integral(fun, z0, z1, nodes=nodes).real)
        # connector: anchor_0 -> u -> anchor_1
        res.append(
            segment_integral(fun, anchors[0], u, nodes=nodes).real
            + segment_integral(fun, u, anchors[1], nodes=nodes).real
        )
        return res[1:]  # drop the first arc condition as the dependent one

    rng = random.Random(seed)
    scale = max(abs(a) for a in e_points) + 1.0
    init = []
    for ps in pts:
        if len(ps) == 3:
            init.append(sum(ps) / 3)
    init.append((cents[0] + cents[1]) / 2)

    last_err = None
    for attempt in range(9):
        start = list(init)
        if attempt:
            start = [z + 0.15 * scale * complex(rng.gauss(0, 1), rng.gauss(0, 1))
                     for z in start]
        try:
            sol, _ = _newton_periods(e_points, start, residual_fn)
            vs_parts, u = unpack(sol)
            vs = [v for part in vs_parts for v in part]
            return _verify_and_package(e_points, vs, nodes, residual_tol,
                                       doubles=(u,))
        except SCurveError as err:
            last_err = err
    raise SCurveError("fusion Newton failed for every start",
                      getattr(last_err, "last_iterate", None),
                      getattr(last_err, "residuals", None))


# ---------------------------------------------------------------------------
# hyperelliptic g-function data
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GFunctionData:
    X: tuple  # ascending coefficients (monic) or None when built from roots
    x_roots: tuple
    Y: tuple  # ascending, monic, degree deg(X)/2 - 1
    period_residuals: tuple

    def to_json(self):
        return {
            "x_roots": [[r.real, r.imag] for r in self.x_roots],
            "Y": [[c.real, c.imag] for c in self.Y],
            "period_residuals": list(self.period_residuals),
        }


def g_function_Y(X, nodes: int = 200) -> GFunctionData:
    """Monic Y with vanishing real cycle periods of (Y / sqrt(X)) dz.

    ``X`` is an ascending coefficient list of even degree with distinct
    roots.  The conditions are linear in Y's coefficients: with the
    roots chained in sorted order, the real parts of the elementary
    segment integrals vanish for every segment except one slit whose
    condition is dependent.
    """
    coeffs = [complex(c) for c in X]
    if len(trim(coeffs)) % 2 == 0:
        raise SCurveError("X must have even degree >= 2")
    x_roots = [complex(r) for r in find_roots(coeffs, prec_bits=128)]
    return g_function_from_roots(x_roots, nodes=nodes)


def g_function_from_roots(x_roots, nodes: int = 200) -> GFunctionData:
    x_roots = [complex(r) for r in x_roots]
    if len(x_roots) % 2 or len(x_roots) < 2:
        raise SCurveError("X must have even degree >= 2")
    scale = max(abs(r) for r in x_roots) + 1.0
    for i in range(len(x_roots)):
        for j in range(i + 1, len(x_roots)):
            if abs(x_roots[i] - x_roots[j]) < 1e-10 * scale:
                raise SCurveError("g-function data needs distinct roots")
    Y, residuals = _g_y_from_roots(x_roots, nodes)
    return GFunctionData(
        X=tuple(complex(c) for c in poly_from_roots(x_roots, 1.0)),
        x_roots=tuple(x_roots),
        Y=tuple(complex(c) for c in Y),
        period_residuals=tuple(residuals),
    )


def _chain_order(roots):
    return sorted(roots, key=lambda z: (z.real, z.imag))


def _g_y_from_roots(x_roots, nodes):
    chain = _chain_order(list(x_roots))
    m = len(chain) // 2
    g = m - 1
    if g == 0:
        fun = SqrtRatio((), tuple(chain))
        res = abs(segment_integral(fun, chain[0], chain[1], nodes=nodes).real)
        return [1.0], [res]

    # moment integrals M[j][k] = integral over segment j of t^k / sqrt(X)
    segs = list(zip(chain, chain[1:]))
    fun = SqrtRatio((), tuple(chain))
    M = np.zeros((len(segs), m), dtype=complex)
    for j, (a, b) in enumerate(segs):
        for k in range(m):
            M[j, k] = segment_integral(fun, a, b, nodes=nodes,
                                       extra_poly=[0] * k + [1])
    # conditions: all segments except the last slit (index 2m-2)
    cond = [j for j in range(len(segs)) if j != 2 * m - 2]
    A = np.zeros((2 * g, 2 * g))
    rhs = np.zeros(2 * g)
    for r, j in enumerate(cond):
        for k in range(g):
            A[r, 2 * k] = M[j, k].real
            A[r, 2 * k + 1] = -M[j, k].imag
        rhs[r] = -M[j, g].real  # monic top coefficient t^(m-1)
    try:
        sol = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError:
        raise SCurveError("singular period matrix (degenerate configuration)")
    Y = [complex(sol[2 * k], sol[2 * k + 1]) for k in range(g)] + [1.0]
    residuals = []
    for j, (a, b) in enumerate(segs):
        val = sum(Y[k] * M[j, k] for k in range(m))
        residuals.append(abs(val.real))
    return Y, residuals


# ---------------------------------------------------------------------------
# fixed points of the V -> Y mapping
# ---------------------------------------------------------------------------


def fixed_point_check(spec: QDSpec, tolerance: float = 1e-8, nodes: int = 200):
    """Whether V reproduces itself through the g-function of sqrt(A V).

    X = A V may carry multiple roots (fused configurations); a root of
    multiplicity 2m or 2m+1 forces a zero of multiplicity m on Y, and
    the reduced problem runs on the remaining simple roots.  Returns a
    dict with the coefficient-wise residual ||T(V) - V||_inf.
    """
    e_points = list(spec.e_points)
    vs = list(spec.v_roots) if len(spec.V) > 1 else []
    scale = max(abs(a) for a in e_points) + 1.0
    all_roots = e_points + vs
    clusters = _cluster_points(all_roots, 1e-7 * scale)

    forced = []  # (location, multiplicity on Y)
    reduced = []
    for loc, mult in clusters:
        my = mult // 2
        if my:
            forced.append((loc, my))
        if mult % 2:
            reduced.append(loc)
    if len(reduced) % 2:
        raise SCurveError("odd reduced branch count; inconsistent multiplicities")
    if reduced:
        y_reduced, residuals = _g_y_from_roots(reduced, nodes)
    else:
        y_reduced, residuals = [1.0], []
    Y = list(y_reduced)
    for loc, my in forced:
        for _ in range(my):
            Y = poly_mul(Y, [-loc, 1.0])
    V = [complex(c) for c in spec.V]
    if len(Y) != len(V):
        raise SCurveError(
            f"degree mismatch: T(V) has degree {len(Y) - 1}, V has {len(V) - 1}"
        )
    residual = max(abs(complex(a) - complex(b)) for a, b in zip(Y, V))
    return {
        "is_fixed": bool(residual <= tolerance),
        "residual": float(residual),
        "mapped_Y": tuple(complex(c) for c in Y),
        "period_residuals": tuple(residuals),
    }


def _cluster_points(points, tol):
    points = [complex(z) for z in points]
    used = [False] * len(points)
    clusters = []
    for i, z in enumerate(points):
        if used[i]:
            continue
        group = [z]
        used[i] = True
        for j in range(i + 1, len(points)):
            if not used[j] and abs(points[j] - z) <= tol:
                group.append(points[j])
                used[j] = True
        clusters.append((sum(group) / len(group), len(group)))
    return clusters


# ---------------------------------------------------------------------------
# cubic model for s = 2
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CubicModel:
    A: tuple
    E: tuple
    F: tuple
    max_residual: float
    branch_sum_max: float
    fit_probes: tuple
    holdout_probes: tuple

    @property
    def leading_E(self):
        return self.E[-1]

    @property
    def leading_F(self):
        return self.F[-1]

    def to_json(self):
        enc = lambda p: [[c.real, c.imag] for c in p]
        return {
            "A": enc(self.A),
            "E": enc(self.E),
            "F": enc(self.F),
            "max_residual": self.max_residual,
            "branch_sum_max": self.branch_sum_max,
        }


def cubic_fit(lambda1, lambda2, A, probes) -> CubicModel:
    """Fit the cubic A w^3 - 3 E w + 2 F = 0 satisfied by the three
    Cauchy-transform branches {C^l1, C^l2, -C^(l1+l2)}.

    r0 = C^l1 C^l2 C^l and r1 = -C^l1 C^l2 + (C^l)^2 are evaluated on
    the even-indexed probes, A r1 and A r0 are fitted by least squares
    as polynomials of degree p-2 and p-3 (p = deg A), and E = fit(A r1)/3,
    F = fit(A r0)/2; odd-indexed probes are held out for the residual.
    """
    from .measures import GridMeasure, cauchy_transform

    for lam in (lambda1, lambda2):
        if lam.total_mass <= 0:
            raise SCurveError("component measures must carry positive mass")
    A = [complex(c) for c in A]
    p = len(trim(A)) - 1
    if p < 3:
        raise SCurveError("need deg A >= 3 for a nontrivial cubic")
    probes = [complex(z) for z in probes]
    if len(probes) < 2 * p:
        raise SCurveError("need at least 2 deg A probes")

    combined = _merge_grid(lambda1, lambda2)
    u = np.array([cauchy_transform(lambda1, z) for z in probes])
    v = np.array([cauchy_transform(lambda2, z) for z in probes])
    cl = np.array([cauchy_transform(combined, z) for z in probes])
    branch_sum = np.max(np.abs(u + v - cl))

    r0 = u * v * cl
    r1 = -u * v + cl ** 2
    Az = np.array([_polyval(A, z) for z in probes])

    fit_idx = list(range(0, len(probes), 2))
    hold_idx = list(range(1, len(probes), 2))
    zf = np.array([probes[i] for i in fit_idx])

    def lstsq_poly(target, deg):
        Vand = np.vander(zf, deg + 1, increasing=True)
        sol, res, rank, _ = np.linalg.lstsq(Vand, target, rcond=None)
        if rank < deg + 1:
            raise SCurveError("rank-deficient cubic fit; add probes")
        return sol

    N1 = lstsq_poly((Az * r1)[fit_idx], p - 2)
    N0 = lstsq_poly((Az * r0)[fit_idx], p - 3)
    E = N1 / 3.0
    F = N0 / 2.0

    worst = 0.0
    for i in hold_idx:
        for w in (u[i], v[i], -cl[i]):
            val = Az[i] * w ** 3 - 3 * _polyval(E, probes[i]) * w \
                + 2 * _polyval(F, probes[i])
            worst = max(worst, abs(val))
    return CubicModel(
        A=tuple(A),
        E=tuple(complex(c) for c in E),
        F=tuple(complex(c) for c in F),
        max_residual=float(worst),
        branch_sum_max=float(branch_sum),
        fit_probes=tuple(probes[i] for i in fit_idx),
        holdout_probes=tuple(probes[i] for i in hold_idx),
    )


def _merge_grid(lambda1, lambda2):
    from .measures import GridMeasure, IntervalSet

    ivs = tuple(lambda1.intervals) + tuple(lambda2.intervals)
    return GridMeasure(
        IntervalSet(ivs),
        tuple(lambda1.nodes) + tuple(lambda2.nodes),
        tuple(lambda1.weights) + tuple(lambda2.weights),
    )


def _polyval(coeffs, z):
    acc = 0j
    for c in reversed(list(coeffs)):
        acc = acc * z + complex(c)
    return acc

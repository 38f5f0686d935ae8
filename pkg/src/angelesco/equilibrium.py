"""Scalar weighted and Angelesco vector equilibrium on real interval sets.

Discretization: per-interval Chebyshev-point grids; point masses on the
nodes with the log-kernel and the self-interaction convention
-m_i^2 log(spacing_i / 4) (each node behaves like the arcsine segment of
its own cell).  That convention is the single source of truth for all
self-energies in the package.

The scalar minimizer runs projected gradient with Armijo backtracking
and falls back to an active-set refinement on stall; the vector problem
is solved by component-wise relaxation, each component re-solved in the
external field induced by the others (half the sum of their
potentials).  The interaction matrix has diagonal 2 and off-diagonal 1,
so the total energy is twice (sum of self-energies plus the sum of
pairwise mutual energies) and decreases at every sweep.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .measures import GridMeasure, IntervalSet, MeasureError, potential


class EquilibriumError(RuntimeError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or []


# ---------------------------------------------------------------------------
# external fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ZeroField:
    def values(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class PolynomialField:
    coeffs: tuple

    def values(self, x):
        x = np.asarray(x, dtype=float)
        acc = np.zeros_like(x)
        for c in reversed(self.coeffs):
            acc = acc * x + float(c)
        return acc


@dataclass(frozen=True)
class PotentialField:
    """coefficient * U^measure, evaluated off the measure's support."""

    measure: object
    coefficient: float = 0.5

    def values(self, x):
        x = np.asarray(x, dtype=float)
        return np.array(
            [self.coefficient * potential(self.measure, xi) for xi in x]
        )


@dataclass(frozen=True)
class SumField:
    parts: tuple

    def values(self, x):
        x = np.asarray(x, dtype=float)
        acc = np.zeros_like(x)
        for p in self.parts:
            acc = acc + p.values(x)
        return acc


# ---------------------------------------------------------------------------
# grids and kernels
# ---------------------------------------------------------------------------


def _chebyshev_offsets(m: int) -> np.ndarray:
    """Antisymmetric Chebyshev-point offsets on [-1, 1] (exact mirror)."""
    th = (2 * np.arange(m) + 1) * np.pi / (2 * m)
    c = np.cos(th)
    half = m // 2
    for j in range(half):
        c[m - 1 - j] = -c[j]
    if m % 2 == 1:
        c[half] = 0.0
    return np.sort(c)


def build_grid(intervals: IntervalSet, m_per_interval: int) -> tuple:
    nodes = []
    for a, b in intervals:
        mid, half = (a + b) / 2, (b - a) / 2
        nodes.extend(mid + half * _chebyshev_offsets(m_per_interval))
    return tuple(nodes)


def _cells(measure_like) -> tuple:
    """Midpoint-cell centers and radii of a grid (nodes within intervals)."""
    nodes, intervals = measure_like
    gm = GridMeasure(intervals, nodes, (0.0,) * len(nodes), 0.0)
    sp = np.asarray(gm.spacings)
    x = np.asarray(nodes)
    # reconstruct cell centers from the boundaries used for the spacings
    centers = np.empty_like(x)
    order = np.argsort(x)
    pos = 0
    for a, b in intervals:
        group = [i for i in order[pos:] if a - 1e-12 <= x[i] <= b + 1e-12]
        xs = x[group]
        bounds = np.concatenate(([a], (xs[:-1] + xs[1:]) / 2, [b]))
        centers[group] = (bounds[1:] + bounds[:-1]) / 2
        pos += len(group)
    return centers, sp / 2.0


def segment_potential(points, centers, radii) -> np.ndarray:
    """Potential at ``points`` of unit arcsine masses on segments.

    Entry (i, j) is -log of |Joukowski image| of point i relative to
    segment j; it matches -log|p - c_j| up to O((r_j/d)^2) at distance d
    and stays finite down to the segment boundary.
    """
    s = np.abs(np.asarray(points)[:, None] - np.asarray(centers)[None, :])
    arg = np.maximum(s * s - (np.asarray(radii) ** 2)[None, :], 0.0)
    return -np.log(np.maximum((s + np.sqrt(arg)) / 2.0, 1e-300))


def log_kernel(nodes, intervals: IntervalSet) -> np.ndarray:
    """Self-interaction kernel of a grid: arcsine cells, symmetrized.

    The diagonal is -log(spacing/4), the self-potential of the cell's
    own arcsine segment; off-diagonal entries are exact segment
    potentials instead of raw point logs, which removes half of the
    O(1/M) bias of the pure point scheme.
    """
    centers, radii = _cells((nodes, intervals))
    K = segment_potential(nodes, centers, radii)
    np.fill_diagonal(K, -np.log((2.0 * radii) / 4.0))
    return (K + K.T) / 2.0


def cross_kernel(nodes_a, intervals_a, nodes_b, intervals_b) -> np.ndarray:
    """Mutual interaction matrix between two disjoint grids, symmetrized."""
    ca, ra = _cells((nodes_a, intervals_a))
    cb, rb = _cells((nodes_b, intervals_b))
    Kab = segment_potential(nodes_a, cb, rb)
    Kba = segment_potential(nodes_b, ca, ra)
    return (Kab + Kba.T) / 2.0


# ---------------------------------------------------------------------------
# scalar weighted equilibrium
# ---------------------------------------------------------------------------


@dataclass
class ScalarEquilibrium:
    measure: GridMeasure
    w: float
    kkt_on_support: float
    kkt_off_support: float
    support_nodes: tuple
    iterations: int
    energy: float


def _project_simplex(v: np.ndarray, total: float) -> np.ndarray:
    """Euclidean projection onto {x >= 0, sum x = total}."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - total
    rho = np.nonzero(u - css / (np.arange(len(v)) + 1) > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def _projected_gradient(K, phi, t, x0, max_iter=300, stall_tol=1e-14):
    x = x0.copy()
    energy = float(x @ K @ x + 2 * phi @ x)
    step = 1.0 / (np.abs(K).sum(axis=1).max() + 1.0)
    history = [energy]
    for it in range(max_iter):
        grad = 2.0 * (K @ x + phi)
        alpha = step
        for _ in range(40):
            xn = _project_simplex(x - alpha * grad, t)
            en = float(xn @ K @ xn + 2 * phi @ xn)
            if en <= energy - 1e-4 * alpha * float(grad @ (x - xn)) or en < energy:
                break
            alpha *= 0.5
        if en >= energy - stall_tol * max(1.0, abs(energy)):
            x, energy = xn if en < energy else x, min(en, energy)
            return x, energy, it + 1, True
        x, energy = xn, en
        history.append(energy)
    return x, energy, max_iter, True


def _active_set(K, phi, t, support, kkt_tol, max_iter=120):
    """Exact KKT refinement on a working support set."""
    n = len(phi)
    S = np.array(sorted(support), dtype=int)
    trace = []
    for it in range(max_iter):
        k = len(S)
        A = np.zeros((k + 1, k + 1))
        A[:k, :k] = K[np.ix_(S, S)]
        A[:k, k] = -1.0
        A[k, :k] = 1.0
        rhs = np.concatenate([-phi[S], [t]])
        try:
            sol = np.linalg.solve(A, rhs)
        except np.linalg.LinAlgError:
            sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
        xS, w = sol[:k], sol[k]
        if np.any(xS < 0):
            keep = xS > 0
            if not np.any(keep):
                raise EquilibriumError("active set collapsed", trace)
            S = S[keep]
            trace.append(("drop", int(k - keep.sum())))
            continue
        x = np.zeros(n)
        x[S] = xS
        U = K @ x + phi
        outside = np.setdiff1d(np.arange(n), S, assume_unique=False)
        if len(outside):
            viol = w - U[outside]
            worst = np.argmax(viol)
            if viol[worst] > kkt_tol * 0.1:
                S = np.sort(np.append(S, outside[worst]))
                trace.append(("add", int(outside[worst])))
                continue
        return x, float(w), it + 1
    raise EquilibriumError("active-set refinement did not converge", trace)


def scalar_weighted_equilibrium(
    intervals: IntervalSet,
    fieldspec=None,
    t: float = 1.0,
    m_per_interval: int = 200,
    kkt_tol: float = 1e-6,
    _prepared=None,
) -> ScalarEquilibrium:
    """Discrete minimizer of the weighted logarithmic energy on intervals.

    Minimizes x^T K x + 2 phi . x over {x >= 0, sum x = t} and reports
    the equilibrium constant w (the KKT multiplier) together with the
    residuals max |U + phi - w| on the computed support and
    min (U + phi - w) off it.
    """
    if t <= 0:
        raise EquilibriumError("total mass must be positive")
    if _prepared is not None:
        nodes, K, phi, x0 = _prepared
    else:
        if m_per_interval < 50:
            raise EquilibriumError("need at least 50 grid points per interval")
        nodes = build_grid(intervals, m_per_interval)
        K = log_kernel(nodes, intervals)
        fieldspec = fieldspec or ZeroField()
        phi = np.asarray(fieldspec.values(np.asarray(nodes)), dtype=float)
        x0 = np.full(len(nodes), t / len(nodes))

    x, energy, pg_iters, stalled = _projected_gradient(K, phi, t, x0)
    support = np.nonzero(x > 1e-12 * t)[0]
    if len(support) == 0:
        support = np.arange(len(x))
    x, w, as_iters = _active_set(K, phi, t, support, kkt_tol)

    U = K @ x + phi
    sup_mask = x > 1e-12 * t
    on_res = float(np.max(np.abs(U[sup_mask] - w))) if np.any(sup_mask) else 0.0
    off_res = float(np.min(U[~sup_mask] - w)) if np.any(~sup_mask) else 0.0
    if on_res > kkt_tol or off_res < -kkt_tol:
        raise EquilibriumError(
            f"KKT residuals exceed tolerance: on-support {on_res}, "
            f"off-support {off_res}",
            [on_res, off_res],
        )
    gm = GridMeasure(intervals, nodes, tuple(x), t)
    energy = float(x @ K @ x + 2 * phi @ x)
    return ScalarEquilibrium(
        measure=gm,
        w=float(w),
        kkt_on_support=on_res,
        kkt_off_support=off_res,
        support_nodes=tuple(np.asarray(nodes)[sup_mask]),
        iterations=pg_iters + as_iters,
        energy=energy,
    )


# ---------------------------------------------------------------------------
# vector (Angelesco) equilibrium
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AngelescoProblem:
    """Disjoint interval sets with positive component masses."""

    interval_sets: tuple  # of IntervalSet
    masses: tuple = None
    m_per_interval: int = 200

    def __post_init__(self):
        sets = tuple(
            s if isinstance(s, IntervalSet) else IntervalSet(tuple(s))
            for s in self.interval_sets
        )
        flat = [iv for s in sets for iv in s]
        IntervalSet(tuple(flat))  # raises unless globally disjoint
        masses = self.masses or (1.0,) * len(sets)
        masses = tuple(float(m) for m in masses)
        if len(masses) != len(sets):
            raise EquilibriumError("one mass per component")
        if any(m <= 0 for m in masses):
            raise EquilibriumError("component masses must be positive")
        object.__setattr__(self, "interval_sets", sets)
        object.__setattr__(self, "masses", masses)

    @property
    def s(self):
        return len(self.interval_sets)


@dataclass
class EquilibriumSolution:
    components: tuple  # GridMeasure per k
    w: tuple  # equilibrium constants of the vector potential W_k
    energy: float
    kkt_residuals: tuple  # (on_support, off_support) per component
    sweeps: int
    energy_trace: tuple


def mutual_energy(mu: GridMeasure, nu: GridMeasure) -> float:
    """[mu, nu] = integral U^nu dmu; self-pairs use the cell convention."""
    if mu is nu:
        K = log_kernel(mu.nodes, mu.intervals)
        x = mu.weight_array()
        return float(x @ K @ x)
    d = np.abs(mu.node_array()[:, None] - nu.node_array()[None, :])
    if np.any(d == 0):
        raise EquilibriumError("mutual energy of overlapping grids is singular")
    C = cross_kernel(mu.nodes, mu.intervals, nu.nodes, nu.intervals)
    return float(mu.weight_array() @ C @ nu.weight_array())


def vector_energy(components) -> float:
    """[A mu, mu] with a_ii = 2 and a_ij = 1."""
    comps = list(components)
    total = 0.0
    for i, mu in enumerate(comps):
        total += 2.0 * _self_energy(mu)
        for j in range(i + 1, len(comps)):
            total += 2.0 * _pair_energy(mu, comps[j])
    return total


def _self_energy(mu) -> float:
    if isinstance(mu, GridMeasure):
        return mutual_energy(mu, mu)
    # atoms carry infinite self-energy
    return math.inf if mu.total_mass > 0 else 0.0


def _pair_energy(mu, nu) -> float:
    if isinstance(mu, GridMeasure) and isinstance(nu, GridMeasure):
        return mutual_energy(mu, nu)
    am = _atoms_of(mu)
    an = _atoms_of(nu)
    acc = 0.0
    for x, m in am:
        for y, w in an:
            d = abs(complex(x) - complex(y))
            if d == 0:
                return math.inf
            acc -= m * w * math.log(d)
    return acc


def _atoms_of(mu):
    if isinstance(mu, GridMeasure):
        return list(zip(mu.nodes, mu.weights))
    return list(mu.atoms)


def solve_angelesco(
    problem: AngelescoProblem,
    energy_tol: float = 1e-10,
    weight_tol: float = 1e-10,
    max_sweeps: int = 200,
    kkt_tol: float = 1e-6,
    initial=None,
) -> EquilibriumSolution:
    """Component-wise relaxation for the vector equilibrium measure.

    Each sweep re-solves every component in the field half-sum of the
    other potentials; the total energy is nonincreasing because every
    component update is an exact minimization of the same convex
    functional.  Iteration stops when the per-sweep energy decrease
    falls below ``energy_tol`` and the weights have stabilized to
    ``weight_tol`` in the sup norm.
    """
    s = problem.s
    grids = []
    kernels = []
    for k in range(s):
        nodes = build_grid(problem.interval_sets[k], problem.m_per_interval)
        grids.append(np.asarray(nodes))
        kernels.append(log_kernel(nodes, problem.interval_sets[k]))

    if initial is None:
        xs = [
            np.full(len(grids[k]), problem.masses[k] / len(grids[k]))
            for k in range(s)
        ]
    else:
        xs = [np.asarray(v, dtype=float) for v in initial]

    cross = {}
    for k in range(s):
        for i in range(k + 1, s):
            C = cross_kernel(
                tuple(grids[k]), problem.interval_sets[k],
                tuple(grids[i]), problem.interval_sets[i],
            )
            cross[(k, i)] = C
            cross[(i, k)] = C.T

    def field_on(k):
        acc = np.zeros(len(grids[k]))
        for i in range(s):
            if i != k:
                acc += cross[(k, i)] @ xs[i]
        return 0.5 * acc

    def total_energy():
        e = 0.0
        for k in range(s):
            e += 2.0 * float(xs[k] @ kernels[k] @ xs[k])
            for i in range(k + 1, s):
                e += 2.0 * float(xs[k] @ cross[(k, i)] @ xs[i])
        return e

    ws = [0.0] * s
    kkts = [(0.0, 0.0)] * s
    trace = [total_energy()]
    sweeps = 0
    for sweep in range(max_sweeps):
        sweeps = sweep + 1
        max_change = 0.0
        for k in range(s):
            phi = field_on(k)
            res = scalar_weighted_equilibrium(
                problem.interval_sets[k],
                t=problem.masses[k],
                kkt_tol=kkt_tol,
                _prepared=(tuple(grids[k]), kernels[k], phi, xs[k]),
            )
            xnew = res.measure.weight_array()
            max_change = max(max_change, float(np.max(np.abs(xnew - xs[k]))))
            xs[k] = xnew
            ws[k] = 2.0 * res.w
            kkts[k] = (res.kkt_on_support, res.kkt_off_support)
        trace.append(total_energy())
        decrease = trace[-2] - trace[-1]
        if decrease < -1e-12 * max(1.0, abs(trace[-2])):
            raise EquilibriumError(
                f"energy increased by {-decrease} at sweep {sweeps}", trace
            )
        if decrease < energy_tol and max_change < weight_tol:
            break
    else:
        raise EquilibriumError(
            f"no convergence within {max_sweeps} sweeps", trace
        )

    comps = tuple(
        GridMeasure(problem.interval_sets[k], tuple(grids[k]), tuple(xs[k]),
                    problem.masses[k])
        for k in range(s)
    )
    # doubled scalar residuals bound the vector-potential residuals
    kkt = tuple((2.0 * a, 2.0 * b) for a, b in kkts)
    return EquilibriumSolution(
        components=comps,
        w=tuple(ws),
        energy=trace[-1],
        kkt_residuals=kkt,
        sweeps=sweeps,
        energy_trace=tuple(trace),
    )


@dataclass(frozen=True)
class VariationalReport:
    per_component: tuple  # dicts with on/off support residuals


def variational_report(sol: EquilibriumSolution, problem: AngelescoProblem) -> VariationalReport:
    """Residuals of W_k = U^(lambda_k + lambda) against the constants w_k."""
    s = problem.s
    rows = []
    for k in range(s):
        mu = sol.components[k]
        K = log_kernel(mu.nodes, mu.intervals)
        Wk = 2.0 * (K @ mu.weight_array())
        for i in range(s):
            if i == k:
                continue
            other = sol.components[i]
            C = cross_kernel(mu.nodes, mu.intervals, other.nodes, other.intervals)
            Wk += C @ other.weight_array()
        mask = mu.weight_array() > 1e-12 * mu.declared_mass
        on = float(np.max(np.abs(Wk[mask] - sol.w[k]))) if np.any(mask) else 0.0
        off = float(np.min(Wk[~mask] - sol.w[k])) if np.any(~mask) else 0.0
        rows.append({
            "component": k,
            "max_abs_on_support": on,
            "min_off_support": off,
            "support_nodes": int(np.sum(mask)),
        })
    return VariationalReport(tuple(rows))

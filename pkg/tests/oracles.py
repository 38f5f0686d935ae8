"""Independent oracles used by the test suite.

Everything here recomputes expected values by a route different from
the production code: term-by-term binomial products, textbook
elimination with a different pivot order, classical recurrences,
adaptive quadrature, a joint active-set QP, and boundary-element
capacities on perturbed Steiner trees.  Nothing imports the production
solvers' internals.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np


# ---------------------------------------------------------------------------
# series oracles
# ---------------------------------------------------------------------------


def binomial_series(a: Fraction, alpha: Fraction, order: int):
    """(1 - a/z)^alpha as exact z^-m coefficients."""
    out = [Fraction(1)]
    c = Fraction(1)
    for k in range(1, order + 1):
        c = c * (Fraction(alpha) - (k - 1)) / k
        out.append(c * (-Fraction(a)) ** k)
    return out


def product_truncated(series_list, order: int):
    acc = [Fraction(1)] + [Fraction(0)] * order
    for s in series_list:
        acc = [
            sum(acc[i] * s[m - i] for i in range(m + 1))
            for m in range(order + 1)
        ]
    return acc


def jacobi_product_oracle(points, exponents, order: int):
    """prod (z-a)^alpha / z^(sum alpha) via term-by-term binomials."""
    return product_truncated(
        [binomial_series(a, al, order) for a, al in zip(points, exponents)],
        order,
    )


def quad_moment(density, interval, j: int) -> float:
    from scipy.integrate import quad

    a, b = float(interval[0]), float(interval[1])
    val, _ = quad(lambda x: x ** j * density(x), a, b, limit=200)
    return val


# ---------------------------------------------------------------------------
# linear-algebra oracle (different elimination order)
# ---------------------------------------------------------------------------


def kernel_vector_bottom_up(rows):
    """One kernel vector by Gauss-Jordan scanning pivots from the right.

    Free variable: the leftmost column never used as a pivot, set to 1.
    Exact over the rationals; deliberately mirrors none of the
    production choices (no fraction-free step, right-to-left pivots).
    """
    m = [[Fraction(x) for x in row] for row in rows]
    nrows, ncols = len(m), len(m[0])
    pivots = {}
    r = 0
    for c in range(ncols - 1, -1, -1):
        pr = None
        for i in range(r, nrows):
            if m[i][c] != 0:
                pr = i
                break
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        piv = m[r][c]
        m[r] = [x / piv for x in m[r]]
        for i in range(nrows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots[c] = r
        r += 1
        if r == nrows:
            break
    free = [c for c in range(ncols) if c not in pivots]
    if not free:
        raise ValueError("trivial kernel")
    f0 = free[0]
    x = [Fraction(0)] * ncols
    x[f0] = Fraction(1)
    for c, rr in pivots.items():
        x[c] = -m[rr][f0]
    return x


def first_kind_system_rows(series_list, degrees):
    """The homogeneous defect system, assembled independently."""
    N = sum(degrees) + len(degrees)
    rows = []
    for j in range(1, N):
        row = []
        for f, d in zip(series_list, degrees):
            row.extend(Fraction(f[i + j]) for i in range(d + 1))
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# classical recurrences
# ---------------------------------------------------------------------------


def chebyshev_T_monic(n: int):
    """Monic Chebyshev polynomial of the first kind, exact coefficients."""
    t0 = [Fraction(1)]
    t1 = [Fraction(0), Fraction(1)]
    if n == 0:
        return t0
    for _ in range(n - 1):
        t2 = [Fraction(0)] + [2 * c for c in t1]
        t2 = [a - b for a, b in zip(t2, t0 + [Fraction(0)] * (len(t2) - len(t0)))]
        t0, t1 = t1, t2
    lead = t1[-1]
    return [c / lead for c in t1]


# ---------------------------------------------------------------------------
# QP oracles (scalar and joint) with their own active-set logic
# ---------------------------------------------------------------------------


def qp_simplex_blocks(K, phi, totals, blocks, max_iter=300):
    """min x^T K x + 2 phi.x subject to x >= 0 and per-block mass sums.

    One-at-a-time active-set updates (most negative weight leaves, worst
    KKT violator enters) with the equality constraints eliminated by
    substitution; distinct from the production solver's batch updates.
    """
    n = len(phi)
    nb = len(blocks)
    active = set(range(n))
    for _ in range(max_iter):
        idx = sorted(active)
        k = len(idx)
        A = np.zeros((k + nb, k + nb))
        A[:k, :k] = K[np.ix_(idx, idx)]
        rhs = np.zeros(k + nb)
        rhs[:k] = -phi[idx]
        for b, block in enumerate(blocks):
            cols = [i for i, g in enumerate(idx) if g in block]
            A[:k, k + b][cols] = -1.0
            A[k + b, cols] = 1.0
            rhs[k + b] = totals[b]
        sol = np.linalg.lstsq(A, rhs, rcond=None)[0]
        x_act = sol[:k]
        if np.any(x_act < -1e-14):
            worst = idx[int(np.argmin(x_act))]
            active.discard(worst)
            continue
        x = np.zeros(n)
        x[idx] = np.maximum(x_act, 0.0)
        w = sol[k:]
        U = K @ x + phi
        viol_val, viol_at = 0.0, None
        for b, block in enumerate(blocks):
            for i in block:
                if i not in active and w[b] - U[i] > viol_val + 1e-12:
                    viol_val, viol_at = w[b] - U[i], i
        if viol_at is None or viol_val < 1e-10:
            return x, w
        active.add(viol_at)
    raise RuntimeError("oracle active set did not converge")


# ---------------------------------------------------------------------------
# boundary-element capacity of trees (Chebotarev oracle)
# ---------------------------------------------------------------------------


def _tree_nodes(terminals, steiner, bends, m_per_arm):
    """Quadratic-bezier arms from each terminal to the steiner point."""
    pts = []
    widths = []
    for a, bend in zip(terminals, bends):
        mid = (a + steiner) / 2
        normal = 1j * (steiner - a) / abs(steiner - a)
        ctrl = mid + bend * normal
        # chebyshev-graded parameter: resolves the terminal singularity
        th = (2 * np.arange(m_per_arm) + 1) * np.pi / (2 * m_per_arm)
        u = (1 + np.cos(th)) / 2  # 1 at terminal end, 0 at steiner end
        t = 1 - u
        zs = (1 - t) ** 2 * a + 2 * (1 - t) * t * ctrl + t ** 2 * steiner
        pts.extend(zs.tolist())
        # local spacing along the curve
        tt = np.concatenate(([0.0], (t[:-1] + t[1:]) / 2, [1.0]))
        zb = (1 - tt) ** 2 * a + 2 * (1 - tt) * tt * ctrl + tt ** 2 * steiner
        widths.extend(np.abs(np.diff(zb)).tolist())
    return np.array(pts), np.array(widths)


def tree_capacity(terminals, steiner, bends, m_per_arm=240) -> float:
    """Logarithmic capacity of the bent star tree via collocation."""
    pts, h = _tree_nodes(terminals, steiner, bends, m_per_arm)
    n = len(pts)
    d = np.abs(pts[:, None] - pts[None, :])
    np.fill_diagonal(d, 1.0)
    K = -np.log(d)
    np.fill_diagonal(K, -np.log(h / 4.0))
    A = np.zeros((n + 1, n + 1))
    A[:n, :n] = K
    A[:n, n] = -1.0
    A[n, :n] = 1.0
    rhs = np.zeros(n + 1)
    rhs[n] = 1.0
    sol = np.linalg.solve(A, rhs)
    return math.exp(-sol[n])


def min_capacity_over_trees(terminals) -> float:
    """Capacity minimization over perturbed Steiner trees (3 terminals).

    Nelder-Mead over the steiner point and one bend parameter per arm;
    Richardson extrapolation in the per-arm node count tightens the
    collocation bias.
    """
    from scipy.optimize import minimize

    terminals = [complex(t) for t in terminals]
    z0 = sum(terminals) / 3

    def objective(params):
        st = complex(params[0], params[1])
        bends = params[2:5]
        try:
            return tree_capacity(terminals, st, bends, m_per_arm=160)
        except (ValueError, ZeroDivisionError, np.linalg.LinAlgError):
            return 1e3

    res = minimize(
        objective,
        [z0.real, z0.imag, 0.0, 0.0, 0.0],
        method="Nelder-Mead",
        options={"xatol": 1e-7, "fatol": 1e-12, "maxiter": 2000},
    )
    st = complex(res.x[0], res.x[1])
    bends = res.x[2:5]
    c1 = tree_capacity(terminals, st, bends, m_per_arm=160)
    c2 = tree_capacity(terminals, st, bends, m_per_arm=320)
    return 2 * c2 - c1

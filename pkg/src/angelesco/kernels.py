"""Null-space extraction for the Hermite-Pade linear systems.

Exact mode runs fraction-free (Bareiss) elimination over the integers
after clearing row denominators, so results are bit-identical across
runs.  Big-float mode runs Householder QR with column pivoting at the
requested mantissa width.  Both return a full kernel basis together
with the numerical rank.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

import mpmath

from .scalars import Scalar


def exact_kernel(rows):
    """Kernel basis of a matrix over the rationals.

    Returns (basis, rank) where basis is a list of integer vectors with
    content 1 and first nonzero entry positive.  Deterministic.
    """
    if not rows:
        raise ValueError("empty system")
    ncols = len(rows[0])
    mat = []
    for row in rows:
        fr = [Fraction(x) for x in row]
        den = 1
        for x in fr:
            den = den * x.denominator // gcd(den, x.denominator)
        mat.append([int(x * den) for x in fr])

    nrows = len(mat)
    col_perm = list(range(ncols))
    prev = 1
    rank = 0
    for k in range(min(nrows, ncols)):
        # first nonzero pivot scanning rows then columns keeps runs identical
        pr = pc = -1
        for j in range(k, ncols):
            for i in range(k, nrows):
                if mat[i][j] != 0:
                    pr, pc = i, j
                    break
            if pr >= 0:
                break
        if pr < 0:
            break
        mat[k], mat[pr] = mat[pr], mat[k]
        if pc != k:
            for row in mat:
                row[k], row[pc] = row[pc], row[k]
            col_perm[k], col_perm[pc] = col_perm[pc], col_perm[k]
        piv = mat[k][k]
        for i in range(k + 1, nrows):
            rik = mat[i][k]
            for j in range(k + 1, ncols):
                mat[i][j] = (mat[i][j] * piv - rik * mat[k][j]) // prev
            mat[i][k] = 0
        prev = piv
        rank += 1

    basis = []
    free_cols = list(range(rank, ncols))
    for f in free_cols:
        x = [Fraction(0)] * ncols
        x[f] = Fraction(1)
        for k in range(rank - 1, -1, -1):
            acc = Fraction(0)
            for j in range(k + 1, ncols):
                if x[j]:
                    acc += Fraction(mat[k][j]) * x[j]
            x[k] = -acc / mat[k][k]
        vec = [Fraction(0)] * ncols
        for pos, val in zip(col_perm, x):
            vec[pos] = val
        basis.append(_canonical_int_vector(vec))
    return basis, rank


def _canonical_int_vector(vec):
    den = 1
    for x in vec:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in vec]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    if g > 1:
        ints = [v // g for v in ints]
    for v in ints:
        if v != 0:
            if v < 0:
                ints = [-x for x in ints]
            break
    return [Fraction(v) for v in ints]


def bigfloat_kernel(rows, scalar: Scalar):
    """Kernel basis via column-pivoted Householder QR in mpmath."""
    with scalar.workprec():
        m = len(rows)
        n = len(rows[0])
        R = [[mpmath.mpc(x) for x in row] for row in rows]
        perm = list(range(n))
        eps = mpmath.mpf(2) ** (-(scalar.precision_bits - 8))

        def colnorm(j, i0):
            return mpmath.sqrt(sum(abs(R[i][j]) ** 2 for i in range(i0, m)))

        rank = 0
        for k in range(min(m, n)):
            norms = [colnorm(j, k) for j in range(k, n)]
            jmax = max(range(len(norms)), key=lambda t: norms[t]) + k
            if jmax != k:
                for row in R:
                    row[k], row[jmax] = row[jmax], row[k]
                perm[k], perm[jmax] = perm[jmax], perm[k]
            x0 = R[k][k]
            nx = colnorm(k, k)
            if nx == 0:
                continue
            phase = x0 / abs(x0) if abs(x0) > 0 else mpmath.mpc(1)
            alpha = -phase * nx
            v = [R[i][k] for i in range(k, m)]
            v[0] -= alpha
            vnorm2 = sum(abs(t) ** 2 for t in v)
            if vnorm2 > 0:
                for j in range(k, n):
                    dot = sum(mpmath.conj(v[i - k]) * R[i][j] for i in range(k, m))
                    c = 2 * dot / vnorm2
                    for i in range(k, m):
                        R[i][j] -= c * v[i - k]
            R[k][k] = alpha
            for i in range(k + 1, m):
                R[i][k] = mpmath.mpc(0)

        r00 = abs(R[0][0]) if m and n else mpmath.mpf(0)
        tol = eps * max(r00, mpmath.mpf(1) if r00 == 0 else r00)
        for k in range(min(m, n)):
            if abs(R[k][k]) > tol:
                rank += 1
            else:
                break

        basis = []
        for f in range(rank, n):
            x = [mpmath.mpc(0)] * n
            x[f] = mpmath.mpc(1)
            for k in range(rank - 1, -1, -1):
                acc = mpmath.mpc(0)
                for j in range(k + 1, n):
                    acc += R[k][j] * x[j]
                x[k] = -acc / R[k][k]
            vec = [mpmath.mpc(0)] * n
            for pos, val in zip(perm, x):
                vec[pos] = val
            scale = max(abs(t) for t in vec)
            basis.append([t / scale for t in vec])
        return basis, rank


def kernel_basis(rows, scalar: Scalar):
    if scalar.exact:
        return exact_kernel(rows)
    return bigfloat_kernel(rows, scalar)


def reduce_kernel_lexicographic(basis, priority, scalar: Scalar):
    """Pick the kernel vector whose prioritized coordinates vanish longest.

    ``priority`` lists coordinate indices, most important first.  The
    greedy restriction at coordinate c keeps the subspace {u : u_c = 0}
    whenever it is nonzero; this realizes the lexicographic degree
    minimization used as the tie-break for defective kernels.
    """
    vecs = [list(v) for v in basis]
    for c in priority:
        if len(vecs) <= 1:
            break
        live = [v for v in vecs if v[c] != 0] if scalar.exact else [
            v for v in vecs if abs(v[c]) > _float_tol(scalar)
        ]
        if not live or len(live) == len(vecs) == 1:
            continue
        pivot = live[0]
        rest = []
        for v in vecs:
            if v is pivot:
                continue
            if (v[c] != 0) if scalar.exact else (abs(v[c]) > _float_tol(scalar)):
                factor = v[c] / pivot[c]
                v = [a - factor * b for a, b in zip(v, pivot)]
            rest.append(v)
        if any(_nonzero_vec(v, scalar) for v in rest):
            vecs = [v for v in rest if _nonzero_vec(v, scalar)]
        # else: coordinate c cannot be removed; keep the basis as is
    return vecs[0]


def _float_tol(scalar: Scalar):
    return mpmath.mpf(2) ** (-(scalar.precision_bits // 2))


def _nonzero_vec(v, scalar: Scalar):
    if scalar.exact:
        return any(x != 0 for x in v)
    return any(abs(x) > _float_tol(scalar) for x in v)

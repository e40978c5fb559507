"""Exact integer and rational linear algebra.

Everything here works on Python integers and :class:`~fractions.Fraction`
values; matrices are plain lists of rows.  Provides Smith and Hermite normal
forms, integer kernels, lattice indices and a small dictionary simplex used
for weight-cone and lower-hull queries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Sequence

__all__ = [
    "SNFResult",
    "LPResult",
    "LPWitness",
    "smith_normal_form",
    "hermite_normal_form",
    "integer_kernel",
    "lll_reduce",
    "lattice_index",
    "rank",
    "determinant",
    "solve_rational",
    "inverse_rational",
    "maximize",
    "strict_lp_feasible",
    "matmul",
    "identity",
    "transpose",
]

IntMatrix = list[list[int]]


def identity(n: int) -> IntMatrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def transpose(A):
    return [list(col) for col in zip(*A)] if A else []


def matmul(A, B):
    Bt = transpose(B)
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def _as_int_matrix(A) -> IntMatrix:
    M = [[int(v) for v in row] for row in A]
    if M and any(len(row) != len(M[0]) for row in M):
        raise ValueError("ragged matrix")
    for row in A:
        for v in row:
            if v != int(v):
                raise ValueError(f"non-integer entry {v!r}")
    return M


@dataclass
class SNFResult:
    """``U @ A @ V == D`` with ``U``, ``V`` unimodular."""

    U: IntMatrix
    D: IntMatrix
    V: IntMatrix
    rank: int

    @property
    def diagonal(self) -> list[int]:
        return [self.D[i][i] for i in range(min(len(self.D), len(self.D[0]) if self.D else 0))]


def smith_normal_form(A: Sequence[Sequence[int]]) -> SNFResult:
    """Smith normal form with transforms.

    Pivot rule: the nonzero entry of smallest absolute value in the active
    submatrix, ties broken by row-major position.
    """
    D = _as_int_matrix(A)
    r = len(D)
    c = len(D[0]) if r else 0
    U = identity(r)
    V = identity(c)

    def swap_rows(i, j):
        if i != j:
            D[i], D[j] = D[j], D[i]
            U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        if i != j:
            for row in D:
                row[i], row[j] = row[j], row[i]
            for row in V:
                row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):  # row_dst += q * row_src
        D[dst] = [a + q * b for a, b in zip(D[dst], D[src])]
        U[dst] = [a + q * b for a, b in zip(U[dst], U[src])]

    def add_col(dst, src, q):  # col_dst += q * col_src
        for row in D:
            row[dst] += q * row[src]
        for row in V:
            row[dst] += q * row[src]

    k = 0
    rnk = 0
    while k < min(r, c):
        best = None
        for i in range(k, r):
            for j in range(k, c):
                v = D[i][j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
        if best is None:
            break
        swap_rows(k, best[1])
        swap_cols(k, best[2])
        while True:
            changed = False
            for i in range(k + 1, r):
                if D[i][k]:
                    add_row(i, k, -(D[i][k] // D[k][k]))
            for j in range(k + 1, c):
                if D[k][j]:
                    add_col(j, k, -(D[k][j] // D[k][k]))
            # bring the smallest remaining entry of row/col k to the pivot
            cand = [(abs(D[i][k]), i, k) for i in range(k + 1, r) if D[i][k]]
            cand += [(abs(D[k][j]), k, j) for j in range(k + 1, c) if D[k][j]]
            if cand:
                _, i, j = min(cand)
                if j == k:
                    swap_rows(k, i)
                else:
                    swap_cols(k, j)
                changed = True
            else:
                p = D[k][k]
                bad = None
                for i in range(k + 1, r):
                    for j in range(k + 1, c):
                        if D[i][j] % p:
                            bad = i
                            break
                    if bad is not None:
                        break
                if bad is not None:
                    add_row(k, bad, 1)
                    changed = True
            if not changed:
                break
        if D[k][k] < 0:
            D[k] = [-a for a in D[k]]
            U[k] = [-a for a in U[k]]
        rnk += 1
        k += 1
    return SNFResult(U=U, D=D, V=V, rank=rnk)


def hermite_normal_form(M: Sequence[Sequence[int]]) -> IntMatrix:
    """Row-style Hermite normal form; zero rows are dropped."""
    H = _as_int_matrix(M)
    rows = len(H)
    cols = len(H[0]) if rows else 0
    piv_row = 0
    for col in range(cols):
        if piv_row >= rows:
            break
        while True:
            nz = [i for i in range(piv_row, rows) if H[i][col]]
            if not nz:
                break
            i_min = min(nz, key=lambda i: (abs(H[i][col]), i))
            H[piv_row], H[i_min] = H[i_min], H[piv_row]
            done = True
            for i in range(piv_row + 1, rows):
                if H[i][col]:
                    q = H[i][col] // H[piv_row][col]
                    H[i] = [a - q * b for a, b in zip(H[i], H[piv_row])]
                    if H[i][col]:
                        done = False
            if done:
                break
        if not any(H[i][col] for i in range(piv_row, rows)):
            continue
        if H[piv_row][col] < 0:
            H[piv_row] = [-a for a in H[piv_row]]
        p = H[piv_row][col]
        for i in range(piv_row):
            q = H[i][col] // p
            if q:
                H[i] = [a - q * b for a, b in zip(H[i], H[piv_row])]
        piv_row += 1
    return [row for row in H if any(row)]


def integer_kernel(A: Sequence[Sequence[int]]) -> IntMatrix:
    """Basis (as rows) of the integer lattice ``{u : A u = 0}``, in Hermite form."""
    A = _as_int_matrix(A)
    r = len(A)
    c = len(A[0]) if r else 0
    if c == 0:
        return []
    # rows of [A^T | I]; eliminate the left block
    aug = [[A[i][j] for i in range(r)] + [int(j == k) for k in range(c)] for j in range(c)]
    piv_row = 0
    for col in range(r):
        while True:
            nz = [i for i in range(piv_row, c) if aug[i][col]]
            if not nz:
                break
            i_min = min(nz, key=lambda i: (abs(aug[i][col]), i))
            aug[piv_row], aug[i_min] = aug[i_min], aug[piv_row]
            done = True
            for i in range(piv_row + 1, c):
                if aug[i][col]:
                    q = aug[i][col] // aug[piv_row][col]
                    aug[i] = [a - q * b for a, b in zip(aug[i], aug[piv_row])]
                    if aug[i][col]:
                        done = False
            if done:
                piv_row += 1
                break
    kernel = [row[r:] for row in aug if not any(row[:r])]
    return hermite_normal_form(kernel) if kernel else []


def lll_reduce(basis: Sequence[Sequence[int]], delta: Fraction = Fraction(3, 4)) -> IntMatrix:
    """LLL-reduced basis of the lattice spanned by the (independent) rows."""
    b = [list(map(int, r)) for r in basis]
    n = len(b)
    if n == 0:
        return []

    def dot(u, v):
        return sum(x * y for x, y in zip(u, v))

    def gram_schmidt():
        star: list[list[Fraction]] = []
        mu = [[Fraction(0)] * n for _ in range(n)]
        norms = []
        for i in range(n):
            v = [Fraction(x) for x in b[i]]
            for j in range(i):
                mu[i][j] = dot(b[i], star[j]) / norms[j]
                v = [x - mu[i][j] * y for x, y in zip(v, star[j])]
            star.append(v)
            norms.append(dot(v, v))
        return mu, norms

    mu, norms = gram_schmidt()
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                b[k] = [x - q * y for x, y in zip(b[k], b[j])]
                mu, norms = gram_schmidt()
        if norms[k] >= (delta - mu[k][k - 1] ** 2) * norms[k - 1]:
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            mu, norms = gram_schmidt()
            k = max(k - 1, 1)
    return b


def rank(A) -> int:
    if not A or not A[0]:
        return 0
    M = [[Fraction(v) for v in row] for row in A]
    rows, cols = len(M), len(M[0])
    rk = 0
    for col in range(cols):
        piv = next((i for i in range(rk, rows) if M[i][col] != 0), None)
        if piv is None:
            continue
        M[rk], M[piv] = M[piv], M[rk]
        for i in range(rk + 1, rows):
            if M[i][col] != 0:
                f = M[i][col] / M[rk][col]
                M[i] = [a - f * b for a, b in zip(M[i], M[rk])]
        rk += 1
        if rk == rows:
            break
    return rk


def determinant(A) -> Fraction:
    n = len(A)
    M = [[Fraction(v) for v in row] for row in A]
    det = Fraction(1)
    for col in range(n):
        piv = next((i for i in range(col, n) if M[i][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            M[col], M[piv] = M[piv], M[col]
            det = -det
        p = M[col][col]
        det *= p
        for i in range(col + 1, n):
            if M[i][col] != 0:
                f = M[i][col] / p
                M[i] = [a - f * b for a, b in zip(M[i], M[col])]
    return det


def inverse_rational(A) -> list[list[Fraction]]:
    n = len(A)
    M = [[Fraction(v) for v in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(A)]
    for col in range(n):
        piv = next((i for i in range(col, n) if M[i][col] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        M[col], M[piv] = M[piv], M[col]
        p = M[col][col]
        M[col] = [a / p for a in M[col]]
        for i in range(n):
            if i != col and M[i][col] != 0:
                f = M[i][col]
                M[i] = [a - f * b for a, b in zip(M[i], M[col])]
    return [row[n:] for row in M]


def solve_rational(A, b) -> list[Fraction]:
    inv = inverse_rational(A)
    return [sum(a * Fraction(v) for a, v in zip(row, b)) for row in inv]


def lattice_index(A: Sequence[Sequence[int]]) -> int | float:
    """Index of the lattice spanned by the columns of ``A`` in ``Z^rows``.

    Returns ``math.inf`` when the columns do not span a full-rank lattice.
    """
    A = _as_int_matrix(A)
    n = len(A)
    if n == 0:
        return 1
    if not A[0]:
        return math.inf
    snf = smith_normal_form(A)
    if snf.rank < n:
        return math.inf
    return reduce(lambda a, b: a * b, snf.diagonal[:n], 1)


# -- linear programming -------------------------------------------------------


@dataclass
class LPResult:
    status: str  # "optimal" or "unbounded"
    x: list[Fraction]
    value: Fraction | None
    tight: list[int]  # constraints whose slack is nonbasic at the optimum


def maximize(c, A, b, free: Sequence[bool] | None = None) -> LPResult:
    """Maximize ``c.x`` subject to ``A x <= b`` with ``b >= 0``.

    Variables flagged in ``free`` are unrestricted in sign (split into a
    difference of two non-negative parts), the others are non-negative.
    Dictionary simplex with Bland's rule, exact arithmetic.
    """
    m = len(A)
    n = len(c)
    if free is None:
        free = [False] * n
    if any(Fraction(v) < 0 for v in b):
        raise ValueError("right-hand side must be non-negative")
    # columns: the n original variables, then negative parts of free ones
    neg_of = [j for j in range(n) if free[j]]
    cols = n + len(neg_of)
    c_ext = [Fraction(v) for v in c] + [-Fraction(c[j]) for j in neg_of]
    A_ext = [[Fraction(v) for v in row] + [-Fraction(row[j]) for j in neg_of] for row in A]
    # variable ids: 0..cols-1 structural, cols..cols+m-1 slacks
    nonbasic = list(range(cols))
    basic = [cols + i for i in range(m)]
    # row i: basic[i] = T[i][0] + sum_j T[i][j+1] * nonbasic[j]
    T = [[Fraction(b[i])] + [-v for v in A_ext[i]] for i in range(m)]
    obj = [Fraction(0)] + c_ext

    while True:
        enter = None
        for j in sorted(range(cols), key=lambda j: nonbasic[j]):
            if obj[j + 1] > 0:
                enter = j
                break
        if enter is None:
            break
        leave = None
        best = None
        for i in range(m):
            a = T[i][enter + 1]
            if a < 0:
                key = (T[i][0] / -a, basic[i])
                if best is None or key < best:
                    best = key
                    leave = i
        if leave is None:
            return LPResult("unbounded", [], None, [])
        _pivot(T, obj, leave, enter)
        basic[leave], nonbasic[enter] = nonbasic[enter], basic[leave]
    val = [Fraction(0)] * (cols + m)
    for i, var in enumerate(basic):
        val[var] = T[i][0]
    x = val[:n]
    for k, j in enumerate(neg_of):
        x[j] -= val[n + k]
    tight = [i for i in range(m) if val[cols + i] == 0]
    return LPResult("optimal", x, obj[0], tight)


def _pivot(T, obj, leave, enter):
    row = T[leave]
    a = row[enter + 1]
    # express the entering variable from row `leave`
    new = [-v / a for v in row]
    new[enter + 1] = 1 / a
    T[leave] = new
    for i, r in enumerate(T):
        if i == leave:
            continue
        f = r[enter + 1]
        if f:
            T[i] = [v + f * w for v, w in zip(r, new)]
            T[i][enter + 1] = f * new[enter + 1]
    f = obj[enter + 1]
    if f:
        obj[:] = [v + f * w for v, w in zip(obj, new)]
        obj[enter + 1] = f * new[enter + 1]


@dataclass
class LPWitness:
    feasible: bool
    certificate: list[int] | None


def strict_lp_feasible(strict: Sequence[Sequence], nonstrict: Sequence[Sequence] = ()) -> LPWitness:
    """Decide whether some ``w`` has ``r.w > 0`` for strict rows and ``q.w >= 0`` for the rest.

    The certificate is the LP optimum scaled to a primitive integer vector.
    """
    rows = [list(r) for r in strict] + [list(q) for q in nonstrict]
    if not rows:
        raise ValueError("no constraints")
    n = len(rows[0])
    if any(len(r) != n for r in rows):
        raise ValueError("rows must have equal length")
    if not strict:
        return LPWitness(True, [0] * n)
    A, b = [], []
    for r in strict:
        A.append([-Fraction(v) for v in r] + [Fraction(1)])
        b.append(0)
    for q in nonstrict:
        A.append([-Fraction(v) for v in q] + [Fraction(0)])
        b.append(0)
    A.append([Fraction(0)] * n + [Fraction(1)])
    b.append(1)
    res = maximize([0] * n + [1], A, b, free=[True] * n + [False])
    if res.status != "optimal" or res.value <= 0:
        return LPWitness(False, None)
    w = res.x[:n]
    den = reduce(math.lcm, (v.denominator for v in w), 1)
    ints = [int(v * den) for v in w]
    g = reduce(math.gcd, (abs(v) for v in ints), 0) or 1
    ints = [v // g for v in ints]
    for r in strict:
        assert sum(Fraction(a) * v for a, v in zip(r, ints)) > 0
    for q in nonstrict:
        assert sum(Fraction(a) * v for a, v in zip(q, ints)) >= 0
    return LPWitness(True, ints)

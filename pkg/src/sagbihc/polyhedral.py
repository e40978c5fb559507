"""Mixed cells, mixed volumes and polyhedral start systems.

Fine mixed cells are read off a regular triangulation of the lifted Cayley
configuration: support ``r`` is embedded as ``(delta_r, a)`` and every lower
facet with ``k_r + 1`` points from support ``r`` is a mixed cell of type
``(k_1, ..., k_m)``.  The lower hull is walked facet by facet with exact
rational pivots, so any tie is caught and reported as a degenerate lifting.

Sign convention: a cell's ``gamma`` makes its points minimize
``lift + gamma . a`` over their support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Sequence

import numpy as np

from .intlin import determinant, inverse_rational, maximize, rank, smith_normal_form
from .tracker import PathResult, SolutionSet, TermHomotopy, TrackerConfig, track_all

__all__ = [
    "Support",
    "MixedCell",
    "DegenerateLifting",
    "random_lifting",
    "mixed_cells",
    "mixed_volume",
    "solve_binomial",
    "start_solutions",
    "polyhedral_homotopies",
    "solve_sparse",
]


class DegenerateLifting(RuntimeError):
    """The lifting is not generic: some lower-hull face is not a simplex."""


@dataclass(frozen=True)
class Support:
    points: tuple[tuple[int, ...], ...]
    multiplicity: int

    def __init__(self, points, multiplicity: int):
        pts = tuple(tuple(int(v) for v in p) for p in points)
        if len(set(pts)) != len(pts):
            raise ValueError("support points must be distinct")
        if not pts:
            raise ValueError("empty support")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "multiplicity", int(multiplicity))

    @property
    def dim(self) -> int:
        return len(self.points[0])


@dataclass
class MixedCell:
    indices: tuple[tuple[int, ...], ...]  # selected point indices per support
    gamma: tuple[Fraction, ...]
    volume: int
    heights: tuple[Fraction, ...]  # min of lift + gamma.a per support


def random_lifting(supports: Sequence[Support], seed: int, high: int = 1000) -> list[list[int]]:
    rng = np.random.default_rng(seed)
    return [[int(v) for v in rng.integers(0, high, size=len(s.points))] for s in supports]


def _cayley(supports):
    m = len(supports)
    pts, owner, local = [], [], []
    for r, s in enumerate(supports):
        delta = [int(r == q) for q in range(1, m)]
        for j, a in enumerate(s.points):
            pts.append(tuple(delta) + tuple(a))
            owner.append(r)
            local.append(j)
    return pts, owner, local


def _affine_rank(pts) -> int:
    base = pts[0]
    return rank([[a - b for a, b in zip(p, base)] for p in pts[1:]]) if len(pts) > 1 else 0


def mixed_cells(supports: Sequence[Support], lifting: Sequence[Sequence[int]]) -> list[MixedCell]:
    """Fine mixed cells of type ``(multiplicities)`` induced by ``lifting``."""
    n = supports[0].dim
    if sum(s.multiplicity for s in supports) != n:
        raise ValueError("multiplicities must sum to the dimension")
    if any(s.multiplicity < 1 for s in supports):
        raise ValueError("every support needs a positive multiplicity")
    if any(len(l) != len(s.points) for l, s in zip(lifting, supports)):
        raise ValueError("lifting does not match supports")
    m = len(supports)
    D = m - 1 + n
    pts, owner, local = _cayley(supports)
    lift = [Fraction(lifting[r][j]) for r, j in zip(owner, local)]
    N = len(pts)
    if N < D + 1 or _affine_rank(pts) < D:
        return []
    shift = min(lift)
    lift = [v - shift for v in lift]

    facets = _lower_facets(pts, lift, D)
    need = [s.multiplicity + 1 for s in supports]
    cells = []
    for F, (w, h) in facets:
        counts = [0] * m
        for i in F:
            counts[owner[i]] += 1
        if counts != need:
            continue
        gamma = tuple(w[m - 1:])
        per = [[] for _ in range(m)]
        for i in sorted(F):
            per[owner[i]].append(local[i])
        edges = []
        for r, idx in enumerate(per):
            a0 = supports[r].points[idx[0]]
            for j in idx[1:]:
                edges.append([x - y for x, y in zip(supports[r].points[j], a0)])
        vol = abs(determinant(edges))
        heights = []
        for r, s in enumerate(supports):
            vals = [Fraction(lifting[r][j]) + sum(g * a for g, a in zip(gamma, p)) for j, p in enumerate(s.points)]
            lo = min(vals)
            chosen = [j for j, v in enumerate(vals) if v == lo]
            if sorted(chosen) != per[r]:
                raise DegenerateLifting("cell inequalities violated")
            heights.append(lo)
        cells.append(MixedCell(tuple(tuple(p) for p in per), gamma, int(vol), tuple(heights)))
    cells.sort(key=lambda c: c.indices)
    return cells


def _lower_facets(pts, lift, D):
    """All lower facets ``(frozenset, (w, h))`` with ``h - w.p <= lift`` tight on the facet."""
    N = len(pts)
    centroid = [sum(Fraction(p[k]) for p in pts) / N for k in range(D)]
    # variables (w_1..w_D, h) free; maximize h - w.c subject to h - w.p_i <= lift_i
    A = [[-Fraction(v) for v in p] + [Fraction(1)] for p in pts]
    c = [-v for v in centroid] + [Fraction(1)]
    res = maximize(c, A, lift, free=[True] * (D + 1))
    if res.status != "optimal":
        raise DegenerateLifting("lower hull LP unbounded")
    tight = res.tight
    if len(tight) != D + 1:
        raise DegenerateLifting("initial lower facet is not a simplex")
    w0 = tuple(res.x[:D])
    h0 = res.x[D]

    start = frozenset(tight)
    seen = {start: (w0, h0)}
    queue = [start]
    while queue:
        F = queue.pop()
        w, h = seen[F]
        Fl = sorted(F)
        M = [[Fraction(1)] + [Fraction(v) for v in pts[i]] for i in Fl]
        try:
            inv = inverse_rational(M)
        except ZeroDivisionError:
            raise DegenerateLifting("facet points affinely dependent") from None
        slack = [lift[i] - (h - sum(a * b for a, b in zip(w, pts[i]))) for i in range(N)]
        for col, v in enumerate(Fl):
            # affine g with g = 0 on the ridge F - {v} and g(p_v) = -1
            g0 = -inv[0][col]
            g = [-inv[k + 1][col] for k in range(D)]
            best = None
            tie = False
            for i in range(N):
                if i in F:
                    continue
                gi = g0 + sum(a * b for a, b in zip(g, pts[i]))
                if gi > 0:
                    ratio = slack[i] / gi
                    if best is None or ratio < best[0]:
                        best, tie = (ratio, i), False
                    elif ratio == best[0]:
                        tie = True
            if best is None:
                continue  # ridge on the boundary
            if tie or best[0] == 0:
                raise DegenerateLifting("tie while crossing a ridge")
            sval, u = best
            G = (F - {v}) | {u}
            if G in seen:
                continue
            seen[G] = (tuple(a - sval * b for a, b in zip(w, g)), h + sval * g0)
            queue.append(G)
    return sorted(seen.items(), key=lambda kv: sorted(kv[0]))


def mixed_volume(supports: Sequence[Support], seed: int = 0, attempts: int = 10) -> int:
    supports = list(supports)
    for k in range(attempts):
        lift = random_lifting(supports, seed + k)
        try:
            return sum(c.volume for c in mixed_cells(supports, lift))
        except DegenerateLifting:
            continue
    raise DegenerateLifting(f"no generic lifting found in {attempts} attempts")


# -- binomial systems --------------------------------------------------------


def solve_binomial(A: Sequence[Sequence[int]], c: Sequence[complex]) -> list[np.ndarray]:
    """All torus solutions of ``x^A_i = c_i`` (rows of ``A`` are exponents)."""
    A = [[int(v) for v in row] for row in A]
    n = len(A)
    if any(len(row) != n for row in A):
        raise ValueError("exponent matrix must be square")
    c = np.asarray(c, dtype=complex)
    if np.any(c == 0):
        raise ValueError("binomial constants must be nonzero")
    snf = smith_normal_form(A)
    if snf.rank < n:
        raise ValueError("singular exponent matrix")
    d = snf.diagonal
    U = np.array(snf.U, dtype=float)
    V = np.array(snf.V, dtype=float)
    L = U @ np.log(c)
    base = L / np.array(d, dtype=float)
    sols = []
    ranges = [range(di) for di in d]
    for ks in _product(ranges):
        Y = base + 2j * np.pi * np.array(ks, dtype=float) / np.array(d, dtype=float)
        sols.append(np.exp(V @ Y))
    sols.sort(key=lambda x: tuple(v for z in x for v in (z.real, z.imag)))
    return sols


def _product(ranges):
    if not ranges:
        yield ()
        return
    for k in ranges[0]:
        for rest in _product(ranges[1:]):
            yield (k,) + rest


def _cell_system(supports, coeffs, cell):
    rows, consts = [], []
    for r, idx in enumerate(cell.indices):
        pts = supports[r].points
        M = np.asarray(coeffs[r], dtype=complex)[:, list(idx)]
        z = np.linalg.solve(M[:, 1:], -M[:, 0])
        a0 = pts[idx[0]]
        for j, zj in zip(idx[1:], z):
            rows.append([x - y for x, y in zip(pts[j], a0)])
            consts.append(zj)
    return rows, consts


def start_solutions(supports, coeffs, lifting):
    """Pairs ``(cell, solutions)`` of the cell-restricted start systems.

    ``coeffs[r]`` is a ``multiplicity x len(points)`` complex matrix giving
    the equations supported on support ``r``.
    """
    for r, s in enumerate(supports):
        if np.asarray(coeffs[r]).shape != (s.multiplicity, len(s.points)):
            raise ValueError(f"coefficient block {r} has the wrong shape")
    out = []
    for cell in mixed_cells(supports, lifting):
        rows, consts = _cell_system(supports, coeffs, cell)
        out.append((cell, solve_binomial(rows, consts)))
    return out


def polyhedral_homotopies(supports, coeffs, lifting, tail: float = 1e-12):
    """One exponential-mode homotopy per mixed cell, plus its start points."""
    n = supports[0].dim
    result = []
    for cell, sols in start_solutions(supports, coeffs, lifting):
        owner, exps, coef, texp = [], [], [], []
        eq = 0
        for r, s in enumerate(supports):
            C = np.asarray(coeffs[r], dtype=complex)
            e = [float(Fraction(lifting[r][j]) + sum(g * a for g, a in zip(cell.gamma, p)) - cell.heights[r])
                 for j, p in enumerate(s.points)]
            for i in range(s.multiplicity):
                for j, p in enumerate(s.points):
                    if C[i, j] != 0:
                        owner.append(eq)
                        exps.append(p)
                        coef.append(C[i, j])
                        texp.append(e[j])
                eq += 1
        pos = [v for v in texp if v > 0]
        e_min = min(pos) if pos else 1.0
        s0 = math.log(tail) / e_min
        h = TermHomotopy(n, owner, exps, coef, mode="exp", texp=texp, s_start=s0, s_end=0.0)
        result.append((cell, h, sols))
    return result


def group_by_support(rows):
    """Group ``(exponent -> coefficient)`` equations by identical support.

    Returns ``(supports, coeffs, order)`` where ``order`` maps positions in
    the grouped system back to the input equation indices.
    """
    groups: dict = {}
    for i, row in enumerate(rows):
        key = tuple(sorted(e for e, c in row.items() if c != 0))
        groups.setdefault(key, []).append(i)
    supports, coeffs, order = [], [], []
    for key, idx in groups.items():
        supports.append(Support(key, len(idx)))
        C = np.array([[rows[i].get(e, 0) for e in key] for i in idx], dtype=complex)
        coeffs.append(C)
        order.extend(idx)
    return supports, coeffs, order


@dataclass
class SparseSolve:
    solutions: SolutionSet
    mixed_volume: int
    lifting_seed: int
    homotopies: list


def _collect(paths, cfg):
    from .tracker import _canonical_key, dedup_points

    good = [p for p in paths if p.ok]
    keep = dedup_points([p.endpoint for p in good], cfg.dedup_tol, [p.residual for p in good])
    keep_set = set(keep)
    for k, p in enumerate(good):
        if k not in keep_set:
            p.duplicate = True
    pts = sorted((good[k] for k in keep), key=lambda p: _canonical_key(p.endpoint))
    return SolutionSet(
        [p.endpoint for p in pts],
        [p.residual for p in pts],
        [bool(np.max(np.abs(p.endpoint.imag)) < 1e-8) for p in pts],
        paths,
    )


def solve_sparse(
    rows, n: int, seed: int = 0, cfg: TrackerConfig = TrackerConfig(), attempts: int = 10, generic: bool = False
) -> SparseSolve:
    """Torus solutions of a square system given as ``{exponent: coefficient}`` rows.

    Unless ``generic`` is set, a system with random coefficients on the same
    supports is solved first and its solutions are carried to the given
    coefficients along ``(1 - s) g R + s C`` with a random unimodular ``g``.
    """
    if len(rows) != n:
        raise ValueError("system is not square")
    supports, coeffs, order = group_by_support(rows)
    if any(len(s.points) < 2 for s in supports):
        return SparseSolve(SolutionSet([], [], [], []), 0, seed, [])
    rng = np.random.default_rng([seed, 3])
    target = coeffs
    if not generic:
        coeffs = [(rng.standard_normal(C.shape) + 1j * rng.standard_normal(C.shape)) / math.sqrt(2) for C in target]
    for k in range(attempts):
        lseed = seed * 7919 + k
        lift = random_lifting(supports, lseed)
        try:
            homs = polyhedral_homotopies(supports, coeffs, lift)
        except DegenerateLifting:
            continue
        break
    else:
        raise DegenerateLifting(f"no generic lifting found in {attempts} attempts")
    mv = sum(c.volume for c, _, _ in homs)
    paths: list[PathResult] = []
    for cell, h, sols in homs:
        paths.extend(track_all(h, sols, cfg).paths)
    sset = _collect(paths, cfg)
    if not generic:
        g = np.exp(2j * np.pi * rng.random())
        owner, exps, c0, c1 = [], [], [], []
        eq = 0
        for s, R, C in zip(supports, coeffs, target):
            for i in range(s.multiplicity):
                for j, p in enumerate(s.points):
                    owner.append(eq)
                    exps.append(p)
                    c0.append(g * R[i, j])
                    c1.append(C[i, j] - g * R[i, j])
                eq += 1
        h = TermHomotopy(n, owner, exps, c0, mode="linear", coef1=c1)
        sset = track_all(h, sset.points, cfg)
    return SparseSolve(sset, mv, lseed, homs)

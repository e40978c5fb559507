"""Weighted initial terms, t-homogenization and the SAGBI criterion.

Convention: the leading term of ``p`` under an integer weight ``w`` is the
unique term maximizing ``w . alpha``.  Each generator block carries an
implicit auxiliary variable of weight -1; instead of materializing those
variables we carry block indices and per-block degree counts.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .intlin import integer_kernel, lll_reduce, strict_lp_feasible
from .poly import Polynomial, Ring

__all__ = [
    "TieError",
    "SagbiFamily",
    "BinomialRelation",
    "SagbiCertificate",
    "NotFound",
    "weight_of",
    "initial_term",
    "leading_exponents",
    "homogenize",
    "toric_relations",
    "subduct",
    "sagbi_check",
    "detect_weight",
]

Weight = tuple[int, ...]


class TieError(ValueError):
    """Raised when the maximal weight is attained by several terms."""

    def __init__(self, exponents):
        self.exponents = list(exponents)
        super().__init__(f"weight ties between exponents {self.exponents}")


def weight_of(w: Sequence[int], e: Sequence[int]) -> int:
    return sum(a * b for a, b in zip(w, e))


@dataclass(frozen=True)
class SagbiFamily:
    """Generator blocks ``B_1, ..., B_m`` over a common ring of unknowns."""

    ring: Ring
    blocks: tuple[tuple[Polynomial, ...], ...]

    def __init__(self, ring: Ring, blocks):
        blocks = tuple(tuple(b) for b in blocks)
        if not blocks or any(not b for b in blocks):
            raise ValueError("blocks must be non-empty")
        for block in blocks:
            for p in block:
                if p.ring != ring:
                    raise ValueError("generator lives in a different ring")
                if p.is_zero():
                    raise ValueError("zero generator")
        object.__setattr__(self, "ring", ring)
        object.__setattr__(self, "blocks", blocks)

    @property
    def n(self) -> int:
        return self.ring.n

    @property
    def m(self) -> int:
        return len(self.blocks)

    def generators(self) -> list[tuple[int, int, Polynomial]]:
        """Flattened ``(block, index, polynomial)`` triples."""
        return [(r, j, p) for r, block in enumerate(self.blocks) for j, p in enumerate(block)]

    def is_exact(self) -> bool:
        return all(p.is_exact() for _, _, p in self.generators())


def initial_term(p: Polynomial, w: Sequence[int]) -> tuple[object, tuple[int, ...]]:
    """Return ``(coefficient, exponent)`` of the unique w-maximal term."""
    if p.is_zero():
        raise ValueError("zero polynomial has no initial term")
    best = None
    tied = []
    for c, e in p.terms:
        v = weight_of(w, e)
        if best is None or v > best:
            best, tied = v, [(c, e)]
        elif v == best:
            tied.append((c, e))
    if len(tied) > 1:
        raise TieError(e for _, e in tied)
    return tied[0]


def leading_exponents(family: SagbiFamily, w: Sequence[int]) -> list[list[tuple[int, ...]]]:
    return [[initial_term(p, w)[1] for p in block] for block in family.blocks]


def homogenize(p: Polynomial, w: Sequence[int], t: str = "t") -> Polynomial:
    """``p`` with each term scaled by ``t^(w.lead - w.beta)``.

    The result lives in ``p.ring`` extended by the parameter ``t``; at
    ``t = 1`` it is ``p`` and at ``t = 0`` it is the initial term.
    """
    _, lead = initial_term(p, w)
    top = weight_of(w, lead)
    ring = p.ring.extend(t)
    return Polynomial(ring, {e + (top - weight_of(w, e),): c for c, e in p.terms})


# -- toric relations -------------------------------------------------------


@dataclass(frozen=True)
class BinomialRelation:
    """``prod z^u = prod z^v`` among the leading monomials (flat generator indices)."""

    u: tuple[int, ...]
    v: tuple[int, ...]

    def describe(self, labels: Sequence[str] | None = None) -> str:
        def mono(e):
            parts = []
            for i, a in enumerate(e):
                if a:
                    name = labels[i] if labels else f"z{i}"
                    parts.append(name if a == 1 else f"{name}^{a}")
            return "*".join(parts) or "1"

        return f"{mono(self.u)} - {mono(self.v)}"


def _lift_matrix(family: SagbiFamily, leads) -> list[list[int]]:
    cols = []
    for r, block in enumerate(leads):
        for a in block:
            cols.append([int(r == s) for s in range(family.m)] + list(a))
    return [list(row) for row in zip(*cols)]


def _divides(a, b) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _binomial_groebner(gens, key, max_degree=None):
    """Groebner basis of a pure binomial ideal; binomials are ``(lead, trail)``.

    Pairs are processed by degree of their lcm and skipped by the coprime and
    chain criteria.
    """

    def normalize(a, b):
        if a == b:
            return None
        return (a, b) if key(a) > key(b) else (b, a)

    nvars = len(gens[0][0]) if gens else 0
    leads = np.zeros((16, nvars), dtype=np.int64)
    basis: list = []

    def divisor(a):
        if not basis:
            return None
        hits = np.flatnonzero(np.all(leads[: len(basis)] <= np.asarray(a), axis=1))
        return int(hits[0]) if hits.size else None

    def reduce(a, b):
        while True:
            k = divisor(a)
            if k is None:
                return a, b
            g = basis[k]
            a = tuple(x - y + z for x, y, z in zip(a, g[0], g[1]))
            nb = normalize(a, b)
            if nb is None:
                return None
            a, b = nb

    pairs: list = []
    pending: set = set()

    def add(nb):
        nonlocal leads
        k = len(basis)
        if k == leads.shape[0]:
            leads = np.vstack([leads, np.zeros_like(leads)])
        leads[k] = nb[0]
        basis.append(nb)
        for i in range(k):
            lcm = tuple(max(x, y) for x, y in zip(basis[i][0], nb[0]))
            heapq.heappush(pairs, (sum(lcm), k, i))
            pending.add((i, k))

    for g in gens:
        nb = normalize(*g)
        if nb is not None:
            nb = reduce(*nb)
        if nb is not None:
            add(nb)
    truncated = False
    while pairs:
        deg, j, i = heapq.heappop(pairs)
        pending.discard((i, j))
        (a1, b1), (a2, b2) = basis[i], basis[j]
        if all(x == 0 or y == 0 for x, y in zip(a1, a2)):
            continue
        lcm = tuple(max(x, y) for x, y in zip(a1, a2))
        if max_degree is not None and deg > max_degree:
            truncated = True
            continue
        lcm_arr = np.asarray(lcm)
        chain = np.flatnonzero(np.all(leads[: len(basis)] <= lcm_arr, axis=1))
        if any(
            k != i and k != j and (min(i, k), max(i, k)) not in pending and (min(j, k), max(j, k)) not in pending
            for k in chain
        ):
            continue
        s1 = tuple(l - x + y for l, x, y in zip(lcm, a1, b1))
        s2 = tuple(l - x + y for l, x, y in zip(lcm, a2, b2))
        nb = normalize(s1, s2)
        if nb is not None:
            nb = reduce(*nb)
        if nb is not None:
            add(nb)
    # drop elements whose leading monomial is divisible by another's
    minimal = []
    for idx, (a, b) in enumerate(basis):
        if any(o != idx and _divides(basis[o][0], a) and (basis[o][0] != a or o < idx) for o in range(len(basis))):
            continue
        minimal.append((a, b))
    return minimal, truncated


def _saturate(gens, nvars, max_degree=None):
    """Saturate the binomial ideal by each variable in turn."""
    current = list(gens)
    truncated = False
    for i in range(nvars):
        order = [v for v in range(nvars) if v != i] + [i]
        rev = order[::-1]

        def key(e, rev=rev):
            return (sum(e), tuple(-e[v] for v in rev))

        basis, trunc = _binomial_groebner(current, key, max_degree)
        truncated |= trunc
        current = []
        for a, b in basis:
            k = min(a[i], b[i])
            if k:
                a = a[:i] + (a[i] - k,) + a[i + 1:]
                b = b[:i] + (b[i] - k,) + b[i + 1:]
            if a != b:
                current.append((a, b))
    return current, truncated


def toric_relations(family: SagbiFamily, w: Sequence[int], max_degree: int | None = None) -> list[BinomialRelation]:
    """Generators of the toric ideal of the leading monomials (with block degrees)."""
    leads = leading_exponents(family, w)
    A = _lift_matrix(family, leads)
    K = sum(len(b) for b in leads)
    kernel = lll_reduce(integer_kernel(A))
    gens = []
    for vec in kernel:
        u = tuple(max(x, 0) for x in vec)
        v = tuple(max(-x, 0) for x in vec)
        gens.append((u, v))
    sat, _ = _saturate(gens, K, max_degree)
    rels = sorted({tuple(sorted((a, b))) for a, b in sat}, key=lambda uv: (sum(uv[0]), uv))
    return [BinomialRelation(u, v) for u, v in rels]


# -- subduction --------------------------------------------------------------


class _Subductor:
    """Subduction against a family with cached leader factorizations."""

    def __init__(self, family: SagbiFamily, w: Sequence[int]):
        self.family = family
        self.w = tuple(w)
        self.leads = [[initial_term(p, w) for p in block] for block in family.blocks]
        self._factor_cache: dict = {}

    def factor(self, beta, degrees):
        """Indices (r, j) of leaders whose product is ``x^beta`` with the given block degrees."""
        key = (beta, degrees)
        if key in self._factor_cache:
            return self._factor_cache[key]
        result = self._search(beta, list(degrees), 0, 0)
        self._factor_cache[key] = result
        return result

    def _search(self, beta, degrees, r, j0):
        while r < len(degrees) and degrees[r] == 0:
            r, j0 = r + 1, 0
        if r == len(degrees):
            return [] if not any(beta) else None
        block = self.leads[r]
        for j in range(j0, len(block)):
            a = block[j][1]
            if _divides(a, beta):
                rest = tuple(x - y for x, y in zip(beta, a))
                degrees[r] -= 1
                sub = self._search(rest, degrees, r, j)
                degrees[r] += 1
                if sub is not None:
                    return [(r, j)] + sub
        return None

    def subduct(self, p: Polynomial, degrees: tuple[int, ...], max_iter: int = 100000) -> Polynomial:
        products: dict = {}
        for _ in range(max_iter):
            if p.is_zero():
                return p
            top = max(weight_of(self.w, e) for e in p.exponents())
            for c, e in p.terms:
                if weight_of(self.w, e) == top:
                    break
            idx = self.factor(e, degrees)
            if idx is None:
                return p
            key = tuple(idx)
            if key not in products:
                prod = self.family.ring.const(1)
                lc = Fraction(1) if self.family.is_exact() else 1
                for r, j in idx:
                    prod = prod * self.family.blocks[r][j]
                    lc = lc * self.leads[r][j][0]
                products[key] = (prod, lc)
            prod, lc = products[key]
            p = p - prod.scale(c / lc)
        raise RuntimeError("subduction did not terminate")


def subduct(p: Polynomial, family: SagbiFamily, w: Sequence[int], degrees: Sequence[int]) -> Polynomial:
    """Remainder of ``p`` (of block degrees ``degrees``) after subduction."""
    if len(degrees) != family.m:
        raise ValueError("one degree per block required")
    return _Subductor(family, w).subduct(p, tuple(degrees))


@dataclass
class SagbiCertificate:
    weight: tuple[int, ...]
    verified: bool
    leading_terms: list[list[tuple[int, ...]]]
    relations_checked: int = 0
    failing_relation: str | None = None

    def to_json(self) -> dict:
        return {
            "weight": list(self.weight),
            "verified": self.verified,
            "leading_terms": [[list(e) for e in block] for block in self.leading_terms],
            "relations_checked": self.relations_checked,
            "failing_relation": self.failing_relation,
        }


_CHECK_CACHE: dict = {}


def sagbi_check(family: SagbiFamily, w: Sequence[int]) -> SagbiCertificate:
    """Verify that the blocks (with their auxiliary variables) form a SAGBI basis under ``w``."""
    w = tuple(int(x) for x in w)
    if len(w) != family.n:
        raise ValueError(f"weight has length {len(w)}, expected {family.n}")
    leads = leading_exponents(family, w)
    cache_key = (family, w)
    if cache_key in _CHECK_CACHE:
        return _CHECK_CACHE[cache_key]
    gens = [(r, p) for r, _, p in family.generators()]
    labels = [f"b{r + 1}_{j}" for r, j, _ in family.generators()]
    sub = _Subductor(family, w)
    relations = toric_relations(family, w)
    cert = SagbiCertificate(w, True, leads, 0)
    one = family.ring.const(1)
    for rel in relations:
        lhs, rhs = one, one
        degrees = [0] * family.m
        for (r, g), a, b in zip(gens, rel.u, rel.v):
            if a:
                lhs = lhs * g**a
                degrees[r] += a
            if b:
                rhs = rhs * g**b
        # balance the leading coefficients so the leading monomials cancel
        c_l = initial_term(lhs, w)[0]
        c_r = initial_term(rhs, w)[0]
        p = lhs.scale(c_r) - rhs.scale(c_l)
        rem = sub.subduct(p, tuple(degrees))
        cert.relations_checked += 1
        if not rem.is_zero():
            cert.verified = False
            cert.failing_relation = rel.describe(labels)
            break
    _CHECK_CACHE[cache_key] = cert
    return cert


# -- weight detection --------------------------------------------------------


@dataclass
class NotFound:
    budget_exhausted: bool = False
    explored: int = 0

    def __bool__(self):
        return False


def _candidate_leaders(p: Polynomial):
    return sorted(p.exponents(), key=lambda e: (-sum(e), tuple(-x for x in e)))


def detect_weight(family: SagbiFamily, budget: int = 100_000):
    """First weight (in depth-first leader-selection order) passing :func:`sagbi_check`.

    Returns a weight tuple or a :class:`NotFound` value.
    """
    gens = [p for _, _, p in family.generators()]
    n = family.n
    explored = 0
    strict: list[list[int]] = []

    def rows_for(p, lead):
        return [[a - b for a, b in zip(lead, e)] for e in p.exponents() if e != lead]

    def dfs(i):
        nonlocal explored
        if i == len(gens):
            if strict:
                wit = strict_lp_feasible(strict)
                if not wit.feasible:
                    return None
                w = tuple(wit.certificate)
            else:
                w = (0,) * n
            if sagbi_check(family, w).verified:
                return w
            return None
        p = gens[i]
        if p.is_monomial():
            return dfs(i + 1)
        for lead in _candidate_leaders(p):
            if explored >= budget:
                return None
            explored += 1
            new = rows_for(p, lead)
            strict.extend(new)
            ok = strict_lp_feasible(strict).feasible
            if ok:
                found = dfs(i + 1)
                if found is not None:
                    return found
            del strict[len(strict) - len(new):]
        return None

    found = dfs(0)
    if found is None:
        return NotFound(budget_exhausted=explored >= budget, explored=explored)
    return found

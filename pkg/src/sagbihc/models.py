"""Generators for Grassmannian slices, coupled resonators and random slices."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .homotopy import ParameterizedSystem
from .poly import Polynomial, Ring, parse
from .sagbi import SagbiFamily, TieError, sagbi_check

__all__ = [
    "grassmannian_family",
    "GRASSMANNIAN_SPECIAL_SLICE",
    "grassmannian_special_system",
    "ResonatorSpec",
    "random_resonator",
    "resonator_family",
    "random_slice",
    "EXAMPLES",
    "example_family",
    "example_system",
]


def _det(M: list[list[Polynomial]]) -> Polynomial:
    k = len(M)
    ring = M[0][0].ring
    total = ring.zero()
    for perm in itertools.permutations(range(k)):
        inv = sum(1 for i in range(k) for j in range(i + 1, k) if perm[i] > perm[j])
        term = ring.const(1)
        for i, j in enumerate(perm):
            term = term * M[i][j]
        total = total - term if inv % 2 else total + term
    return total


def grassmannian_family(k: int, m: int, cap: int = 256) -> tuple[SagbiFamily, tuple[int, ...]]:
    """Maximal minors of ``[I_k | X]`` (k-subsets in lex order) and a verified weight."""
    if not 1 <= k < m:
        raise ValueError("need 1 <= k < m")
    if math.comb(m, k) > cap:
        raise ValueError(f"C({m},{k}) = {math.comb(m, k)} exceeds the cap {cap}")
    d = m - k
    names = [f"x{i + 1}_{j + 1}" for i in range(k) for j in range(d)]
    ring = Ring(names)
    one, zero = ring.const(1), ring.zero()
    H = [[one if i == j else zero for j in range(k)] + [ring.var(f"x{i + 1}_{j + 1}") for j in range(d)]
         for i in range(k)]
    minors = []
    for cols in itertools.combinations(range(m), k):
        minors.append(_det([[H[i][c] for c in cols] for i in range(k)]))
    family = SagbiFamily(ring, [minors])
    base = [r * (d - j) for r in range(k) for j in range(d)]
    for sign in (1, -1):
        w = tuple(sign * v for v in base)
        try:
            if sagbi_check(family, w).verified:
                return family, w
        except TieError:
            continue
    raise RuntimeError(f"no sign of the PBW weight verifies for Gr({k},{m})")


# Coefficients of nine special linear equations on Gr(3,6); columns follow the
# lex order of 3-subsets of {1..6}.
GRASSMANNIAN_SPECIAL_SLICE = [
    [4, 1, 3, 0, 8, -5, 4, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [-3, 5, 5, 0, -8, 9, -2, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [8, 6, -8, -10, -4, 10, 9, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, -10, -2, 4, 7, 7, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 8, -7, 6, 10, 2, 10, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, -1, 3, -9, 8, 2, 2, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 5, 8, 5, -9, -10, 8, 6],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, -7, 5, 0, 4, 9, -2, -4],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 4, -2, -2, 1, -2, -9, 1],
]


def grassmannian_special_system() -> tuple[ParameterizedSystem, tuple[int, ...]]:
    family, w = grassmannian_family(3, 6)
    return ParameterizedSystem(family, [np.array(GRASSMANNIAN_SPECIAL_SLICE, dtype=np.int64)]), w


# -- coupled resonators -------------------------------------------------------


@dataclass
class ResonatorSpec:
    """``N`` coupled resonators with restoring force of degree ``2n - 1``.

    ``a[i]`` and ``b[i]`` hold ``a_0..a_{n+1}`` and ``b_0..b_{n+1}`` of the
    pair ``(p_i, q_i)``; ``J[j][i]`` couples resonator ``j`` into ``i``.
    """

    N: int
    n: int
    a: np.ndarray
    b: np.ndarray
    J: np.ndarray

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        self.J = np.asarray(self.J, dtype=float)
        if self.n < 1 or self.N < 1:
            raise ValueError("need N >= 1 and n >= 1")
        if self.a.shape != (self.N, self.n + 2) or self.b.shape != (self.N, self.n + 2):
            raise ValueError("coefficient arrays must have shape (N, n + 2)")
        if self.J.shape != (self.N, self.N):
            raise ValueError("coupling matrix must be N x N")
        for i in range(self.N):
            if not math.isclose(self.a[i, 2], -self.b[i, 1], rel_tol=0, abs_tol=1e-15):
                raise ValueError(f"resonator {i + 1}: a_2 must equal -b_1")
            if not np.allclose(self.a[i, 3:], self.b[i, 3:], rtol=0, atol=1e-15):
                raise ValueError(f"resonator {i + 1}: a_k must equal b_k for k >= 3")


def random_resonator(N: int, n: int, seed: int = 0) -> ResonatorSpec:
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((N, n + 2))
    b = rng.standard_normal((N, n + 2))
    a[:, 2] = -b[:, 1]
    a[:, 3:] = b[:, 3:]
    J = rng.standard_normal((N, N))
    np.fill_diagonal(J, 0.0)
    return ResonatorSpec(N, n, a, b, J)


def resonator_family(spec: ResonatorSpec) -> ParameterizedSystem:
    """Pairs ``p_i, q_i`` as two equations on block ``i``.

    Block ``i`` is ``1, u_i, v_i, u_i r_i^k, v_i r_i^k (k = 1..n-1)`` followed
    by ``u_j, v_j`` for ``j != i``, where ``r_i = u_i^2 + v_i^2``.
    """
    N, n = spec.N, spec.n
    names = [f"u{i + 1}" for i in range(N)] + [f"v{i + 1}" for i in range(N)]
    ring = Ring(names)
    blocks, coeffs = [], []
    for i in range(N):
        u, v = ring.var(f"u{i + 1}"), ring.var(f"v{i + 1}")
        r = u * u + v * v
        gens = [ring.const(1), u, v]
        gens += [u * r**k for k in range(1, n)]
        gens += [v * r**k for k in range(1, n)]
        others = [j for j in range(N) if j != i]
        gens += [ring.var(f"u{j + 1}") for j in others]
        gens += [ring.var(f"v{j + 1}") for j in others]
        a, b = spec.a[i], spec.b[i]
        zeros = [0.0] * (n - 1)
        p = [a[0], a[1], a[2]] + list(a[3:]) + zeros
        q = [b[0], b[1], b[2]] + zeros + list(b[3:])
        p += [spec.J[j, i] / 2 for j in others] + [0.0] * len(others)
        q += [0.0] * len(others) + [spec.J[j, i] / 2 for j in others]
        blocks.append(gens)
        coeffs.append(np.array([p, q], dtype=float))
    return ParameterizedSystem(SagbiFamily(ring, blocks), coeffs)


# -- random slices --------------------------------------------------------------


def random_slice(family: SagbiFamily, rows_per_block: Sequence[int], coeff_kind: str = "complex_gaussian", seed: int = 0) -> ParameterizedSystem:
    if len(rows_per_block) != family.m:
        raise ValueError("one row count per block required")
    if sum(rows_per_block) != family.n:
        raise ValueError(f"rows sum to {sum(rows_per_block)}, need {family.n}")
    rng = np.random.default_rng(seed)
    coeffs = []
    for k, block in zip(rows_per_block, family.blocks):
        shape = (k, len(block))
        if coeff_kind == "int_range":
            coeffs.append(rng.integers(-100, 101, size=shape))
        elif coeff_kind == "complex_gaussian":
            coeffs.append((rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2))
        else:
            raise ValueError(f"unknown coefficient kind {coeff_kind!r}")
    return ParameterizedSystem(family, coeffs)


# -- worked examples ------------------------------------------------------------

# name -> (variables, blocks, rows per block, coefficient kind)
EXAMPLES = {
    "ex41": ("xyz", [["x^2+1", "y^2+1", "x*y+z^2", "1"]], (3,), "int_range"),
    "ex42": ("xyz", [["x", "y", "x^2+y^2", "1"], ["y", "z", "x^2+y^2", "x^3+z^3"]], (2, 1), "int_range"),
    "ex43": (
        "xy",
        [["x*(x^2+y^2-2*x)", "x*(5-4*y)", "y*(x^2+y^2-2*x)", "y*(5-4*y)"]],
        (2,),
        "complex_gaussian",
    ),
}


def example_family(name: str) -> SagbiFamily:
    names, blocks, _, _ = EXAMPLES[name]
    ring = Ring(list(names))
    return SagbiFamily(ring, [[parse(g, ring) for g in block] for block in blocks])


def example_system(name: str, seed: int = 0) -> ParameterizedSystem:
    _, _, rows, kind = EXAMPLES[name]
    return random_slice(example_family(name), rows, kind, seed)

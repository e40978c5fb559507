import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.spatial import ConvexHull

from sagbihc.models import example_family, grassmannian_family
from sagbihc.polyhedral import (
    Support,
    mixed_cells,
    mixed_volume,
    random_lifting,
    solve_binomial,
    start_solutions,
)
from sagbihc.sagbi import detect_weight, leading_exponents


def simplex(n):
    return [tuple(0 for _ in range(n))] + [tuple(int(i == j) for j in range(n)) for i in range(n)]


def shoelace(pts):
    hull = ConvexHull(np.array(pts, dtype=float))
    return hull.volume


def kushnirenko(pts):
    n = len(pts[0])
    return round(math.factorial(n) * shoelace(pts))


def test_simplex_single_cell():
    for n in (1, 2, 3, 4):
        cells = mixed_cells([Support(simplex(n), n)], random_lifting([Support(simplex(n), n)], 1))
        assert len(cells) == 1
        assert cells[0].volume == 1


def test_ex41_leaders_volume_8():
    F = example_family("ex41")
    pts = leading_exponents(F, detect_weight(F))[0]
    assert mixed_volume([Support(pts, 3)]) == 8


def test_two_unit_simplices():
    S = simplex(2)
    assert mixed_volume([Support(S, 1), Support(S, 1)]) == 1


def test_dilated_simplex():
    assert mixed_volume([Support([(0, 0), (2, 0), (0, 2)], 2)]) == 4


def test_grassmannian_24_volume():
    F, w = grassmannian_family(2, 4)
    pts = sorted(set(leading_exponents(F, w)[0]))
    assert mixed_volume([Support(pts, 4)]) == 2


def test_ex43_volume_matches_area():
    F = example_family("ex43")
    pts = sorted(set(leading_exponents(F, detect_weight(F))[0]))
    assert mixed_volume([Support(pts, 2)]) == kushnirenko(pts) == 2


def test_cell_inequalities_and_volume_sum():
    rng = np.random.default_rng(3)
    supports = [Support([(0, 0), (1, 0), (0, 1), (2, 2)], 1), Support([(0, 0), (3, 1), (1, 2)], 1)]
    lift = random_lifting(supports, 11)
    cells = mixed_cells(supports, lift)
    assert sum(c.volume for c in cells) == mixed_volume(supports)
    for c in cells:
        assert c.volume >= 1
        for r, s in enumerate(supports):
            vals = [Fraction(lift[r][j]) + sum(g * a for g, a in zip(c.gamma, p)) for j, p in enumerate(s.points)]
            lo = min(vals)
            assert all(vals[j] == lo for j in c.indices[r])
            assert all(v > lo for j, v in enumerate(vals) if j not in c.indices[r])


def test_multiplicity_mismatch():
    with pytest.raises(ValueError):
        mixed_cells([Support(simplex(2), 1)], [[1, 2, 3]])


def test_solve_binomial_examples():
    sols = solve_binomial([[2]], [4])
    assert sorted(round(s[0].real, 12) for s in sols) == [-2.0, 2.0]
    c = [2 + 1j, -3]
    sols = solve_binomial([[1, 0], [0, 1]], c)
    assert len(sols) == 1 and np.allclose(sols[0], c)
    A = [[1, 1], [0, 2]]
    sols = solve_binomial(A, [1, 4])
    assert len(sols) == 2
    for x in sols:
        assert abs(x[0] * x[1] - 1) < 1e-12 and abs(x[1] ** 2 - 4) < 1e-12


def test_solve_binomial_rejects_bad_input():
    with pytest.raises(ValueError):
        solve_binomial([[1, 2], [2, 4]], [1, 1])
    with pytest.raises(ValueError):
        solve_binomial([[1]], [0])


def _check_binomial(A, c):
    sols = solve_binomial(A, c)
    det = abs(round(np.linalg.det(np.array(A, float))))
    assert len(sols) == det
    for x in sols:
        vals = np.prod(x[None, :] ** np.array(A), axis=1)
        assert np.max(np.abs(vals - c)) <= 1e-10 * max(1.0, np.max(np.abs(c)))
    for i in range(len(sols)):
        for j in range(i):
            assert np.max(np.abs(sols[i] - sols[j])) > 1e-8


def test_solve_binomial_random_100():
    rng = np.random.default_rng(5)
    done = 0
    while done < 100:
        n = int(rng.integers(1, 5))
        A = rng.integers(-4, 5, size=(n, n))
        if round(np.linalg.det(A)) == 0:
            continue
        c = np.exp(1j * rng.uniform(0, 2 * np.pi, n))
        _check_binomial(A.tolist(), c)
        done += 1


def test_start_solutions_linear():
    S = Support(simplex(3), 3)
    rng = np.random.default_rng(0)
    C = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
    out = start_solutions([S], [C], random_lifting([S], 2))
    assert sum(len(s) for _, s in out) == 1


def test_start_solutions_ex42():
    F = example_family("ex42")
    w = detect_weight(F)
    leads = leading_exponents(F, w)
    supports = [Support(sorted(set(leads[0])), 2), Support(sorted(set(leads[1])), 1)]
    rng = np.random.default_rng(1)
    coeffs = [rng.standard_normal((s.multiplicity, len(s.points))) + 1j for s in supports]
    lift = random_lifting(supports, 4)
    out = start_solutions(supports, coeffs, lift)
    assert sum(len(s) for _, s in out) == 6
    for cell, sols in out:
        for x in sols:
            # each equation restricted to the cell's points vanishes
            for r, s in enumerate(supports):
                for row in coeffs[r]:
                    v = sum(row[j] * np.prod(x ** np.array(s.points[j])) for j in cell.indices[r])
                    assert abs(v) < 1e-10 * max(1.0, np.max(np.abs(x)) ** 3)


def test_start_solutions_sparse_2x2():
    pts = [(0, 0), (2, 0), (0, 1)]
    supports = [Support(pts, 1), Support(pts, 1)]
    rng = np.random.default_rng(2)
    coeffs = [rng.standard_normal((1, 3)) + 1j * rng.standard_normal((1, 3)) for _ in supports]
    out = start_solutions(supports, coeffs, random_lifting(supports, 9))
    assert sum(len(s) for _, s in out) == mixed_volume(supports) == 2


@pytest.mark.parametrize("name", ["ex41", "ex42", "ex43"])
def test_lifting_independence_examples(name):
    F = example_family(name)
    leads = leading_exponents(F, detect_weight(F))
    rows = {"ex41": (3,), "ex42": (2, 1), "ex43": (2,)}[name]
    supports = [Support(sorted(set(l)), k) for l, k in zip(leads, rows)]
    vols = {mixed_volume(supports, seed=s) for s in range(20)}
    assert len(vols) == 1


@given(st.integers(0, 100_000))
def test_unmixed_volume_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 4))
    k = int(rng.integers(n + 1, 9))
    pts = {tuple(int(v) for v in rng.integers(0, 4, size=n)) for _ in range(k)}
    pts = sorted(pts)
    if len(pts) < n + 1 or np.linalg.matrix_rank(np.array(pts[1:]) - np.array(pts[0])) < n:
        return
    expected = kushnirenko(pts) if n > 1 else max(pts)[0] - min(pts)[0]
    assert mixed_volume([Support(pts, n)], seed=seed) == expected


@given(st.integers(0, 100_000))
def test_interior_point_does_not_change_volume(seed):
    rng = np.random.default_rng(seed)
    pts = sorted({tuple(int(v) for v in rng.integers(0, 5, size=2)) for _ in range(5)})
    if len(pts) < 3 or np.linalg.matrix_rank(np.array(pts[1:]) - np.array(pts[0])) < 2:
        return
    hull = ConvexHull(np.array(pts, float))
    grid = [(a, b) for a in range(5) for b in range(5) if (a, b) not in pts]
    inside = [p for p in grid if np.all(hull.equations[:, :2] @ np.array(p, float) + hull.equations[:, 2] <= 1e-9)]
    if not inside:
        return
    base = mixed_volume([Support(pts, 2)])
    assert mixed_volume([Support(pts + [inside[0]], 2)]) == base

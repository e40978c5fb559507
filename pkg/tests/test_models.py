import math

import numpy as np
import pytest

from sagbihc.homotopy import SolveOptions, solve
from sagbihc.models import (
    GRASSMANNIAN_SPECIAL_SLICE,
    ResonatorSpec,
    example_family,
    grassmannian_family,
    random_resonator,
    random_slice,
    resonator_family,
)
from sagbihc.sagbi import initial_term, sagbi_check


@pytest.mark.parametrize("k,m", [(1, 3), (2, 4), (2, 5), (2, 6), (3, 6)])
def test_grassmannian_family_shape(k, m):
    F, w = grassmannian_family(k, m)
    assert F.n == k * (m - k)
    assert len(F.blocks[0]) == math.comb(m, k)
    assert all(b.degree() <= min(k, m - k) for b in F.blocks[0])
    assert sagbi_check(F, w).verified


def test_grassmannian_pbw_weights():
    assert grassmannian_family(2, 4)[1] == (0, 0, 2, 1)
    assert grassmannian_family(3, 6)[1] == (0, 0, 0, 3, 2, 1, 6, 4, 2)


def test_grassmannian_cap_and_range():
    with pytest.raises(ValueError):
        grassmannian_family(4, 10, cap=100)
    with pytest.raises(ValueError):
        grassmannian_family(3, 3)


def test_projective_space_leaders_are_variables():
    F, w = grassmannian_family(1, 4)
    leads = {initial_term(b, w)[1] for b in F.blocks[0]}
    assert leads == {(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)}
    res = solve(random_slice(F, [3], seed=0), SolveOptions(weight=w, degree_check=False))
    assert res.n_solutions == 1


@pytest.mark.parametrize("k,m,deg", [(2, 4, 2), (2, 5, 5), (2, 6, 14), (3, 6, 42)])
def test_grassmannian_slice_counts(k, m, deg):
    F, w = grassmannian_family(k, m)
    for seed in range(5):
        res = solve(random_slice(F, [F.n], seed=seed), SolveOptions(weight=w, degree_check=False, seed=seed))
        assert res.n_solutions == deg, seed
        assert res.paths_tracked == deg


def test_special_slice_shape():
    assert len(GRASSMANNIAN_SPECIAL_SLICE) == 9
    assert all(len(row) == 20 for row in GRASSMANNIAN_SPECIAL_SLICE)


def test_resonator_constraints():
    spec = random_resonator(2, 2, seed=1)
    bad = spec.a.copy()
    bad[0, 2] += 1
    with pytest.raises(ValueError):
        ResonatorSpec(2, 2, bad, spec.b, spec.J)
    bad = random_resonator(1, 3, seed=1)
    a = bad.a.copy()
    a[0, 4] += 1
    with pytest.raises(ValueError):
        ResonatorSpec(1, 3, a, bad.b, bad.J)


def test_resonator_equations_match_formula():
    spec = random_resonator(2, 2, seed=4)
    sys = resonator_family(spec)
    rng = np.random.default_rng(0)
    x = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    u, v = x[:2], x[2:]
    vals = [complex(p.to_complex().evaluate(x)) for p in sys.polynomials()]
    for i in range(2):
        j = 1 - i
        r = u[i] ** 2 + v[i] ** 2
        a, b = spec.a[i], spec.b[i]
        p = a[0] + a[1] * u[i] + a[2] * v[i] + a[3] * u[i] * r + spec.J[j, i] / 2 * u[j]
        q = b[0] + b[1] * u[i] + b[2] * v[i] + b[3] * v[i] * r + spec.J[j, i] / 2 * v[j]
        assert abs(vals[2 * i] - p) < 1e-10
        assert abs(vals[2 * i + 1] - q) < 1e-10


@pytest.mark.parametrize("N,count", [(1, 5), (2, 25)])
def test_resonator_counts(N, count):
    for seed in range(5):
        res = solve(resonator_family(random_resonator(N, 2, seed=seed)), SolveOptions(degree_check=False, seed=seed))
        assert res.n_solutions == count, seed


def test_resonator_linear_degenerate():
    spec = random_resonator(1, 2, seed=0)
    a, b = spec.a.copy(), spec.b.copy()
    a[:, 3:] = 0
    b[:, 3:] = 0
    sys = resonator_family(ResonatorSpec(1, 2, a, b, spec.J))
    res = solve(sys, SolveOptions(degree_check=False))
    assert res.n_solutions == 1


def test_random_slice_patterns():
    F = example_family("ex41")
    s1 = random_slice(F, [3], "int_range", seed=3)
    s2 = random_slice(F, [3], "int_range", seed=3)
    C = s1.coefficients[0]
    assert C.shape == (3, 4) and C.dtype.kind == "i"
    assert np.all(np.abs(C) <= 100)
    assert np.array_equal(C, s2.coefficients[0])
    F2 = example_family("ex42")
    assert random_slice(F2, [2, 1]).rows_per_block == [2, 1]
    with pytest.raises(ValueError):
        random_slice(F2, [1, 1])
    with pytest.raises(ValueError):
        random_slice(F, [3], "uniform")

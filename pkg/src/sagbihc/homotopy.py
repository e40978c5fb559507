"""Two-step and one-step SAGBI homotopies, degree checks and base loci."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from .intlin import lattice_index
from .poly import Polynomial, Ring
from .polyhedral import (
    DegenerateLifting,
    Support,
    mixed_cells,
    random_lifting,
    solve_binomial,
    solve_sparse,
    _cell_system,
)
from .sagbi import (
    NotFound,
    SagbiCertificate,
    SagbiFamily,
    TieError,
    detect_weight,
    homogenize,
    initial_term,
    leading_exponents,
    sagbi_check,
    weight_of,
)
from .tracker import PathResult, SolutionSet, TermHomotopy, TrackerConfig, dedup_points, track_all, _canonical_key

__all__ = [
    "ParameterizedSystem",
    "SagbiHomotopySystem",
    "DegreeReport",
    "SolveOptions",
    "SolveResult",
    "WeightNotFound",
    "UnverifiedWeight",
    "DegreeUndetermined",
    "build_sagbi_homotopy",
    "build_one_step_homotopy",
    "compute_degree_map",
    "compute_degree_monomial_map",
    "compute_base_locus",
    "torus_count_at",
    "solve",
]

DEGREE_DROP = "SAGBI homotopy will not find all the solutions"


class WeightNotFound(RuntimeError):
    pass


class UnverifiedWeight(RuntimeError):
    pass


class DegreeUndetermined(RuntimeError):
    pass


@dataclass
class ParameterizedSystem:
    """Square system whose equations are linear combinations within one block each.

    ``coefficients[r]`` has one row per equation drawn from block ``r`` and
    one column per generator of that block.
    """

    family: SagbiFamily
    coefficients: list[np.ndarray]

    def __post_init__(self):
        self.coefficients = [np.atleast_2d(np.asarray(C)) if len(np.asarray(C)) else np.zeros((0, len(b)))
                             for C, b in zip(self.coefficients, self.family.blocks)]
        if len(self.coefficients) != self.family.m:
            raise ValueError("one coefficient matrix per block required")
        for C, block in zip(self.coefficients, self.family.blocks):
            if C.shape[1] != len(block):
                raise ValueError("coefficient matrix width must equal the block size")
        if self.n_equations != self.family.n:
            raise ValueError(f"system is not square: {self.n_equations} equations, {self.family.n} unknowns")

    @property
    def n_equations(self) -> int:
        return sum(C.shape[0] for C in self.coefficients)

    @property
    def rows_per_block(self) -> list[int]:
        return [C.shape[0] for C in self.coefficients]

    def equations(self):
        """``(block, row)`` for each equation, in order."""
        return [(r, i) for r, C in enumerate(self.coefficients) for i in range(C.shape[0])]

    def with_coefficients(self, coefficients) -> "ParameterizedSystem":
        return ParameterizedSystem(self.family, coefficients)

    def polynomials(self) -> list[Polynomial]:
        out = []
        for r, i in self.equations():
            C = self.coefficients[r]
            f = self.family.ring.zero()
            for j, b in enumerate(self.family.blocks[r]):
                c = C[i, j]
                if c != 0:
                    f = f + b.scale(_coef(c))
            out.append(f)
        return out

    def residual(self, x) -> float:
        x = np.asarray(x, dtype=complex)
        vals = []
        for r, i in self.equations():
            v = 0
            for j, b in enumerate(self.family.blocks[r]):
                c = self.coefficients[r][i, j]
                if c != 0:
                    v += complex(c) * complex(b.to_complex().evaluate(x))
            vals.append(abs(v))
        return max(vals) if vals else 0.0


def _coef(c):
    if isinstance(c, (int, np.integer)):
        return Fraction(int(c))
    if isinstance(c, Fraction):
        return c
    c = complex(c)
    if c.imag == 0 and c.real == int(c.real) and abs(c.real) < 2**53:
        return Fraction(int(c.real))
    return c


@dataclass
class SagbiHomotopySystem:
    equations: list[Polynomial]  # in the unknowns plus the trailing parameter t
    weight: tuple[int, ...]
    method: str
    t_index: int


def build_sagbi_homotopy(sys: ParameterizedSystem, w: Sequence[int], verify: bool = True) -> SagbiHomotopySystem:
    """Equations ``sum_j c_ij (b_rj)_t^w`` in the unknowns and ``t``."""
    w = tuple(int(v) for v in w)
    if verify and not sagbi_check(sys.family, w).verified:
        raise UnverifiedWeight(f"weight {w} does not give a SAGBI basis")
    homs = [[homogenize(b, w) for b in block] for block in sys.family.blocks]
    ring = homs[0][0].ring
    eqs = []
    for r, i in sys.equations():
        f = ring.zero()
        for j, hb in enumerate(homs[r]):
            c = sys.coefficients[r][i, j]
            if c != 0:
                f = f + hb.scale(_coef(c))
        eqs.append(f)
    return SagbiHomotopySystem(eqs, w, "two-step", ring.n - 1)


def _to_term_homotopy(hs: SagbiHomotopySystem, mode: str, gamma=1.0, s_start=0.0, s_end=1.0, scale=1.0, kappa=1.0):
    n = hs.t_index
    owner, exps, coef, texp = [], [], [], []
    for i, f in enumerate(hs.equations):
        for c, e in f.terms:
            owner.append(i)
            exps.append(e[:n])
            coef.append(complex(c))
            texp.append(e[n] * scale)
    return TermHomotopy(n, owner, exps, coef, mode=mode, texp=texp, gamma=gamma, kappa=kappa, s_start=s_start, s_end=s_end)


def _leader_supports(sys: ParameterizedSystem, w):
    """Supports of the sparse limit system and its coefficient blocks."""
    supports, coeffs, point_of = [], [], []
    for r, block in enumerate(sys.family.blocks):
        k = sys.coefficients[r].shape[0]
        leads = [initial_term(b, w) for b in block]
        pts = []
        for _, a in leads:
            if a not in pts:
                pts.append(a)
        idx = [pts.index(a) for _, a in leads]
        point_of.append(idx)
        if k == 0:
            supports.append(None)
            coeffs.append(None)
            continue
        C = np.zeros((k, len(pts)), dtype=complex)
        for j, (lc, _) in enumerate(leads):
            C[:, idx[j]] += sys.coefficients[r][:, j].astype(complex) * complex(lc)
        supports.append(Support(pts, k))
        coeffs.append(C)
    return supports, coeffs, point_of


def build_one_step_homotopy(sys: ParameterizedSystem, w, cell, lifting, supports=None) -> tuple[SagbiHomotopySystem, int]:
    """Combined toric and polyhedral deformation attached to one mixed cell.

    Returns the homotopy (equations in the scaled unknowns ``y`` and ``t``,
    with ``x = t^gamma y``) and the integer scaling applied to ``t``.
    ``cell`` and ``lifting`` refer to the non-empty leader supports.
    """
    w = tuple(w)
    if supports is None:
        supports, _, _ = _leader_supports(sys, w)
    active = [r for r, s in enumerate(supports) if s is not None]
    _, _, point_of = _leader_supports(sys, w)
    gamma = cell.gamma
    # smallest K making every non-leading t-exponent positive
    K = 1
    for pos, r in enumerate(active):
        h_r = cell.heights[pos]
        for j, b in enumerate(sys.family.blocks[r]):
            p = point_of[r][j]
            lift = Fraction(lifting[pos][p])
            _, alpha = initial_term(b, w)
            for _, beta in b.terms:
                if beta == alpha:
                    continue
                base = lift + sum(g * v for g, v in zip(gamma, beta)) - h_r
                dw = weight_of(w, alpha) - weight_of(w, beta)
                need = -base / dw
                if need >= K:
                    K = math.floor(need) + 1
    den = 1
    for v in list(gamma) + list(cell.heights):
        den = math.lcm(den, Fraction(v).denominator)
    ring = sys.family.ring.extend(sys.family.ring.fresh_name("t"))
    n = sys.family.n
    eqs = []
    for r, i in sys.equations():
        pos = active.index(r)
        h_r = cell.heights[pos]
        terms: dict = {}
        for j, b in enumerate(sys.family.blocks[r]):
            c_ij = sys.coefficients[r][i, j]
            if c_ij == 0:
                continue
            p = point_of[r][j]
            lift = Fraction(lifting[pos][p])
            _, alpha = initial_term(b, w)
            for c, beta in b.terms:
                E = lift + sum(g * v for g, v in zip(gamma, beta)) - h_r + K * (weight_of(w, alpha) - weight_of(w, beta))
                E = E * den
                assert E.denominator == 1 and E >= 0
                key = beta + (int(E),)
                terms[key] = terms.get(key, 0) + _coef(c_ij) * c
        eqs.append(Polynomial(ring, terms))
    return SagbiHomotopySystem(eqs, w, "one-step", n), den


# -- degrees ------------------------------------------------------------------


def compute_degree_monomial_map(family: SagbiFamily, w) -> int | float:
    """Lattice index of the leading-exponent differences within each block."""
    cols = []
    for block in leading_exponents(family, w):
        for a in block[1:]:
            cols.append([x - y for x, y in zip(a, block[0])])
    if not cols:
        return math.inf
    A = [list(row) for row in zip(*cols)]
    return lattice_index(A)


def _rel_small(val, scale, tol):
    return abs(val) <= tol * max(scale, 1e-300)


def _poly_rows(polys: Sequence[Polynomial]):
    return [{e: complex(c) for c, e in p.terms} for p in polys]


def _combine(polys, G):
    rows = []
    for g in G:
        row: dict = {}
        for coef, p in zip(g, polys):
            for c, e in p.terms:
                row[e] = row.get(e, 0) + coef * complex(c)
        rows.append(row)
    return rows


def _abs_eval(p: Polynomial, x):
    val, scale = 0j, 0.0
    for c, e in p.terms:
        t = complex(c)
        for xi, a in zip(x, e):
            if a:
                t *= xi**a
        val += t
        scale += abs(t)
    return val, scale


def _random_complex(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2)


def compute_degree_map(family: SagbiFamily, seed: int = 0, trials: int = 3, cfg: TrackerConfig | None = None) -> int:
    """Generic fiber size of the block-wise projective parameterization."""
    cfg = cfg or TrackerConfig()
    n = family.n
    if sum(len(b) - 1 for b in family.blocks) < n:
        raise DegreeUndetermined("the parameterization is not generically finite")
    rng = np.random.default_rng([seed, 17])
    counts = []
    complex_blocks = [[b.to_complex() for b in block] for block in family.blocks]
    for trial in range(trials):
        xs = _random_complex(rng, n)
        fiber = []
        for block in complex_blocks:
            v0 = complex(block[0].evaluate(xs))
            for b in block[1:]:
                vj = complex(b.evaluate(xs))
                fiber.append(b.scale(v0) - block[0].scale(vj))
        fiber = [f for f in fiber if not f.is_zero()]
        G = _random_complex(rng, (n, len(fiber)))
        rows = _combine(fiber, G)
        res = solve_sparse(rows, n, seed=int(rng.integers(1 << 30)), cfg=cfg)
        found = []
        for x in res.solutions.points:
            if not all(_rel_small(*_abs_eval(f, x), 1e-6) for f in fiber):
                continue
            if _in_base_locus(complex_blocks, x):
                continue
            found.append(x)
        counts.append(len(dedup_points(found, 1e-6)))
        if max(counts.count(c) for c in counts) * 2 > trials:
            break  # majority already decided
    best = max(set(counts), key=counts.count)
    if counts.count(best) * 2 <= len(counts):
        raise DegreeUndetermined(f"fiber counts disagree across trials: {counts}")
    return best


def _in_base_locus(complex_blocks, x, tol=1e-6) -> bool:
    for block in complex_blocks:
        if all(_rel_small(*_abs_eval(b, x), tol) for b in block):
            return True
    return False


@dataclass
class DegreeReport:
    deg_phi: int | None
    deg_phi0: int | float
    expected_count: int | None = None
    warning: str | None = None

    def to_json(self):
        return {
            "deg_phi": self.deg_phi,
            "deg_phi0": None if self.deg_phi0 == math.inf else self.deg_phi0,
            "expected_count": self.expected_count,
            "warning": self.warning,
        }


def _degree_report(family, w, n_start, seed, cfg) -> DegreeReport:
    d0 = compute_degree_monomial_map(family, w)
    d = compute_degree_map(family, seed=seed, cfg=cfg)
    expected = None
    if d0 != math.inf and d0 and n_start % d0 == 0:
        expected = d * n_start // d0
    warning = None
    if d0 < d:
        warning = f"degree of monomial parameterisation drops from {d} to {d0}; {DEGREE_DROP}"
    return DegreeReport(d, d0, expected, warning)


# -- base locus --------------------------------------------------------------


@dataclass
class BaseLocus:
    points: list[np.ndarray]
    warnings: list[str] = field(default_factory=list)


def compute_base_locus(family: SagbiFamily, seed: int = 0, cfg: TrackerConfig | None = None) -> BaseLocus:
    """Isolated torus points where all generators of some block vanish."""
    cfg = cfg or TrackerConfig()
    n = family.n
    rng = np.random.default_rng([seed, 29])
    points: list = []
    warnings = []
    for r, block in enumerate(family.blocks):
        if any(len(b) == 1 and not any(b.exponents()[0]) for b in block):
            continue  # a nonzero constant never vanishes
        cblock = [b.to_complex() for b in block]
        runs = []
        for _ in range(2):
            G = _random_complex(rng, (n, len(block)))
            rows = _combine(cblock, G)
            res = solve_sparse(rows, n, seed=int(rng.integers(1 << 30)), cfg=cfg)
            pts = [x for x in res.solutions.points if all(_rel_small(*_abs_eval(b, x), 1e-6) for b in cblock)]
            runs.append([pts[i] for i in dedup_points(pts, 1e-6)])
        if len(runs[0]) != len(runs[1]):
            warnings.append(f"block {r + 1}: base locus may be positive-dimensional")
        for x in runs[0]:
            if any(np.max(np.abs(x - y)) <= 1e-6 * max(1.0, np.max(np.abs(x))) for y in runs[1]):
                points.append(x)
    keep = dedup_points(points, 1e-6)
    pts = sorted((points[i] for i in keep), key=_canonical_key)
    return BaseLocus(pts, warnings)


# -- count flatness -----------------------------------------------------------


def torus_count_at(sys: ParameterizedSystem, w, tstar: complex, seed: int = 0, cfg: TrackerConfig | None = None) -> int:
    """Number of torus solutions of the deformed system at ``t = tstar``."""
    hs = build_sagbi_homotopy(sys, w, verify=False)
    n = sys.family.n
    rows = []
    for f in hs.equations:
        row: dict = {}
        for c, e in f.terms:
            row[e[:n]] = row.get(e[:n], 0) + complex(c) * complex(tstar) ** e[n]
        rows.append({e: c for e, c in row.items() if c != 0})
    res = solve_sparse(rows, n, seed=seed, cfg=cfg or TrackerConfig())
    return len(res.solutions.points)


# -- solve --------------------------------------------------------------------


@dataclass
class SolveOptions:
    weight: tuple[int, ...] | None = None
    degree_check: bool = True
    get_base_locus: bool = False
    vary_linear_part: bool = False
    one_step: bool = False
    seed: int = 0
    force: bool = False
    tracker: TrackerConfig = field(default_factory=TrackerConfig)

    def to_json(self):
        return {
            "weight": list(self.weight) if self.weight is not None else None,
            "degree_check": self.degree_check,
            "get_base_locus": self.get_base_locus,
            "vary_linear_part": self.vary_linear_part,
            "one_step": self.one_step,
            "seed": self.seed,
            "force": self.force,
        }


@dataclass
class SolveResult:
    solutions: SolutionSet
    weight: tuple[int, ...]
    certificate: SagbiCertificate
    degree_report: DegreeReport | None
    method: str
    seed: int
    options: SolveOptions
    start_count: int
    base_points: list = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    residuals: list[float] = field(default_factory=list)

    @property
    def points(self):
        return self.solutions.points

    @property
    def n_solutions(self) -> int:
        return len(self.solutions.points)

    @property
    def paths_tracked(self) -> int:
        return len(self.solutions.paths)

    @property
    def nonsingular(self) -> int:
        return len(self.solutions.points) - len(self.base_points)

    def summary(self) -> dict:
        tally = self.solutions.tally()
        tally["base_locus_added"] = len(self.base_points)
        tally["total"] = self.n_solutions
        return tally

    def to_json(self) -> dict:
        sols = []
        for x, res, real in zip(self.solutions.points, self.residuals, self.solutions.real):
            sols.append({"point": [[float(z.real), float(z.imag)] for z in x], "residual": float(res), "real": bool(real)})
        return {
            "weight": list(self.weight),
            "certificate": self.certificate.to_json(),
            "degree_report": self.degree_report.to_json() if self.degree_report else None,
            "solutions": sols,
            "path_stats": self.summary(),
            "seed": self.seed,
            "method": self.method,
            "options": self.options.to_json(),
            "warnings": list(self.warnings),
        }


def _resolve_weight(family, opts) -> tuple[tuple[int, ...], SagbiCertificate, list[str]]:
    warnings = []
    if opts.weight is not None:
        w = tuple(int(v) for v in opts.weight)
        cert = sagbi_check(family, w)
        if not cert.verified:
            if not opts.force:
                raise UnverifiedWeight(f"weight {list(w)} fails the SAGBI check ({cert.failing_relation})")
            warnings.append("weight failed the SAGBI check; solution counts are not guaranteed")
        return w, cert, warnings
    found = detect_weight(family)
    if isinstance(found, NotFound):
        msg = "no SAGBI weight found"
        if found.budget_exhausted:
            msg += " (search budget exhausted)"
        raise WeightNotFound(msg)
    return found, sagbi_check(family, found), warnings


def _two_step(sys, w, rng, cfg):
    supports, coeffs, _ = _leader_supports(sys, w)
    rows = []
    for r, i in sys.equations():
        pts = supports[r].points
        rows.append({pts[p]: coeffs[r][i, p] for p in range(len(pts)) if coeffs[r][i, p] != 0})
    start = solve_sparse(rows, sys.family.n, seed=int(rng.integers(1 << 30)), cfg=cfg)
    starts = start.solutions.points
    gamma = np.exp(2j * np.pi * rng.random()) if cfg.path_gamma is None else cfg.path_gamma
    hs = build_sagbi_homotopy(sys, w, verify=False)
    h = _to_term_homotopy(hs, "gamma", gamma=gamma)
    sols = track_all(h, starts, cfg)
    return sols, len(starts)


def _one_step(sys, w, rng, cfg, attempts=10):
    supports, coeffs, _ = _leader_supports(sys, w)
    active = [s for s in supports if s is not None]
    active_coeffs = [c for c in coeffs if c is not None]
    base_seed = int(rng.integers(1 << 30))
    for k in range(attempts):
        lift = random_lifting(active, base_seed + k)
        try:
            cells = mixed_cells(active, lift)
        except DegenerateLifting:
            continue
        break
    else:
        raise DegenerateLifting("no generic lifting found")
    # t = exp((1 + i theta) s) keeps real coefficient data off the discriminant
    kappa = 1.0 + 1j * math.tan(np.pi / 4 * (2 * rng.random() - 1))
    paths: list[PathResult] = []
    for cell in cells:
        rows, consts = _cell_system(active, active_coeffs, cell)
        starts = solve_binomial(rows, consts)
        hs, den = build_one_step_homotopy(sys, w, cell, lift, supports)
        pos = [f for eq in hs.equations for c, f in eq.terms if f[-1] > 0]
        e_min = min(f[-1] for f in pos) if pos else 1
        s0 = math.log(1e-12) / e_min
        h = _to_term_homotopy(hs, "exp", s_start=s0, s_end=0.0, kappa=kappa)
        res = track_all(h, starts, cfg)
        paths.extend(res.paths)
    good = [p for p in paths if p.ok]
    keep = dedup_points([p.endpoint for p in good], cfg.dedup_tol, [p.residual for p in good])
    ks = set(keep)
    for j, p in enumerate(good):
        if j not in ks:
            p.duplicate = True
    pts = sorted((good[j] for j in keep), key=lambda p: _canonical_key(p.endpoint))
    sols = SolutionSet([p.endpoint for p in pts], [p.residual for p in pts],
                       [bool(np.max(np.abs(p.endpoint.imag)) < 1e-8) for p in pts], paths)
    return sols, len(paths)


def _coefficient_homotopy(sys_from: ParameterizedSystem, sys_to: ParameterizedSystem, zeta: complex):
    """Straight line ``(1 - s) C_hat + s zeta C`` acting on the generators."""
    fam = sys_from.family
    n = fam.n
    owner, exps, coef0, coef1 = [], [], [], []
    for eq, (r, i) in enumerate(sys_from.equations()):
        terms: dict = {}
        for j, b in enumerate(fam.blocks[r]):
            a = complex(sys_from.coefficients[r][i, j])
            z = zeta * complex(sys_to.coefficients[r][i, j])
            for c, e in b.terms:
                c = complex(c)
                t0, t1 = terms.get(e, (0j, 0j))
                terms[e] = (t0 + a * c, t1 + (z - a) * c)
        for e, (c0, c1) in terms.items():
            owner.append(eq)
            exps.append(e)
            coef0.append(c0)
            coef1.append(c1)
    return TermHomotopy(n, owner, exps, coef0, mode="linear", coef1=coef1)


def solve(sys: ParameterizedSystem, opts: SolveOptions | None = None) -> SolveResult:
    opts = opts or SolveOptions()
    cfg = opts.tracker
    rng = np.random.default_rng(opts.seed)
    fam = sys.family
    timings = {}
    t0 = time.perf_counter()
    w, cert, warnings = _resolve_weight(fam, opts)
    timings["detection"] = time.perf_counter() - t0

    work = sys
    if opts.vary_linear_part:
        work = sys.with_coefficients([_random_complex(rng, C.shape) for C in sys.coefficients])

    t0 = time.perf_counter()
    if opts.one_step:
        sols, n_start = _one_step(work, w, rng, cfg)
        method = "one-step"
    else:
        sols, n_start = _two_step(work, w, rng, cfg)
        method = "two-step"
    timings["tracking"] = time.perf_counter() - t0

    if opts.vary_linear_part:
        t0 = time.perf_counter()
        zeta = np.exp(2j * np.pi * rng.random())
        h = _coefficient_homotopy(work, sys, zeta)
        inner = sols
        sols = track_all(h, inner.points, cfg)
        timings["coefficient_homotopy"] = time.perf_counter() - t0

    report = None
    if opts.degree_check:
        t0 = time.perf_counter()
        report = _degree_report(fam, w, n_start, int(rng.integers(1 << 30)), cfg)
        if report.warning:
            warnings.append(report.warning)
        timings["degree_check"] = time.perf_counter() - t0

    base_points = []
    if opts.get_base_locus:
        t0 = time.perf_counter()
        bl = compute_base_locus(fam, seed=int(rng.integers(1 << 30)), cfg=cfg)
        warnings.extend(bl.warnings)
        for x in bl.points:
            if sys.residual(x) > 1e-6 * max(1.0, float(np.max(np.abs(x)))):
                continue
            if any(np.max(np.abs(x - y)) <= 1e-6 * max(1.0, float(np.max(np.abs(x)))) for y in sols.points):
                continue
            base_points.append(x)
        if base_points:
            pts = sols.points + base_points
            order = sorted(range(len(pts)), key=lambda k: _canonical_key(pts[k]))
            res = sols.residuals + [sys.residual(x) for x in base_points]
            real = sols.real + [bool(np.max(np.abs(x.imag)) < 1e-8) for x in base_points]
            sols = SolutionSet([pts[k] for k in order], [res[k] for k in order], [real[k] for k in order], sols.paths)
        timings["base_locus"] = time.perf_counter() - t0

    residuals = [sys.residual(x) for x in sols.points]
    return SolveResult(
        solutions=sols,
        weight=w,
        certificate=cert,
        degree_report=report,
        method=method,
        seed=opts.seed,
        options=opts,
        start_count=n_start,
        base_points=base_points,
        warnings=warnings,
        timings=timings,
        residuals=residuals,
    )

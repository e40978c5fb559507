"""Predictor-corrector path tracking for square polynomial homotopies.

A homotopy is stored as a flat list of terms ``coef_k(s) * x^a_k`` with an
owner equation per term.  The coefficient functions come in three flavours:

* ``exp``    ``c * exp(e * k * s)``, i.e. ``c * t^e`` with ``t = exp(k s)``; a
  non-real ``k`` spirals ``t`` around the origin
* ``gamma``  ``c * h(s)^k`` with ``h(s) = g s / (g s + 1 - s)``
* ``linear`` ``c0 + s * c1``

Tracking runs from ``s_start`` to ``s_end`` with an RK4 predictor on
``dx/ds = -J^-1 dH/ds`` and a Newton corrector.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "TrackerConfig",
    "TermHomotopy",
    "PathResult",
    "SolutionSet",
    "track",
    "track_all",
    "newton_polish",
    "dedup_points",
]


@dataclass(frozen=True)
class TrackerConfig:
    newton_tol: float = 1e-12
    max_newton_iters: int = 5
    initial_step: float = 1e-2
    min_step: float = 1e-14
    max_step: float = 0.1
    step_expand: float = 2.0
    step_shrink: float = 0.5
    path_gamma: complex | None = None
    divergence_norm: float = 1e10
    dedup_tol: float = 1e-8
    # tolerance of the corrector between predictor steps (relative)
    path_tol: float = 1e-7
    max_steps: int = 50000
    max_consecutive_rejections: int = 12
    end_truncation: float = 1e-8
    singular_cond: float = 1e12
    threads: int = 1

    def __post_init__(self):
        if not (0 < self.min_step <= self.initial_step <= self.max_step):
            raise ValueError("need 0 < min_step <= initial_step <= max_step")
        if self.newton_tol <= 0 or self.dedup_tol <= 0 or self.path_tol <= 0:
            raise ValueError("tolerances must be positive")


class TermHomotopy:
    """Square homotopy ``H(x, s)`` as a sum of coefficient-weighted monomials."""

    def __init__(
        self,
        n: int,
        owner,
        exps,
        coef,
        mode: str = "linear",
        coef1=None,
        texp=None,
        gamma: complex = 1.0,
        kappa: complex = 1.0,
        s_start: float = 0.0,
        s_end: float = 1.0,
    ):
        self.n = n
        self.owner = np.asarray(owner, dtype=int)
        self.exps = np.asarray(exps, dtype=int).reshape(len(self.owner), n)
        self.coef = np.asarray(coef, dtype=complex)
        self.mode = mode
        self.coef1 = np.zeros_like(self.coef) if coef1 is None else np.asarray(coef1, dtype=complex)
        self.texp = np.zeros(len(self.coef)) if texp is None else np.asarray(texp, dtype=float)
        self.gamma = complex(gamma)
        self.kappa = complex(kappa)
        self.s_start = float(s_start)
        self.s_end = float(s_end)
        if mode not in ("exp", "gamma", "linear"):
            raise ValueError(f"unknown mode {mode!r}")
        neq = int(self.owner.max()) + 1 if len(self.owner) else 0
        if neq != n:
            raise ValueError(f"homotopy is not square: {neq} equations, {n} unknowns")
        self.neq = neq
        self._O = np.zeros((neq, len(self.owner)))
        self._O[self.owner, np.arange(len(self.owner))] = 1.0
        self._maxdeg = int(self.exps.max()) if self.exps.size else 0
        self._cols = np.arange(n)
        self._degs = np.arange(self._maxdeg + 1)

    # -- coefficient functions --------------------------------------------
    def coefficients(self, s: float):
        if self.mode == "exp":
            k = self.texp * self.kappa
            c = self.coef * np.exp(k * s)
            return c, c * k
        if self.mode == "gamma":
            g = self.gamma
            den = g * s + 1.0 - s
            h = g * s / den
            dh = g / den**2
            k = self.texp
            if h == 0:
                hk = np.where(k == 0, 1.0, 0.0).astype(complex)
                dhk = np.where(k == 1, 1.0, 0.0) * dh
            else:
                hk = h**k
                dhk = k * hk / h * dh
            return self.coef * hk, self.coef * dhk
        c = self.coef + s * self.coef1
        return c, self.coef1

    # -- evaluation ----------------------------------------------------------
    def _powers(self, x):
        return x[:, None] ** self._degs

    def monomials(self, x):
        P = self._powers(x)
        vals = P[self._cols, self.exps]  # (K, n)
        return vals.prod(axis=1), vals, P

    def evaluate(self, x, s):
        """Return ``H``, ``dH/dx`` and ``dH/ds`` at ``(x, s)``."""
        mon, vals, P = self.monomials(x)
        c, dc = self.coefficients(s)
        cm = c * mon
        if np.all(x != 0):
            # d/dx_j x^a = a_j x^a / x_j on the torus
            J = self._O @ (cm[:, None] * self.exps / x[None, :])
        else:
            K, n = vals.shape
            pre = np.ones((K, n + 1), dtype=complex)
            suf = np.ones((K, n + 1), dtype=complex)
            pre[:, 1:] = np.cumprod(vals, axis=1)
            suf[:, :-1] = np.cumprod(vals[:, ::-1], axis=1)[:, ::-1]
            others = pre[:, :-1] * suf[:, 1:]
            dpow = np.where(self.exps > 0, P[self._cols, np.maximum(self.exps - 1, 0)] * self.exps, 0)
            J = self._O @ (c[:, None] * dpow * others)
        H = self._O @ cm
        Hs = self._O @ (dc * mon)
        return H, J, Hs

    def value(self, x, s):
        mon, _, _ = self.monomials(x)
        c, _ = self.coefficients(s)
        return self._O @ (c * mon)

    def scale(self, x, s):
        """Per-equation sum of term magnitudes, used for relative residuals."""
        mon, _, _ = self.monomials(x)
        c, _ = self.coefficients(s)
        return self._O @ np.abs(c * mon)


@dataclass
class PathResult:
    status: str  # success | diverged | singular | step-failure
    endpoint: np.ndarray
    residual: float
    steps_taken: int
    condition_estimate: float
    start_index: int = -1
    duplicate: bool = False
    rejected_steps: int = 0

    @property
    def ok(self) -> bool:
        return self.status == "success"


def _solve(J, b):
    try:
        return np.linalg.solve(J, b)
    except np.linalg.LinAlgError:
        return None


def newton_polish(system, point, tol: float = 1e-12, max_iters: int = 5, s=None):
    """Newton's method on ``system`` at parameter ``s`` (defaults to the target end).

    ``system`` is either a :class:`TermHomotopy` or a callable returning
    ``(F, J)``.  Returns ``(point, residual, converged)``; the last iterate is
    returned even when Newton fails.
    """
    if isinstance(system, TermHomotopy):
        s_val = system.s_end if s is None else s

        def fj(x):
            H, J, _ = system.evaluate(x, s_val)
            return H, J
    else:
        fj = system
    x = np.asarray(point, dtype=complex).copy()
    F, J = fj(x)
    res = float(np.max(np.abs(F))) if F.size else 0.0
    if res == 0.0:
        return x, 0.0, True
    converged = False
    prev = math.inf
    for _ in range(max_iters):
        dx = _solve(J, F)
        if dx is None or not np.all(np.isfinite(dx)):
            break
        x = x - dx
        F, J = fj(x)
        res = float(np.max(np.abs(F)))
        nd = float(np.max(np.abs(dx)))
        scale = max(1.0, float(np.max(np.abs(x))))
        if nd <= tol * scale:
            converged = True
            break
        if nd > 0.5 * prev and nd <= 1e4 * tol * scale:
            # no further contraction: rounding floor of a moderately conditioned point
            converged = True
            break
        prev = nd
    return x, res, converged


def _correct(h: TermHomotopy, x, s, tol, iters, max_first):
    """Newton at fixed ``s``; returns ``(x, ok, n_iter)``."""
    for k in range(iters):
        H, J, _ = h.evaluate(x, s)
        dx = _solve(J, H)
        if dx is None or not np.all(np.isfinite(dx)):
            return x, False, k
        nd = np.max(np.abs(dx))
        xn = np.max(np.abs(x))
        if k == 0 and nd > max_first * max(1.0, xn):
            return x, False, k
        x = x - dx
        if nd <= tol * max(1.0, xn):
            return x, True, k + 1
        if k > 0 and nd > 0.5 * prev:
            # stalled at the rounding floor of an ill-conditioned Jacobian
            return x, nd <= 100 * tol * max(1.0, xn), k + 1
        prev = nd
    return x, False, iters


def _cond(h, x, s) -> float:
    _, J, _ = h.evaluate(x, s)
    if not np.all(np.isfinite(J)):
        return math.inf
    try:
        return float(np.linalg.cond(J))
    except np.linalg.LinAlgError:
        return math.inf


def _velocity(h, x, s):
    _, J, Hs = h.evaluate(x, s)
    v = _solve(J, -Hs)
    return v


def _u_of(v: float) -> float:
    # linear up to 1/2, then logarithmic so the approach to u = 1 is resolved
    # on a scale proportional to 1 - u
    return v if v <= 0.5 else 1.0 - 0.5 * math.exp(-2.0 * (v - 0.5))


def _du_dv(v: float) -> float:
    return 1.0 if v <= 0.5 else math.exp(-2.0 * (v - 0.5))


def track(h: TermHomotopy, start, cfg: TrackerConfig = TrackerConfig()) -> PathResult:
    """Follow one path from ``h.s_start`` to ``h.s_end``."""
    s0, s1 = h.s_start, h.s_end
    span = s1 - s0
    x = np.asarray(start, dtype=complex).copy()
    v = 0.0
    v_end = 0.5 + 0.5 * math.log(0.5 / cfg.end_truncation)
    step = cfg.initial_step
    steps = 0
    rejected = 0
    successes = 0
    streak = 0

    def vel(x, v):
        k = _velocity(h, x, s0 + span * _u_of(v))
        return None if k is None else k * (span * _du_dv(v))

    # settle on the start system first
    x, ok, _ = _correct(h, x, s0, cfg.path_tol, cfg.max_newton_iters + 3, np.inf)
    status = None
    while v < v_end:
        if steps + rejected >= cfg.max_steps:
            status = "step-failure"
            break
        # the step cap applies in u; in the logarithmic tail it may reach 1
        step = min(step, min(cfg.max_step / _du_dv(v), 1.0))
        dv = min(step, v_end - v)
        k1 = vel(x, v)
        if k1 is None:
            status = "singular"
            break
        k2 = vel(x + 0.5 * dv * k1, v + 0.5 * dv)
        k3 = vel(x + 0.5 * dv * k2, v + 0.5 * dv) if k2 is not None else None
        k4 = vel(x + dv * k3, v + dv) if k3 is not None else None
        if k4 is None:
            pred = None
        else:
            pred = x + dv / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        ok = False
        if pred is not None and np.all(np.isfinite(pred)):
            xc, ok, iters = _correct(h, pred, s0 + span * _u_of(v + dv), cfg.path_tol, cfg.max_newton_iters, 0.1)
        if ok:
            x = xc
            v += dv
            steps += 1
            streak = 0
            successes += 1
            if iters <= 2 and successes >= 2:
                step = step * cfg.step_expand
                successes = 0
            xmax = np.max(np.abs(x))
            if xmax > cfg.divergence_norm:
                status = "diverged"
                break
            if v > 0.5 and steps % 20 == 0 and xmax > math.sqrt(cfg.divergence_norm):
                if _cond(h, x, s0 + span * _u_of(v)) > cfg.singular_cond:
                    status = "diverged"
                    break
        else:
            rejected += 1
            successes = 0
            streak += 1
            step *= cfg.step_shrink
            if step < cfg.min_step or streak > cfg.max_consecutive_rejections:
                status = "step-failure"
                break
            if v > 0.5 and streak >= 3 and _cond(h, x, s0 + span * _u_of(v)) > cfg.singular_cond:
                # approaching a singular or infinite endpoint; no accuracy left to gain
                big = np.max(np.abs(x)) > math.sqrt(cfg.divergence_norm)
                status = "diverged" if big else "singular"
                break
    # polish on the target system
    xp, res, conv = newton_polish(h, x, cfg.newton_tol, cfg.max_newton_iters + 5)
    if np.all(np.isfinite(xp)) and (status is None or np.max(np.abs(xp)) < cfg.divergence_norm):
        if conv or status is None:
            x = xp
    H, J, _ = h.evaluate(x, s1)
    res = float(np.max(np.abs(H))) if np.all(np.isfinite(H)) else math.inf
    try:
        cond = float(np.linalg.cond(J)) if np.all(np.isfinite(J)) else math.inf
    except np.linalg.LinAlgError:
        cond = math.inf
    if status is None:
        if np.max(np.abs(x)) > cfg.divergence_norm:
            status = "diverged"
        elif not np.isfinite(cond) or cond > cfg.singular_cond or not conv:
            status = "singular"
        else:
            scale = h.scale(x, s1)
            rel = float(np.max(np.abs(H) / np.maximum(scale, 1e-300)))
            status = "success" if rel <= cfg.newton_tol * 100 else "singular"
    return PathResult(status, x, res, steps, cond, rejected_steps=rejected)


@dataclass
class SolutionSet:
    points: list[np.ndarray]
    residuals: list[float]
    real: list[bool]
    paths: list[PathResult] = field(default_factory=list)

    @property
    def real_count(self) -> int:
        return sum(self.real)

    def tally(self) -> dict:
        counts: dict = {}
        for p in self.paths:
            counts[p.status] = counts.get(p.status, 0) + 1
        return {
            "paths_tracked": len(self.paths),
            "nonsingular": len(self.points),
            "real": self.real_count,
            "singular": counts.get("singular", 0),
            "diverged": counts.get("diverged", 0),
            "step_failure": counts.get("step-failure", 0),
            "duplicates": sum(1 for p in self.paths if p.duplicate),
            "total": len(self.points),
        }


def _canonical_key(x):
    return tuple(v for z in np.round(x, 10) for v in (z.real, z.imag))


def dedup_points(points: Sequence[np.ndarray], tol: float = 1e-8, residuals: Sequence[float] | None = None):
    """Indices of representatives of ``tol``-clusters (inf-norm, scaled), best residual first."""
    order = list(range(len(points)))
    if residuals is not None:
        order.sort(key=lambda i: residuals[i])
    keep: list[int] = []
    for i in order:
        p = points[i]
        scale = max(1.0, float(np.max(np.abs(p)))) if len(p) else 1.0
        if not any(np.max(np.abs(p - points[j])) <= tol * scale for j in keep):
            keep.append(i)
    return sorted(keep)


def track_all(h: TermHomotopy, starts: Sequence, cfg: TrackerConfig = TrackerConfig(), retries: int = 2) -> SolutionSet:
    """Track all starts; endpoints that collide are re-tracked with a smaller step cap."""
    starts = [np.asarray(s, dtype=complex) for s in starts]

    def run(args):
        i, st, c = args
        r = track(h, st, c)
        r.start_index = i
        return r

    def run_many(jobs):
        if cfg.threads > 1 and len(jobs) > 1:
            with ThreadPoolExecutor(cfg.threads) as pool:
                return list(pool.map(run, jobs))
        return [run(j) for j in jobs]

    results = run_many([(i, s, cfg) for i, s in enumerate(starts)])
    start_keep = set(dedup_points(starts, cfg.dedup_tol))
    for attempt in range(retries):
        good = [r for r in results if r.ok]
        keep = dedup_points([r.endpoint for r in good], cfg.dedup_tol)
        clustered = {r.start_index for r in results if r.status == "step-failure"}
        kept = {good[k].start_index for k in keep}
        for k, r in enumerate(good):
            if r.start_index not in kept and r.start_index in start_keep:
                clustered.add(r.start_index)
                # also re-run the path it collided with
                for j in keep:
                    e = good[j].endpoint
                    if np.max(np.abs(e - r.endpoint)) <= cfg.dedup_tol * max(1.0, float(np.max(np.abs(e)))):
                        clustered.add(good[j].start_index)
        if not clustered:
            break
        factor = 10.0 ** (attempt + 1)
        c2 = replace(cfg, max_step=cfg.max_step / factor, initial_step=min(cfg.initial_step, cfg.max_step / factor))
        redo = run_many([(i, starts[i], c2) for i in sorted(clustered)])
        for r in redo:
            results[r.start_index] = r
    good = [r for r in results if r.ok]
    keep = dedup_points([r.endpoint for r in good], cfg.dedup_tol, [r.residual for r in good])
    keep_set = set(keep)
    for k, r in enumerate(good):
        if k not in keep_set:
            r.duplicate = True
    pts = [good[k] for k in keep]
    pts.sort(key=lambda r: _canonical_key(r.endpoint))
    return SolutionSet(
        points=[r.endpoint for r in pts],
        residuals=[r.residual for r in pts],
        real=[bool(np.max(np.abs(r.endpoint.imag)) < 1e-8) for r in pts],
        paths=results,
    )

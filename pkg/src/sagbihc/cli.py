"""Command-line front end: system files, subcommands and the benchmark table.

System file (JSON)::

    {"variables": ["x", "y"],
     "blocks": [{"generators": ["x^2+1", "y", "1"]}, ...],
     "coefficients": [[[3, -1, [0.5, 2.0]], ...], ...],
     "weight": [1, 2],            # optional
     "options": {"one_step": true}}  # optional, SolveOptions fields

Coefficient entries are integers or ``[re, im]`` pairs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from typing import Sequence

import numpy as np

from . import __version__
from .homotopy import (
    DegreeUndetermined,
    ParameterizedSystem,
    SolveOptions,
    SolveResult,
    UnverifiedWeight,
    WeightNotFound,
    compute_degree_map,
    compute_degree_monomial_map,
    solve,
)
from .models import (
    EXAMPLES,
    example_system,
    grassmannian_family,
    grassmannian_special_system,
    random_resonator,
    random_slice,
    resonator_family,
)
from .poly import ParseError, Ring, parse
from .polyhedral import DegenerateLifting, Support, mixed_volume
from .sagbi import NotFound, SagbiFamily, TieError, detect_weight, sagbi_check
from .tracker import TrackerConfig

__all__ = [
    "main",
    "SystemFileError",
    "system_to_json",
    "system_from_json",
    "load_system",
    "result_to_json",
    "format_summary",
    "verify_result",
]

THREADS_ENV = "SAGBIHC_THREADS"
EXIT_OK, EXIT_ERROR, EXIT_WARNINGS = 0, 1, 2
OPTION_KEYS = ("degree_check", "get_base_locus", "vary_linear_part", "one_step", "seed", "force")


class SystemFileError(ValueError):
    pass


# -- system files ---------------------------------------------------------------


def _encode_coef(c):
    if isinstance(c, (int, np.integer)):
        return int(c)
    z = complex(c)
    return [float(z.real), float(z.imag)]


def _decode_matrix(rows, where: str) -> np.ndarray:
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise SystemFileError(f"{where}: coefficients must be a list of rows")
    complex_entries = False
    vals = []
    for i, row in enumerate(rows):
        out = []
        for j, v in enumerate(row):
            if isinstance(v, bool):
                raise SystemFileError(f"{where}, row {i + 1}, entry {j + 1}: not a number")
            if isinstance(v, int):
                out.append(v)
            elif isinstance(v, float):
                out.append(v)
                complex_entries = True
            elif isinstance(v, list) and len(v) == 2 and all(isinstance(t, (int, float)) for t in v):
                out.append(complex(v[0], v[1]))
                complex_entries = True
            else:
                raise SystemFileError(f"{where}, row {i + 1}, entry {j + 1}: expected an integer or [re, im]")
        vals.append(out)
    if len({len(r) for r in vals}) > 1:
        raise SystemFileError(f"{where}: rows have different lengths")
    if complex_entries:
        return np.array(vals, dtype=complex)
    return np.array(vals, dtype=object if any(abs(v) >= 2**62 for r in vals for v in r) else np.int64)


def system_to_json(sys_: ParameterizedSystem, weight=None, options: dict | None = None) -> dict:
    fam = sys_.family
    data = {
        "variables": list(fam.ring.names),
        "blocks": [{"generators": [str(g) for g in block]} for block in fam.blocks],
        "coefficients": [[[_encode_coef(c) for c in row] for row in np.asarray(C)] for C in sys_.coefficients],
    }
    if weight is not None:
        data["weight"] = [int(v) for v in weight]
    if options:
        data["options"] = dict(options)
    return data


def system_from_json(data: dict) -> tuple[ParameterizedSystem, tuple[int, ...] | None, dict]:
    if not isinstance(data, dict):
        raise SystemFileError("system file must hold a JSON object")
    for key in ("variables", "blocks", "coefficients"):
        if key not in data:
            raise SystemFileError(f"missing field {key!r}")
    names = data["variables"]
    if not isinstance(names, list) or not all(isinstance(v, str) for v in names):
        raise SystemFileError("variables must be a list of names")
    try:
        ring = Ring(names)
    except ValueError as e:
        raise SystemFileError(str(e)) from None
    blocks = []
    for r, block in enumerate(data["blocks"]):
        gens = block.get("generators") if isinstance(block, dict) else None
        if not isinstance(gens, list) or not gens:
            raise SystemFileError(f"block {r + 1}: expected a non-empty 'generators' list")
        polys = []
        for j, text in enumerate(gens):
            try:
                polys.append(parse(str(text), ring))
            except ParseError as e:
                err = SystemFileError(f"block {r + 1}, generator {j + 1} ({text!r}): {e}")
                err.offset = e.offset
                raise err from None
        blocks.append(polys)
    coeffs = data["coefficients"]
    if not isinstance(coeffs, list) or len(coeffs) != len(blocks):
        raise SystemFileError("need one coefficient matrix per block")
    mats = [_decode_matrix(C, f"block {r + 1}") for r, C in enumerate(coeffs)]
    try:
        family = SagbiFamily(ring, blocks)
        system = ParameterizedSystem(family, mats)
    except ValueError as e:
        raise SystemFileError(str(e)) from None
    weight = data.get("weight")
    if weight is not None:
        if not isinstance(weight, list) or not all(isinstance(v, int) for v in weight):
            raise SystemFileError("weight must be a list of integers")
        weight = tuple(weight)
    options = data.get("options") or {}
    unknown = set(options) - set(OPTION_KEYS) - {"weight"}
    if unknown:
        raise SystemFileError(f"unknown options: {sorted(unknown)}")
    return system, weight, options


def load_system(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as e:
        raise SystemFileError(f"cannot read {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        err = SystemFileError(f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}")
        err.offset = e.pos
        raise err from None
    return system_from_json(data)


# -- results ----------------------------------------------------------------------


def result_to_json(result: SolveResult) -> dict:
    data = result.to_json()
    data["version"] = __version__
    # wall-clock data lives apart so the rest is reproducible byte for byte
    data["run_info"] = {"timings": {k: round(v, 6) for k, v in result.timings.items()}}
    return data


def _dump(data: dict) -> str:
    return json.dumps(data, indent=2, sort_keys=True)


def format_summary(result: SolveResult) -> str:
    sols = result.solutions
    singular = [p for p in sols.paths if p.status == "singular"]
    sing_real = sum(1 for p in singular if np.max(np.abs(p.endpoint.imag)) < 1e-8)
    nonsing = result.n_solutions - len(result.base_points)
    real = sols.real_count
    lines = [
        f"  # paths tracked:                  {result.paths_tracked}",
        f"  # non-singular solutions (real):  {nonsing} ({real - sum(1 for x in result.base_points if np.max(np.abs(x.imag)) < 1e-8)})",
        f"  # singular endpoints (real):      {len(singular)} ({sing_real})",
    ]
    if result.base_points:
        lines.append(f"  # base locus points:              {len(result.base_points)}")
    lines.append(f"  # total solutions (real):         {result.n_solutions} ({real})")
    return "\n".join(lines)


def _format_point(x) -> str:
    return "[" + ", ".join(f"{z.real:.12g}{z.imag:+.12g}i" for z in x) + "]"


def verify_result(system: ParameterizedSystem, result: dict, tol: float = 1e-6) -> list[float]:
    """Residuals of the stored solutions; raises if any exceeds ``tol``."""
    residuals = []
    for k, sol in enumerate(result.get("solutions", [])):
        x = np.array([complex(re, im) for re, im in sol["point"]])
        if x.shape != (system.family.n,):
            raise SystemFileError(f"solution {k + 1} has the wrong length")
        residuals.append(system.residual(x))
    bad = [k for k, r in enumerate(residuals) if not r <= tol]
    if bad:
        raise SystemFileError(f"{len(bad)} solution(s) exceed residual {tol:g}: indices {[k + 1 for k in bad]}")
    return residuals


# -- subcommands ----------------------------------------------------------------


def _parse_weight(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.replace(" ", "").strip("()[]").split(","))
    except ValueError:
        raise SystemFileError(f"cannot read weight {text!r}; expected integers separated by commas") from None


def _tracker(args) -> TrackerConfig:
    threads = args.threads
    if threads is None:
        threads = int(os.environ.get(THREADS_ENV, "1") or 1)
    return TrackerConfig(threads=max(1, threads))


def _weight_arg(args, file_weight):
    w = _parse_weight(args.weight) if args.weight else file_weight
    if w is not None and args.negate_weight:
        w = tuple(-v for v in w)
    return w


def cmd_solve(args, out) -> int:
    system, file_weight, options = load_system(args.system)
    opts = {k: options[k] for k in OPTION_KEYS if k in options}
    if args.no_degree_check:
        opts["degree_check"] = False
    for flag, key in (("base_locus", "get_base_locus"), ("vary_linear_part", "vary_linear_part"),
                      ("one_step", "one_step"), ("force", "force")):
        if getattr(args, flag):
            opts[key] = True
    if args.seed is not None:
        opts["seed"] = args.seed
    weight = _weight_arg(args, options.get("weight", file_weight))
    result = solve(system, SolveOptions(weight=weight, tracker=_tracker(args), **opts))
    data = result_to_json(result)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(_dump(data) + "\n")
    if args.format == "json":
        out.write(_dump(data) + "\n")
    else:
        for msg in result.warnings:
            out.write(f"Warning: {msg}\n")
        out.write(f"weight: {list(result.weight)}  method: {result.method}  seed: {result.seed}\n")
        out.write(format_summary(result) + "\n")
        if result.degree_report:
            d = result.degree_report
            out.write(f"degrees: deg_phi={d.deg_phi} deg_phi0={d.deg_phi0}\n")
        for x, r in zip(result.points, result.residuals):
            out.write(f"  {_format_point(x)}  residual {r:.2e}\n")
        out.write(f"SAGBI homotopy completed with {result.n_solutions} solutions.\n")
    return EXIT_WARNINGS if result.warnings else EXIT_OK


def cmd_detect(args, out) -> int:
    system, _, _ = load_system(args.system)
    found = detect_weight(system.family, budget=args.budget)
    if isinstance(found, NotFound):
        out.write(json.dumps({"weight": None, "explored": found.explored,
                              "budget_exhausted": found.budget_exhausted}) + "\n"
                  if args.format == "json" else "no SAGBI weight found\n")
        return EXIT_ERROR
    w = tuple(-v for v in found) if args.negate_weight else found
    cert = sagbi_check(system.family, found)
    if args.format == "json":
        out.write(_dump({"weight": list(w), "certificate": cert.to_json()}) + "\n")
    else:
        out.write(f"weight: {list(w)}\nrelations checked: {cert.relations_checked}\n")
    return EXIT_OK


def cmd_degree(args, out) -> int:
    system, file_weight, options = load_system(args.system)
    w = _weight_arg(args, options.get("weight", file_weight))
    if w is None:
        found = detect_weight(system.family)
        if isinstance(found, NotFound):
            raise WeightNotFound("no SAGBI weight found")
        w = found
    seed = args.seed if args.seed is not None else options.get("seed", 0)
    d0 = compute_degree_monomial_map(system.family, w)
    d = compute_degree_map(system.family, seed=seed, cfg=_tracker(args))
    d0_out = None if d0 == float("inf") else d0
    if args.format == "json":
        out.write(json.dumps({"deg_phi": d, "deg_phi0": d0_out, "weight": list(w)}) + "\n")
    else:
        out.write(f"deg_phi={d} deg_phi0={d0_out if d0_out is not None else 'inf'}\n")
    return EXIT_WARNINGS if d0 < d else EXIT_OK


def cmd_mixed_volume(args, out) -> int:
    try:
        with open(args.supports, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as e:
        raise SystemFileError(f"cannot read {args.supports}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise SystemFileError(f"{args.supports}: invalid JSON at line {e.lineno}: {e.msg}") from None
    if not isinstance(data, list):
        raise SystemFileError("supports file must hold a list of {points, multiplicity}")
    supports = []
    for k, item in enumerate(data):
        if not isinstance(item, dict) or "points" not in item:
            raise SystemFileError(f"support {k + 1}: expected an object with 'points'")
        supports.append(Support([tuple(p) for p in item["points"]], int(item.get("multiplicity", 1))))
    mv = mixed_volume(supports, seed=args.seed or 0)
    out.write((json.dumps({"mixed_volume": mv}) if args.format == "json" else str(mv)) + "\n")
    return EXIT_OK


def cmd_gen(args, out) -> int:
    seed = args.seed or 0
    if args.family == "grassmannian":
        k, m = args.params
        fam, w = grassmannian_family(k, m)
        sys_ = random_slice(fam, [fam.n], args.coeff_kind, seed)
        data = system_to_json(sys_, w)
    elif args.family == "resonator":
        N, n = args.params
        data = system_to_json(resonator_family(random_resonator(N, n, seed)))
    elif args.family == "special36":
        sys_, w = grassmannian_special_system()
        data = system_to_json(sys_, w, {"vary_linear_part": True})
    else:
        name = args.family
        data = system_to_json(example_system(name, seed))
    text = _dump(data) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)
    return EXIT_OK


def bench_cases(seed: int = 0):
    """``(label, expected count, system, options)`` rows of the benchmark table."""
    cases = []
    for name, expected in (("ex41", 8), ("ex42", 6), ("ex43", 2)):
        cases.append((name, expected, example_system(name, seed), {}))
    cases.append(("ex43 + base locus", 4, example_system("ex43", seed), {"get_base_locus": True}))
    for k, m, expected in ((2, 4, 2), (2, 5, 5), (2, 6, 14), (3, 6, 42)):
        fam, w = grassmannian_family(k, m)
        cases.append((f"Gr({k},{m})", expected, random_slice(fam, [fam.n], "complex_gaussian", seed),
                      {"weight": w, "degree_check": False}))
    sys_, w = grassmannian_special_system()
    cases.append(("Gr(3,6) special", 12, sys_, {"weight": w, "degree_check": False, "vary_linear_part": True}))
    for N, expected in ((1, 5), (2, 25)):
        cases.append((f"resonators N={N}", expected, resonator_family(random_resonator(N, 2, seed)),
                      {"degree_check": False}))
    return cases


def cmd_bench(args, out) -> int:
    cfg = _tracker(args)
    seed = args.seed or 0
    failed = 0
    rows = []
    for label, expected, system, extra in bench_cases(seed):
        t0 = time.perf_counter()
        try:
            res = solve(system, SolveOptions(seed=seed, tracker=cfg, **extra))
            got = res.n_solutions
        except Exception as e:  # a crashing case is a failing row, not a crashed table
            got = f"error: {e}"
        dt = time.perf_counter() - t0
        ok = got == expected
        failed += not ok
        rows.append({"case": label, "expected": expected, "observed": got, "seconds": round(dt, 3),
                     "status": "PASS" if ok else "FAIL"})
    if args.format == "json":
        out.write(_dump({"rows": rows, "failed": failed}) + "\n")
    else:
        out.write(f"{'case':<20} {'expected':>8} {'observed':>8} {'time [s]':>9}  status\n")
        for r in rows:
            out.write(f"{r['case']:<20} {r['expected']:>8} {str(r['observed']):>8} {r['seconds']:>9.2f}  {r['status']}\n")
    return EXIT_ERROR if failed else EXIT_OK


def cmd_verify(args, out) -> int:
    system, _, _ = load_system(args.system)
    try:
        with open(args.result, encoding="utf-8") as fh:
            result = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise SystemFileError(f"cannot read result file {args.result}: {e}") from None
    residuals = verify_result(system, result, args.tol)
    worst = max(residuals, default=0.0)
    if args.format == "json":
        out.write(json.dumps({"solutions": len(residuals), "max_residual": worst}) + "\n")
    else:
        out.write(f"{len(residuals)} solutions verified, max residual {worst:.2e}\n")
    return EXIT_OK


# -- argument parsing -----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sagbihc", description="SAGBI homotopy continuation solver")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--threads", type=int, default=None,
                        help=f"worker threads for path tracking (default: ${THREADS_ENV} or 1)")
    common.add_argument("--seed", type=int, default=None)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common], help="solve a system file")
    s.add_argument("system")
    s.add_argument("--weight", help="comma-separated integer weight")
    s.add_argument("--negate-weight", action="store_true", help="negate the weight (min-convention input)")
    s.add_argument("--no-degree-check", action="store_true")
    s.add_argument("--base-locus", action="store_true", help="add isolated torus points of the base locus")
    s.add_argument("--vary-linear-part", action="store_true")
    s.add_argument("--one-step", action="store_true", help="single polyhedral SAGBI homotopy")
    s.add_argument("--force", action="store_true", help="proceed even if the weight fails the SAGBI check")
    s.add_argument("--output", "-o", help="also write the result file here")
    s.set_defaults(func=cmd_solve)

    d = sub.add_parser("detect-weight", parents=[common], help="search for a SAGBI weight")
    d.add_argument("system")
    d.add_argument("--budget", type=int, default=100_000)
    d.add_argument("--negate-weight", action="store_true")
    d.set_defaults(func=cmd_detect)

    g = sub.add_parser("degree", parents=[common], help="degrees of the parameterization and its monomial map")
    g.add_argument("system")
    g.add_argument("--weight")
    g.add_argument("--negate-weight", action="store_true")
    g.set_defaults(func=cmd_degree)

    mv = sub.add_parser("mixed-volume", parents=[common], help="mixed volume of a supports file")
    mv.add_argument("supports")
    mv.set_defaults(func=cmd_mixed_volume)

    gen = sub.add_parser("gen", parents=[common], help="write a system file")
    gen.add_argument("family", choices=["grassmannian", "resonator", "special36", *EXAMPLES])
    gen.add_argument("params", nargs="*", type=int, help="k m for grassmannian, N n for resonator")
    gen.add_argument("--coeff-kind", choices=("complex_gaussian", "int_range"), default="complex_gaussian")
    gen.add_argument("--output", "-o")
    gen.set_defaults(func=cmd_gen)

    b = sub.add_parser("bench", parents=[common], help="run the example suite and compare counts")
    b.set_defaults(func=cmd_bench)

    v = sub.add_parser("verify", parents=[common], help="re-check a result file against its system")
    v.add_argument("system")
    v.add_argument("result")
    v.add_argument("--tol", type=float, default=1e-6)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "gen":
        need = {"grassmannian": 2, "resonator": 2}.get(args.family, 0)
        if len(args.params) != need:
            parser.error(f"gen {args.family} takes {need} integer parameter(s)")
    try:
        return args.func(args, out)
    except (SystemFileError, ParseError) as e:
        offset = getattr(e, "offset", None)
        where = f" (offset {offset})" if offset is not None and "offset" not in str(e) else ""
        sys.stderr.write(f"error: {e}{where}\n")
    except (WeightNotFound, UnverifiedWeight, DegreeUndetermined, DegenerateLifting, TieError, ValueError) as e:
        sys.stderr.write(f"error: {e}\n")
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

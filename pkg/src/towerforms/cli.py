"""Command-line front end.

Subcommands:
  verify    run property suites, write JSON reports and a CSV summary
  converge  restricted-energy table for an input element
  evolve    semigroup trajectory of an input element on a time grid
  choi      Choi-matrix positivity certificate for a generator's semigroup

Exit status is nonzero whenever a suite reports a failure or a requested
certificate does not hold.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .harness import (
    CONVERGE_COLUMNS,
    EVOLVE_COLUMNS,
    RunConfig,
    SUITE_NAMES,
    converge_table,
    evolve_table,
    run_suite,
    write_table_csv,
)
from .superop import (
    DiagonalComplement,
    DoubleCommutatorFamily,
    SemigroupMap,
    TransposeMap,
    choi_matrix,
    choi_min_eigenvalue,
    square_matrix_to_json,
)
from .tower import element_from_json, load_element


def _parse_time_grid(text: str) -> tuple:
    """Either 'start:step:stop' (inclusive stop, up to rounding) or a
    comma-separated list of times."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(
                f"time grid {text!r} must be start:step:stop or a comma list"
            )
        try:
            start, step, stop = (float(p) for p in parts)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"bad time grid {text!r}") from exc
        if step <= 0:
            raise argparse.ArgumentTypeError("time grid step must be positive")
        grid = []
        t = start
        while t <= stop + 1e-12:
            grid.append(round(t, 12))
            t = start + (len(grid)) * step
        return tuple(grid)
    try:
        return tuple(float(p) for p in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad time grid {text!r}") from exc


def _load_lindblad(path: str) -> DoubleCommutatorFamily:
    """Lindblad data file: {"ms": [matrix JSON, ...], "h": matrix JSON or null}."""
    obj = json.loads(Path(path).read_text())
    if not isinstance(obj, dict) or "ms" not in obj:
        raise ValueError(f"{path}: expected an object with an 'ms' list")
    ms = [element_from_json(m) for m in obj["ms"]]
    h = obj.get("h")
    return DoubleCommutatorFamily(ms, None if h is None else element_from_json(h))


def _make_generator(spec: str, level: int):
    if spec == "diagonal":
        return DiagonalComplement(2 ** level)
    if spec == "transpose":
        return TransposeMap(2 ** level)
    if spec.startswith("lindblad:"):
        gen = _load_lindblad(spec.split(":", 1)[1])
        if gen.dim != 2 ** level:
            raise ValueError(
                f"lindblad data has dimension {gen.dim}, --level {level} "
                f"needs {2 ** level}"
            )
        return gen
    raise ValueError(
        f"unknown generator {spec!r}; use diagonal, transpose or lindblad:file.json"
    )


def _cmd_verify(args) -> int:
    suites = tuple(s.strip() for s in args.suite.split(",") if s.strip())
    cfg = RunConfig(
        level=args.level,
        suites=suites,
        samples=args.samples,
        seed=args.seed,
        tol=args.tol,
        eig_tol=args.eig_tol,
        out_dir=args.out_dir,
    )
    reports = run_suite(cfg)
    for rep in reports:
        print(rep.summary_line())
    total_failures = sum(r.failures for r in reports)
    print(
        f"{len(reports)} reports, {total_failures} failures"
        + (f" -> {args.out_dir}" if args.out_dir else "")
    )
    return 1 if total_failures else 0


def _cmd_converge(args) -> int:
    a = load_element(args.input)
    cfg = RunConfig(level=args.level, suites=("convergence",))
    rows = converge_table(cfg, a)
    write_table_csv(args.out, CONVERGE_COLUMNS, rows)
    print(f"wrote {len(rows)} rows -> {args.out}")
    return 0


def _cmd_evolve(args) -> int:
    a = load_element(args.input)
    rows = evolve_table(a, args.t_grid)
    write_table_csv(args.out, EVOLVE_COLUMNS, rows)
    print(f"wrote {len(rows)} rows -> {args.out}")
    return 0


def _cmd_choi(args) -> int:
    gen = _make_generator(args.generator, args.level)
    if args.generator == "transpose":
        # the injected non-CP control is certified directly, not exponentiated
        target = gen
        label = "transpose map"
    else:
        target = SemigroupMap(gen, args.t)
        label = f"semigroup at t={args.t}"
    min_eig = choi_min_eigenvalue(target)
    psd = min_eig >= -args.tol
    print(
        f"choi: level={args.level} {label}: min eigenvalue {min_eig:.6e} "
        f"-> {'completely positive' if psd else 'NOT completely positive'}"
    )
    if args.out:
        Path(args.out).write_text(
            json.dumps(square_matrix_to_json(choi_matrix(target)), sort_keys=True)
            + "\n"
        )
        print(f"wrote Choi matrix -> {args.out}")
    return 0 if psd else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="towerforms",
        description="Dirichlet-form laboratory on the 2^n matrix tower",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run property suites")
    p.add_argument(
        "--suite",
        default="all",
        help=f"suite name, comma list, or 'all'; names: {', '.join(SUITE_NAMES)}",
    )
    p.add_argument("--level", type=int, default=4, help="working level N")
    p.add_argument("--samples", type=int, default=200, help="samples per suite/level")
    p.add_argument("--seed", type=int, default=7, help="base RNG seed")
    p.add_argument("--tol", type=float, default=1e-10, help="suite tolerance")
    p.add_argument(
        "--eig-tol", type=float, default=1e-12, help="exactness/PSD tolerance"
    )
    p.add_argument(
        "--out-dir", default=None, help="directory for JSON reports + summary.csv"
    )
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("converge", help="restricted-energy table")
    p.add_argument("--level", type=int, required=True, help="working level N")
    p.add_argument("--input", required=True, help="matrix JSON file at level N")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=_cmd_converge)

    p = sub.add_parser("evolve", help="semigroup trajectory")
    p.add_argument(
        "--t-grid",
        type=_parse_time_grid,
        required=True,
        help="time grid start:step:stop (inclusive) or comma list",
    )
    p.add_argument("--input", required=True, help="matrix JSON file")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=_cmd_evolve)

    p = sub.add_parser("choi", help="complete-positivity certificate")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--t", type=float, default=1.0, help="semigroup time")
    p.add_argument(
        "--generator",
        default="diagonal",
        help="diagonal | lindblad:file.json | transpose (negative control)",
    )
    p.add_argument("--tol", type=float, default=1e-10, help="PSD tolerance")
    p.add_argument("--out", default=None, help="optional Choi matrix JSON output")
    p.set_defaults(func=_cmd_choi)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

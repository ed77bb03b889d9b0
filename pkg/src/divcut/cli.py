"""Command-line entry point: solve, oracle, check, gen and stats.

Exit codes: 0 success, 1 file I/O, 2 parse or validation error, 3 internal
error, 4 infeasible plan, 5 oracle size or time limit exceeded.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from .heuristic import solve_heuristic, warm_up
from .instance_io import (
    InvalidRange,
    ParseError,
    gen_instance,
    parse_instance,
    parse_plan,
    write_instance,
    write_plan,
)
from .model import (
    Instance,
    InstanceError,
    Params,
    PlanStats,
    check_plan_feasibility,
    compute_stats,
    plan_cost,
)
from .oracle import LimitExceeded, exact_solve_divisible

EXIT_OK = 0
EXIT_IO = 1
EXIT_INVALID = 2
EXIT_INTERNAL = 3
EXIT_INFEASIBLE = 4
EXIT_LIMIT = 5

REPORT_HEADER = "n\tdemands\tdemand_length\tstocks\ttrim\tpercentage\twelds\tleftovers\tseconds"


class _Fail(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _beta(text: str):
    if text.strip().lower() in ("inf", "+inf", "infinity"):
        return math.inf
    return int(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="divcut", description="Cutting stock with divisible items.")
    parser.add_argument("command", choices=["solve", "oracle", "check", "gen", "stats"])
    parser.add_argument("--instance", nargs="+", help="instance file(s)")
    parser.add_argument("--plan", help="plan file")
    parser.add_argument("--beta", type=_beta, default=1000, help="shortest usable leftover (or 'inf')")
    parser.add_argument("--theta", type=int, default=1000, help="shortest piece of a divided item")
    parser.add_argument("--gamma", type=Fraction, default=Fraction(1), help="cost per mm of trim")
    parser.add_argument("--delta", type=Fraction, default=Fraction(500), help="cost per weld")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--n", type=int, default=8, help="number of item types to generate")
    parser.add_argument("--wmin", type=int, default=1000)
    parser.add_argument("--wmax", type=int, default=6000)
    parser.add_argument("--vmin", type=int, default=1)
    parser.add_argument("--vmax", type=int, default=20)
    parser.add_argument("--jobs", type=int, default=1, help="solve several instances in parallel")
    parser.add_argument("--out", help="output file or, for several instances, directory")
    return parser


def report_row(instance: Instance, stats: PlanStats) -> str:
    counts: dict[int, int] = {}
    for length in stats.usable_leftovers:
        counts[length] = counts.get(length, 0) + 1
    leftovers = " ".join(f"{length}*{n}" for length, n in sorted(counts.items())) or "-"
    return "\t".join(str(x) for x in (
        len(instance.items),
        instance.total_units,
        instance.total_length,
        stats.stocks_used,
        stats.total_trim_loss,
        f"{stats.trim_percentage:.4f}",
        stats.weld_count,
        leftovers,
        f"{stats.elapsed:.3f}",
    ))


def _read(path: Optional[str], what: str) -> str:
    if not path:
        raise _Fail(EXIT_INVALID, f"missing --{what}")
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot read {what} {path}: {exc.strerror or exc}")


def _load_instance(path: Optional[str]) -> Instance:
    text = _read(path, "instance")
    try:
        return parse_instance(text)
    except ParseError as exc:
        raise _Fail(EXIT_INVALID, f"{path}: {exc}")
    except InstanceError as exc:
        raise _Fail(EXIT_INVALID, f"{path}: " + "; ".join(msg for _, msg in exc.problems))


def _params(args) -> Params:
    try:
        return Params(beta=args.beta, theta=args.theta, gamma=args.gamma, delta=args.delta)
    except ValueError as exc:
        raise _Fail(EXIT_INVALID, str(exc))


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise _Fail(EXIT_IO, f"cannot write {out}: {exc.strerror or exc}")


def _solve_one(path: str, params: Params):
    instance = _load_instance(path)
    warm_up()
    start = time.perf_counter()
    plan = solve_heuristic(instance, params)
    stats = compute_stats(plan, time.perf_counter() - start)
    return instance, plan, stats


def _solve_job(path: str, params: Params):
    try:
        return _solve_one(path, params), None
    except _Fail as exc:
        return None, (exc.code, str(exc))


def cmd_solve(args) -> int:
    params = _params(args)
    paths = args.instance or []
    if not paths:
        raise _Fail(EXIT_INVALID, "missing --instance")
    if len(paths) == 1:
        instance, plan, stats = _solve_one(paths[0], params)
        _emit(write_plan(plan, stats), args.out)
        print(REPORT_HEADER)
        print(report_row(instance, stats))
        return EXIT_OK

    # several instances: one plan file each, named after the instance
    outdir = Path(args.out) if args.out else None
    if outdir is not None:
        outdir.mkdir(parents=True, exist_ok=True)
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_solve_job, paths, [params] * len(paths)))
    else:
        results = [_solve_job(p, params) for p in paths]
    code = EXIT_OK
    print("file\t" + REPORT_HEADER)
    for path, (done, err) in zip(paths, results):
        if err is not None:
            print(err[1], file=sys.stderr)
            code = max(code, err[0])
            continue
        instance, plan, stats = done
        if outdir is not None:
            _emit(write_plan(plan, stats), str(outdir / (Path(path).stem + ".plan")))
        print(f"{path}\t{report_row(instance, stats)}")
    return code


def cmd_oracle(args) -> int:
    params = _params(args)
    instance = _load_instance((args.instance or [None])[0])
    start = time.perf_counter()
    try:
        plan = exact_solve_divisible(instance, params)
    except LimitExceeded as exc:
        print(f"oracle refused: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    stats = compute_stats(plan, time.perf_counter() - start)
    _emit(write_plan(plan, stats), args.out)
    print(f"cost={plan_cost(plan)} welds={stats.weld_count} trim={stats.total_trim_loss}")
    return EXIT_OK


def cmd_check(args) -> int:
    params = _params(args)
    instance = _load_instance((args.instance or [None])[0])
    text = _read(args.plan, "plan")
    try:
        plan = parse_plan(text, instance, params)
    except ParseError as exc:
        raise _Fail(EXIT_INVALID, f"{args.plan}: {exc}")
    problems = check_plan_feasibility(plan)
    if problems:
        for v in problems:
            print(str(v))
        return EXIT_INFEASIBLE
    stats = compute_stats(plan)
    print(f"feasible: stocks={stats.stocks_used} trim={stats.total_trim_loss} welds={stats.weld_count}")
    return EXIT_OK


def cmd_gen(args) -> int:
    try:
        instance = gen_instance(args.seed, args.n, 12000, (args.wmin, args.wmax), (args.vmin, args.vmax))
    except InvalidRange as exc:
        raise _Fail(EXIT_INVALID, str(exc))
    _emit(write_instance(instance), args.out)
    return EXIT_OK


def cmd_stats(args) -> int:
    params = _params(args)
    instance = _load_instance((args.instance or [None])[0])
    if args.plan:
        try:
            plan = parse_plan(_read(args.plan, "plan"), instance, params)
        except ParseError as exc:
            raise _Fail(EXIT_INVALID, f"{args.plan}: {exc}")
        stats = compute_stats(plan)
    else:
        _, _, stats = _solve_one(args.instance[0], params)
    print(REPORT_HEADER)
    print(report_row(instance, stats))
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "oracle": cmd_oracle,
    "check": cmd_check,
    "gen": cmd_gen,
    "stats": cmd_stats,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        return COMMANDS[args.command](args)
    except _Fail as exc:
        print(str(exc), file=sys.stderr)
        return exc.code
    except Exception as exc:  # noqa: BLE001 - anything else is our bug
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

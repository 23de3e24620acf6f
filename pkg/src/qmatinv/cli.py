"""Command-line front end.

Exit codes: 0 success, 1 solver failure, 2 usage error, 3 verification failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Sequence

import numpy as np

from . import analysis
from .classical import NoGridSolution, classical_solve
from .core import (
    EnumerationTooLarge,
    GenerationError,
    Instance,
    Mode,
    brute_force_solutions,
    generate_instance,
    load_instance,
    residual,
    save_instance,
)
from .search import SearchMode, StagePolicy, TSource, dimred_solve, naive_solve
from .statevector import Predicate, grover_iterate, init_uniform, success_probability

EXIT_OK, EXIT_SOLVER, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _add_generation_args(p: argparse.ArgumentParser, required: bool) -> None:
    p.add_argument("--n", type=int, required=required, help="number of unknowns")
    p.add_argument("--M", type=int, required=required, help="grid points per dimension (power of two)")
    p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.MODULAR.value)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qmatinv", description="Grid linear-system solving by simulated amplitude amplification.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a planted instance as JSON")
    _add_generation_args(gen, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", help="output path (default: stdout)")

    solve = sub.add_parser("solve", help="solve an instance")
    solve.add_argument("--in", dest="path", help="instance JSON")
    _add_generation_args(solve, required=False)
    solve.add_argument("--instance-seed", type=int, default=0, help="generation seed when no --in is given")
    solve.add_argument("--algo", choices=["naive", "dimred", "classical"], default="dimred")
    solve.add_argument("--policy", choices=[m.value for m in SearchMode], default=SearchMode.KNOWN_T.value)
    solve.add_argument("--t-source", choices=[m.value for m in TSource], default=TSource.MODEL.value)
    solve.add_argument("--retries", type=int, default=10, help="extra attempts per stage")
    solve.add_argument("--growth", type=float, default=6 / 5, help="BBHT growth factor")
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--format", choices=["table", "json"], default="table")
    solve.add_argument("--trace", help="write the register-ledger trace as JSON lines to this path")
    solve.add_argument("--dump-state", help="write the final amplitudes as JSON to this path")

    sweep = sub.add_parser("sweep", help="CSV of cost models, bounds and empirical success rates")
    sweep.add_argument("--M", type=int, nargs="+", default=[4, 8, 16])
    sweep.add_argument("--n-max", type=int, default=3)
    sweep.add_argument("--runs", type=int, default=0, help="Monte Carlo runs per point (0 skips, else >= 100)")
    sweep.add_argument("--max-grid", type=int, default=4096, help="largest M**n simulated")
    sweep.add_argument("--seed", type=int, default=0)

    an = sub.add_parser("analyze", help="cost, crossover and success-bound tables")
    an.add_argument("--M", type=int, default=analysis.TYPICAL_M)
    an.add_argument("--n", type=int, nargs="*", help="problem sizes to tabulate")
    an.add_argument("--format", choices=["table", "json", "csv"], default="table")

    ver = sub.add_parser("verify", help="run the lemma and invariant suites")
    ver.add_argument("--samples", type=int, default=10_000, help="random samples for the second lemma")
    ver.add_argument("--instances", type=int, default=20)
    ver.add_argument("--seed", type=int, default=0)
    return parser


def _cmd_generate(args) -> int:
    system, solution = generate_instance(args.n, args.M, args.mode, args.seed)
    instance = Instance(system, args.seed, solution)
    if args.out:
        save_instance(args.out, instance)
    else:
        print(json.dumps(instance.to_dict()))
    return EXIT_OK


def _load_or_generate(args) -> Instance:
    if args.path:
        try:
            return load_instance(args.path)
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise UsageError(f"cannot read instance {args.path}: {exc}") from exc
    if args.n is None or args.M is None:
        raise UsageError("solve needs --in PATH or both --n and --M")
    system, solution = generate_instance(args.n, args.M, args.mode, args.instance_seed)
    return Instance(system, args.instance_seed, solution)


def _cmd_solve(args) -> int:
    instance = _load_or_generate(args)
    system = instance.system
    out: dict = {"seed": args.seed, "algorithm": args.algo, "n": system.n, "M": system.M, "mode": system.mode.value}
    stats = None
    if args.algo == "classical":
        try:
            result = classical_solve(system)
        except NoGridSolution as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_SOLVER
        point, out["elimination_steps"] = result.solution, result.steps
    else:
        rng = np.random.default_rng(args.seed)
        if args.algo == "naive":
            point, stats = naive_solve(system, rng, max_retries=args.retries)
        else:
            policy = StagePolicy(args.policy, args.retries, args.growth, args.seed, args.t_source)
            point, stats = dimred_solve(system, policy, rng)
        out["stats"] = stats.to_dict()
        if args.trace and stats.ledger is not None:
            with open(args.trace, "w", encoding="utf-8") as fh:
                stats.ledger.write_trace(fh)
        if args.dump_state and stats.final_state is not None:
            with open(args.dump_state, "w", encoding="utf-8") as fh:
                json.dump(stats.final_state.dump(), fh)
    out["solution"] = list(point) if point is not None else None
    out["residual"] = list(residual(system, point)) if point is not None else None
    out["verified"] = point is not None and not any(out["residual"])
    if args.format == "json":
        print(json.dumps(out, sort_keys=True))
    else:
        _print_solve_table(out, stats)
    return EXIT_OK if out["verified"] else EXIT_SOLVER


def _print_solve_table(out: dict, stats) -> None:
    print(f"seed        {out['seed']}")
    print(f"algorithm   {out['algorithm']}")
    print(f"system      n={out['n']} M={out['M']} mode={out['mode']}")
    solution = " ".join(map(str, out["solution"])) if out["solution"] is not None else "-"
    print(f"solution    {solution}")
    print(f"residual    {' '.join(map(str, out['residual'])) if out['residual'] is not None else '-'}")
    print(f"verified    {str(out['verified']).lower()}")
    if "elimination_steps" in out:
        print(f"elim steps  {out['elimination_steps']}")
    if stats is None:
        return
    print(f"iterations  {stats.total_iterations} (scheduled {stats.scheduled_iterations})")
    print(f"oracle      {stats.total_oracle_calls} calls, {stats.retries} retries")
    print(f"{'stage':>5} {'N':>8} {'t':>8} {'k':>4} {'tries':>5} {'flag':>5} {'p_success':>10} {'p_fail_model':>12}")
    for s in stats.stages:
        print(
            f"{s.stage:>5} {s.N:>8} {s.t:>8} {s.iterations:>4} {s.attempts:>5} {str(s.flag).lower():>5}"
            f" {s.success_probability:>10.6f} {s.model_failure:>12.6g}"
        )


def _cmd_sweep(args) -> int:
    if args.runs and args.runs < 100:
        raise UsageError("--runs must be 0 or at least 100")
    rows = []
    for M in args.M:
        for n in range(1, args.n_max + 1):
            bound = analysis.success_lower_bound(n, M).bound if n < M else None
            rate = None
            if args.runs and M**n <= args.max_grid:
                system, _ = generate_instance(n, M, Mode.MODULAR, args.seed)
                rate = analysis.monte_carlo_success(system, args.runs, rng=np.random.default_rng(args.seed)).rate
            rows.append(
                {
                    "n": n,
                    "M": M,
                    "quantum_steps": analysis.quantum_cost(n, M),
                    "classical_steps": analysis.classical_cost(n),
                    "bound": f"{bound:.12g}" if bound is not None else None,
                    "empirical_rate": f"{rate:.6f}" if rate is not None else None,
                }
            )
    analysis.write_sweep(rows, sys.stdout)
    return EXIT_OK


def _cmd_analyze(args) -> int:
    M = args.M
    k = analysis.stage_iterations(M)
    cross = analysis.crossover(M)
    sizes = args.n or sorted({1, 10, 100, max(1, cross - 1), cross, 1000, 10_000})
    costs = [analysis.CostModel.evaluate(n, M) for n in sizes]
    bound_n = [n for n in (1, 2**10, 2**20, M // 16) if 1 <= n < M]
    bounds = {n: analysis.success_lower_bound(n, M) for n in sorted(set(bound_n))}
    if args.format == "json":
        print(json.dumps({
            "M": M,
            "stage_iterations": k,
            "crossover": cross,
            "reference_crossover": analysis.PAPER_CROSSOVER,
            "costs": [{"n": c.n, "quantum_steps": c.quantum_steps, "classical_steps": c.classical_steps} for c in costs],
            "bounds": [{"n": n, "bound": b.bound, "model": b.model} for n, b in bounds.items()],
        }, sort_keys=True))
        return EXIT_OK
    if args.format == "csv":
        print("n,M,quantum_steps,classical_steps")
        for c in costs:
            print(f"{c.n},{M},{c.quantum_steps},{c.classical_steps}")
        return EXIT_OK
    print(f"M                   {M}")
    print(f"stage iterations    {k}   (floor(pi/4 * sqrt(M)))")
    print(f"quantum cost        2n({k} + n)")
    print(f"crossover n         {cross}   (reference figure {analysis.PAPER_CROSSOVER})")
    print()
    print(f"{'n':>8} {'quantum':>16} {'classical':>16} {'faster':>9}")
    for c in costs:
        faster = "quantum" if c.quantum_steps < c.classical_steps else "classical"
        print(f"{c.n:>8} {c.quantum_steps:>16} {c.classical_steps:>16} {faster:>9}")
    print()
    print(f"{'n':>12} {'lower bound':>14} {'(1-1/M)^n':>14}")
    for n, b in bounds.items():
        print(f"{n:>12} {b.bound:>14.10f} {b.model:>14.10f}")
    return EXIT_OK


def _verify_checks(args):
    yield "lemma1 exhaustive n<=60", all(analysis.lemma1_check(n, k) for n in range(1, 61) for k in range(1, n + 1))

    rng = np.random.default_rng(args.seed)
    ns = rng.integers(1, 4097, size=args.samples)
    ok = True
    for n in ns:
        p = float(rng.uniform(0, 1 / n))
        if p > 0 and n * p < 1:
            ok &= analysis.lemma2_check(p, int(n)).holds
    yield f"lemma2 on {args.samples} random samples", ok

    yield "cost constant floor(pi/4*2^16) = 51471", analysis.stage_iterations(2**32) == 51471
    yield "crossover(2^32) in [320, 323]", 320 <= analysis.crossover(2**32) <= 323
    yield "success bound at n=2^28, M=2^32 >= 0.93", analysis.success_lower_bound(2**28, 2**32).bound >= 0.93

    ok = True
    for N in (4, 16, 64, 256):
        for t in (1, 2, 4, 8):
            if t >= N:
                continue
            state = init_uniform(1, N)
            pred = Predicate.marking(range(t), N)
            k = math.floor(math.pi / 4 * math.sqrt(N / t))
            p = success_probability(grover_iterate(state, pred, state, k), pred)
            ok &= abs(p - math.sin((2 * k + 1) * math.asin(math.sqrt(t / N))) ** 2) < 1e-9
    yield "grover success matches sin^2((2k+1)theta)", ok

    ok = True
    for i in range(args.instances):
        n, M = 1 + i % 3, (4, 8)[i % 2]
        system, x = generate_instance(n, M, Mode.MODULAR, args.seed + i)
        counts = [len(brute_force_solutions(system, k)) for k in range(n + 1)]
        ok &= counts == [M ** (n - k) for k in range(n + 1)]
        point, _ = dimred_solve(system, StagePolicy(max_retries=50), np.random.default_rng(args.seed + i))
        ok &= point == x
    yield f"stage counts and dimred solutions on {args.instances} instances", ok


def _cmd_verify(args) -> int:
    failed = 0
    for name, ok in _verify_checks(args):
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
        failed += not ok
    return EXIT_VERIFY if failed else EXIT_OK


COMMANDS = {
    "generate": _cmd_generate,
    "solve": _cmd_solve,
    "sweep": _cmd_sweep,
    "analyze": _cmd_analyze,
    "verify": _cmd_verify,
}


def run_cli(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except (UsageError, EnumerationTooLarge, GenerationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()

"""Command-line front end: gen, lp, solve, verify, bench.

Thin wrappers over the library; consumers are scripts and CI, so every
command is non-interactive and exits with a stable code:

    0  success (for verify: the plan is feasible)
    1  verification failure, or a pipeline's own output failed its
       internal re-verification
    2  bad usage: unknown flags, unreadable or malformed files, invalid
       parameter combinations, invalid instances
    3  the exact solver's node budget was exceeded (FTFP_NODE_BUDGET,
       default 10^7)

Summary lines are key=value pairs on stdout; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .decompose import decompose_large, decompose_reduce
from .ftfl_solvers import BudgetExceededError, IntegralSolution, solution_cost, subroutine
from .instance import GenParams, Instance, ParseError, generate, parse_instance, serialize_instance, validate
from .lp_core import build_lp, solve_lp, trim_to_demand
from .pipeline import (
    parse_solution,
    report_to_json,
    serialize_solution,
    solve_large,
    solve_oracle,
    solve_reduce,
    verify_solution,
)


def _load_instance(path: str) -> Instance:
    inst = parse_instance(Path(path).read_text(), name=Path(path).stem)
    bad = validate(inst)
    if bad:
        for msg in bad:
            print(f"invalid instance: {msg}", file=sys.stderr)
        raise ValueError(f"{path} is not a valid instance")
    return inst


def _parse_caps(raw: str, n: int) -> np.ndarray:
    kind, _, value = raw.partition(":")
    if kind != "uniform" or not value:
        raise ValueError(f"caps must look like uniform:K, got {raw!r}")
    try:
        k = int(value)
    except ValueError:
        raise ValueError(f"caps must look like uniform:K with integer K, got {raw!r}") from None
    if k < 0:
        raise ValueError(f"caps must be >= 0, got {k}")
    return np.full(n, float(k))


def _fmt(v: float) -> str:
    return repr(float(v))


def cmd_gen(args) -> int:
    params = GenParams(
        sites=args.sites,
        clients=args.clients,
        demand_min=args.demand_min,
        demand_max=args.demand_max,
        seed=args.seed,
        cost_min=args.cost_min,
        cost_max=args.cost_max,
    )
    inst = generate(params)
    Path(args.out).write_text(serialize_instance(inst))
    print(
        f"wrote {args.out} n={inst.n} m={inst.m} "
        f"R={inst.min_demand} P={inst.max_demand} seed={args.seed}"
    )
    return 0


def cmd_lp(args) -> int:
    inst = _load_instance(getattr(args, "in"))
    caps = _parse_caps(args.caps, inst.n) if args.caps else None
    primal, dual = solve_lp(build_lp(inst, caps))
    print(f"lp_objective={_fmt(primal.objective)}")
    if args.dump:
        lines = ["ftfp-lpsol 1", f"{inst.n} {inst.m}"]
        lines.append(" ".join(_fmt(v) for v in primal.y))
        for i in range(inst.n):
            lines.append(" ".join(_fmt(v) for v in primal.x[i]))
        lines.append(" ".join(_fmt(v) for v in dual.alpha))
        for i in range(inst.n):
            lines.append(" ".join(_fmt(v) for v in dual.beta[i]))
        if dual.gamma is not None:
            lines.append(" ".join(_fmt(v) for v in dual.gamma))
        Path(args.dump).write_text("\n".join(lines) + "\n")
    return 0


def _dump_decomposition(path: str, inst: Instance, algo: str) -> None:
    # recomputed from the LP; the pipeline is deterministic so this matches
    frac = trim_to_demand(solve_lp(build_lp(inst))[0], inst)
    dec = decompose_reduce(frac, inst) if algo == "reduce" else decompose_large(frac, inst)
    lines = ["ftfp-dec 1", f"{inst.n} {inst.m}"]
    lines.append(" ".join(str(int(v)) for v in dec.yhat))
    for i in range(inst.n):
        lines.append(" ".join(str(int(v)) for v in dec.xhat[i]))
    lines.append(" ".join(_fmt(v) for v in dec.ybar))
    for i in range(inst.n):
        lines.append(" ".join(_fmt(v) for v in dec.xbar[i]))
    Path(path).write_text("\n".join(lines) + "\n")


def cmd_solve(args) -> int:
    inst = _load_instance(getattr(args, "in"))
    if args.algo == "oracle":
        if args.dump_decomposition:
            raise ValueError("the oracle does not decompose; drop --dump-decomposition")
        sol, report = solve_oracle(inst)
    else:
        sub = subroutine(args.ftfl)
        sol, report = (solve_reduce if args.algo == "reduce" else solve_large)(inst, sub)
    if args.out:
        Path(args.out).write_text(serialize_solution(sol))
    if args.report:
        Path(args.report).write_text(report_to_json(report))
    if args.dump_decomposition:
        _dump_decomposition(args.dump_decomposition, inst, args.algo)
    print(
        f"algo={report.algo} cost_total={_fmt(report.cost_total)} "
        f"lp_star={_fmt(report.lp_star)} ratio_total={_fmt(report.ratio_total)} "
        f"chain_slack={_fmt(report.chain_slack)}"
    )
    return 0


def cmd_verify(args) -> int:
    inst = _load_instance(getattr(args, "in"))
    y, x = parse_solution(Path(args.sol).read_text())
    shapes_fit = y.shape == (inst.n,) and x.shape == (inst.n, inst.m)
    cost = solution_cost(inst, y, x) if shapes_fit else 0.0
    sol = IntegralSolution(y=y, x=x, cost=cost)
    bad = verify_solution(inst, sol)
    if bad:
        for msg in bad:
            print(f"violation: {msg}", file=sys.stderr)
        return 1
    print(f"ok cost={_fmt(sol.cost)}")
    return 0


def cmd_bench(args) -> int:
    import csv

    fields = [
        "seed", "n", "m", "R", "P", "algo", "ftfl",
        "lp_star", "cost_total", "rho_sub", "ratio_total", "chain_slack", "wall_ms",
    ]
    rows: list[dict] = []
    for t in range(args.trials):
        seed = args.seed + t
        inst = generate(GenParams(
            sites=args.sites,
            clients=args.clients,
            demand_min=args.demand_min,
            demand_max=args.demand_max,
            seed=seed,
            cost_min=args.cost_min,
            cost_max=args.cost_max,
        ))
        if args.algo == "oracle":
            _, report = solve_oracle(inst)
        else:
            sub = subroutine(args.ftfl)
            _, report = (solve_reduce if args.algo == "reduce" else solve_large)(inst, sub)
        rows.append({
            "seed": seed,
            "n": inst.n,
            "m": inst.m,
            "R": inst.min_demand,
            "P": inst.max_demand,
            "algo": report.algo,
            "ftfl": args.ftfl,
            "lp_star": _fmt(report.lp_star),
            "cost_total": _fmt(report.cost_total),
            "rho_sub": _fmt(report.rho_sub),
            "ratio_total": _fmt(report.ratio_total),
            "chain_slack": _fmt(report.chain_slack),
            "wall_ms": _fmt(report.wall_times["total"] * 1000.0),
        })
    with open(args.csv, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        writer.writerows(rows)
    if rows:
        worst_ratio = max(float(r["ratio_total"]) for r in rows)
        min_slack = min(float(r["chain_slack"]) for r in rows)
    else:
        worst_ratio = min_slack = float("nan")
    print(f"trials={args.trials} max_ratio_total={worst_ratio!r} min_chain_slack={min_slack!r}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ftfp",
        description="Fault-tolerant facility placement: generate, relax, round, verify, benchmark.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_gen_knobs(p):
        p.add_argument("--sites", type=int, required=True, help="number of sites")
        p.add_argument("--clients", type=int, required=True, help="number of clients")
        p.add_argument("--demand-min", type=int, default=1, help="smallest demand (default 1)")
        p.add_argument("--demand-max", type=int, default=3, help="largest demand (default 3)")
        p.add_argument("--seed", type=int, required=True, help="generator seed")
        p.add_argument("--cost-min", type=float, default=0.0, help="smallest opening cost")
        p.add_argument("--cost-max", type=float, default=1.0, help="largest opening cost")

    p = sub.add_parser("gen", help="generate a random instance file")
    add_gen_knobs(p)
    p.add_argument("--out", required=True, help="instance file to write")
    p.set_defaults(handler=cmd_gen)

    p = sub.add_parser("lp", help="solve the LP relaxation, print its objective")
    p.add_argument("--in", required=True, help="instance file")
    p.add_argument("--caps", help="per-site opening caps, uniform:K")
    p.add_argument("--dump", help="write primal and dual values to this file")
    p.set_defaults(handler=cmd_lp)

    p = sub.add_parser("solve", help="produce a verified integral plan")
    p.add_argument("--in", required=True, help="instance file")
    p.add_argument("--algo", choices=["reduce", "large", "oracle"], default="reduce")
    p.add_argument("--ftfl", choices=["exact", "greedy"], default="exact",
                   help="residual-stage subroutine (ignored by the oracle)")
    p.add_argument("--out", help="solution file to write")
    p.add_argument("--report", help="JSON report file to write")
    p.add_argument("--dump-decomposition", help="write hat/bar matrices to this file")
    p.set_defaults(handler=cmd_solve)

    p = sub.add_parser("verify", help="check a solution file against an instance")
    p.add_argument("--in", required=True, help="instance file")
    p.add_argument("--sol", required=True, help="solution file")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("bench", help="run seeded trials and write a CSV")
    add_gen_knobs(p)
    p.add_argument("--trials", type=int, required=True, help="number of seeded trials")
    p.add_argument("--algo", choices=["reduce", "large", "oracle"], default="reduce")
    p.add_argument("--ftfl", choices=["exact", "greedy"], default="exact")
    p.add_argument("--csv", required=True, help="CSV file to write")
    p.set_defaults(handler=cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command line interface: ``whub generate|solve|oracle|bench``.

Exit codes: 0 success (for ``solve``, relative gap within ``--eps``),
2 solver stopped with a residual gap, 1 error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from .facial import build_facial_basis, build_gangster, sparsity_listing
from .instance import (
    InstanceError,
    build_edm,
    gen_random,
    gen_wheel,
    instance_to_json,
    load_instance,
    wasserstein_value,
)
from .oracle import SearchSpaceError, gap_check, selection_count
from .solver import LOG_COLUMNS, SolverConfig, SolverError, solve

logger = logging.getLogger("whub")

BENCH_COLUMNS = ("d", "k", "n", "N", "wallSeconds", "relGap", "rankY", "stopReason",
                 "seed", "iterations", "lb", "ub")


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("solver")
    g.add_argument("--eps", type=float, default=1e-12, help="relative gap tolerance")
    g.add_argument("--eta", type=float, default=1e-10, help="KKT residual tolerance")
    g.add_argument("--maxiter", type=int, default=None)
    g.add_argument("--gamma", type=float, default=0.9)
    g.add_argument("--beta0", type=float, default=None)
    g.add_argument("--freeze-beta", action="store_true", help="keep the penalty fixed")
    g.add_argument("--alpha", type=float, default=None, help="diagonal shift of the objective")
    g.add_argument("--delta", type=float, default=None, help="positive scale of the objective")
    g.add_argument("--bound-every", type=int, default=100)
    g.add_argument("--stall-max", type=int, default=200)
    g.add_argument("--no-polish", action="store_true", help="skip local search on rounded selections")
    g.add_argument("--log", action="store_true", help="log one line per bound evaluation")


def _config(args) -> SolverConfig:
    return SolverConfig(
        eps=args.eps, eta=args.eta, maxiter=args.maxiter, gamma=args.gamma, beta0=args.beta0,
        freeze_beta=args.freeze_beta, alpha=args.alpha, delta=args.delta,
        bound_every=args.bound_every, stall_max=args.stall_max, polish=not args.no_polish,
    )


def _setup_logging(args) -> None:
    env = os.environ.get("WHUB_LOG", "")
    enabled = getattr(args, "log", False) or env not in ("", "0")
    # a private handler so repeated calls (and host logging setups) do not stack output
    for h in list(logger.handlers):
        logger.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(message)s"))
    logger.addHandler(handler)
    logger.setLevel(logging.INFO if enabled else logging.WARNING)
    logger.propagate = False
    if enabled:
        logger.info(" ".join(LOG_COLUMNS))


def _emit(obj, out) -> None:
    text = json.dumps(obj, indent=1)
    if out:
        with open(out, "w") as f:
            f.write(text + "\n")
    else:
        print(text)


def _run_solver(inst, cfg):
    edm = build_edm(inst)
    basis = build_facial_basis(inst.sizes)
    gang = build_gangster(inst.sizes)
    return edm, basis, solve(edm, basis, gang, cfg)


def solve_result(inst, report) -> dict:
    return {
        "instance": inst.label,
        "N": inst.N,
        "k": inst.k,
        "lb": report.lb,
        "ub": report.ub,
        "relGap": report.rel_gap,
        "relGapSci": f"{report.rel_gap:.1e}",
        "selection": list(report.selection.picks),
        "pW": wasserstein_value(report.ub, inst.k),
        "iterations": report.iterations,
        "stopReason": report.stop_reason,
        "rankY": report.rank_y,
        "wallSeconds": report.wall_seconds,
        "config": report.config,
    }


def cmd_generate(args) -> int:
    if args.kind == "wheel":
        inst = gen_wheel(args.k)
    else:
        if args.n is None or args.d is None:
            raise ValueError("random instances need --n and --d")
        inst = gen_random(args.k, args.n, args.d, args.vary, args.seed)
    text = json.dumps(instance_to_json(inst), indent=1)
    summary = f"N={inst.N} k={inst.k} d={inst.d}"
    if args.out:
        with open(args.out, "w") as f:
            f.write(text + "\n")
        print(summary)
    else:
        print(text)
        print(summary, file=sys.stderr)
    return 0


def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    cfg = _config(args)
    if args.dump_v:
        with open(args.dump_v, "w") as f:
            f.write(sparsity_listing(build_facial_basis(inst.sizes)) + "\n")
    _, _, report = _run_solver(inst, cfg)
    _emit(solve_result(inst, report), args.out)
    return 0 if report.rel_gap <= cfg.eps else 2


def cmd_oracle(args) -> int:
    inst = load_instance(args.instance)
    edm = build_edm(inst)
    count = selection_count(inst.sizes)
    if count > args.guard:
        raise SearchSpaceError(count, args.guard)
    _, _, report = _run_solver(inst, _config(args))
    gap = gap_check(edm, solver_lb=report.lb, tol_opt=args.tol_opt, guard=args.guard)
    obj = gap.to_json()
    obj.update({"instance": inst.label, "solverUB": report.ub, "solverStopReason": report.stop_reason})
    _emit(obj, args.out)
    return 0


def _parse_values(text: str) -> list[int]:
    out = []
    for item in text.split(","):
        item = item.strip()
        if ".." in item:
            lo, hi = item.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        elif item:
            out.append(int(item))
    return out


def parse_grid(text: str) -> dict[str, list[int]]:
    """Parse ``"d=2,3 k=8..10 n=7..13"`` into value lists for ``d``, ``k``, ``n``."""
    grid = {}
    for token in text.replace(";", " ").split():
        key, _, vals = token.partition("=")
        if key not in ("d", "k", "n") or not vals:
            raise ValueError(f"bad grid entry {token!r}")
        grid[key] = _parse_values(vals)
    missing = {"d", "k", "n"} - set(grid)
    if missing:
        raise ValueError(f"grid is missing {sorted(missing)}")
    return grid


def _bench_cell(cell) -> dict:
    d, k, n, seed, vary, cfg = cell
    row = {"d": d, "k": k, "n": n, "seed": seed}
    try:
        inst = gen_random(k, n, d, vary, seed)
        row["N"] = inst.N
        _, _, rep = _run_solver(inst, cfg)
        row.update(wallSeconds=rep.wall_seconds, relGap=rep.rel_gap, rankY=rep.rank_y,
                   stopReason=rep.stop_reason, iterations=rep.iterations, lb=rep.lb, ub=rep.ub)
    except (ValueError, SolverError) as exc:
        row["stopReason"] = f"error: {exc}"
    return row


def cmd_bench(args) -> int:
    grid = parse_grid(args.grid)
    cfg = _config(args)
    cells = [(d, k, n, args.seed + r, not args.equal, cfg)
             for d in grid["d"] for k in grid["k"] for n in grid["n"] for r in range(args.reps)]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            rows = list(pool.map(_bench_cell, cells))
    else:
        rows = [_bench_cell(c) for c in cells]
    rows.sort(key=lambda r: (r["d"], r["k"], r["n"], r["seed"]))
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.DictWriter(out, fieldnames=BENCH_COLUMNS, restval="")
        w.writeheader()
        for row in rows:
            w.writerow({key: (f"{v:.17g}" if isinstance(v, float) else v) for key, v in row.items()})
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="whub", description="Cheapest-hub solver with certified bounds.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a random or wheel instance")
    p.add_argument("kind", choices=("random", "wheel"))
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--vary", action="store_true", help="draw set sizes from [n-2, n+2]")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="bound and solve an instance")
    p.add_argument("instance")
    p.add_argument("-o", "--out")
    p.add_argument("--dump-v", metavar="PATH", help="write the nonzeros of the facial basis")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="enumerate optima and compare with the solver bound")
    p.add_argument("instance")
    p.add_argument("-o", "--out")
    p.add_argument("--tol-opt", type=float, default=1e-9)
    p.add_argument("--guard", type=int, default=10**8)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bench", help="time random instances over a size grid")
    p.add_argument("--grid", required=True, help='e.g. "d=2 k=8..10 n=7..13"')
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=1, help="instances per grid cell")
    p.add_argument("--equal", action="store_true", help="equal set sizes")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--out")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args)
    try:
        return args.func(args)
    except (InstanceError, SearchSpaceError, SolverError, ValueError, OSError) as exc:
        print(f"whub: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

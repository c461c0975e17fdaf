"""Command-line front end: solve, verify, compare, oracle.

Output is machine-first (JSON, optionally CSV) and byte-deterministic for
identical inputs and seeds.  Exit codes: 0 success, 1 domain error, 2 usage.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

from .auction import UnitAllocation, ascending_auction
from .errors import WalrasError
from .instance import (DEFAULT_BUDGET, Instance, load_instance,
                       verify_mnat_exc, verify_monotone_normalized)
from .itemsets import mask_from_items
from .lnat import StrategyKind, is_lnat_convex_on_box
from .lyapunov import LyapunovOracle
from .oracle import all_lyapunov_minimizers, brute_force_min_equilibrium, price_cap

STRATEGY_FLAGS = {
    "minimal-overdemanded": StrategyKind.MINIMAL_DESCENT,
    "steepest": StrategyKind.STEEPEST_MINIMAL,
    "excess-random": StrategyKind.FIRST_GP_MINIMAL,
    "excess-maximal": StrategyKind.MAXIMAL_GP_MINIMAL,
}

_LNAT_CHECK_BUDGET = 500_000


def _budget() -> int:
    raw = os.environ.get("WALRAS_BUDGET")
    if raw is None:
        return DEFAULT_BUDGET
    try:
        value = int(raw)
    except ValueError:
        raise WalrasError(f"WALRAS_BUDGET: not an integer: {raw!r}") from None
    if value < 1:
        raise WalrasError("WALRAS_BUDGET: must be positive")
    return value


def _emit(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _allocation_json(allocation) -> dict | None:
    if allocation is None:
        return None
    if isinstance(allocation, UnitAllocation):
        return {"model": "unit", "assignment": list(allocation.assignment)}
    return {"model": "multi", "bundles": [list(x) for x in allocation.bundles]}


def _result_json(instance: Instance, strategy_flag: str, seed: int,
                 p0, result) -> dict:
    steps = []
    for k, (step, diag) in enumerate(zip(result.trajectory.steps, result.diagnostics)):
        members = sorted(step.chosen_set)
        steps.append({
            "iteration": k + 1,
            "p_before": list(step.p_before),
            "chosen_items": members,
            "chosen_mask": mask_from_items(members, instance.n),
            "lyapunov_before": step.g_before,
            "lyapunov_after": step.g_after,
            "deficiency": diag.deficiency,
            "demanded_units": diag.demanded_units,
            "supply_units": diag.supply_units,
        })
    return {
        "model": instance.model,
        "strategy": strategy_flag,
        "seed": seed,
        "start": list(p0),
        "p_final": list(result.p_min),
        "iterations": len(result.trajectory),
        "trajectory": steps,
        "allocation": _allocation_json(result.allocation),
        "allocation_error": result.allocation_error,
    }


def _result_csv(instance: Instance, result) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["iteration"] + [f"p{i}" for i in range(1, instance.n + 1)]
    header += ["chosen_mask", "chosen_items", "lyapunov", "deficiency"]
    writer.writerow(header)
    for k, (step, diag) in enumerate(zip(result.trajectory.steps, result.diagnostics)):
        members = sorted(step.chosen_set)
        row = [k + 1] + list(step.p_before)
        row += [mask_from_items(members, instance.n),
                ";".join(str(i) for i in members),
                step.g_before, diag.deficiency]
        writer.writerow(row)
    return buf.getvalue()


def _load_start(instance: Instance, source: str):
    if source == "zero":
        return (0,) * instance.n
    try:
        with open(source, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise WalrasError(f"start vector {source}: {exc}") from None
    if (not isinstance(raw, list) or len(raw) != instance.n
            or not all(isinstance(c, int) and not isinstance(c, bool) and c >= 0 for c in raw)):
        raise WalrasError(f"start vector {source}: expected {instance.n} nonnegative integers")
    return tuple(raw)


def _cmd_solve(args) -> int:
    budget = _budget()
    instance = load_instance(args.instance)
    p0 = _load_start(instance, args.start)
    strategy = STRATEGY_FLAGS[args.strategy]
    result = ascending_auction(instance, strategy, p0, seed=args.seed,
                               budget=budget, allocation_budget=budget)
    if args.format == "json":
        doc = _result_json(instance, args.strategy, args.seed, p0, result)
        _emit(json.dumps(doc, indent=2) + "\n", args.out)
    else:
        _emit(_result_csv(instance, result), args.out)
    return 0


def _cmd_verify(args) -> int:
    budget = _budget()
    instance = load_instance(args.instance)
    checks = ("monotone", "mnat", "lnat") if args.check == "all" else (args.check,)
    lines = []
    failed = False
    if "monotone" in checks:
        for b, v in enumerate(instance.valuations):
            bad = verify_monotone_normalized(v, instance.u, budget=budget)
            if bad is None:
                lines.append(f"monotone: bidder {b}: ok")
            else:
                failed = True
                lines.append(f"monotone: bidder {b}: counterexample {bad.message}")
    if "mnat" in checks:
        for b, v in enumerate(instance.valuations):
            bad = verify_mnat_exc(v, instance.u, budget=budget)
            if bad is None:
                lines.append(f"mnat: bidder {b}: ok")
            else:
                failed = True
                lines.append(f"mnat: bidder {b}: counterexample "
                             f"x={tuple(bad.x)} y={tuple(bad.y)} i={bad.i}")
    if "lnat" in checks:
        ly = LyapunovOracle(instance, budget=budget)
        cap = ly.price_ceiling()
        side = cap
        while side > 0 and (side + 1) ** (2 * instance.n + 1) > _LNAT_CHECK_BUDGET:
            side -= 1
        box = ((0,) * instance.n, (side,) * instance.n)
        bad = is_lnat_convex_on_box(ly.function_oracle(), box, budget=_LNAT_CHECK_BUDGET)
        if bad is None:
            lines.append(f"lnat: holds on [0, {side}]^{instance.n}")
        else:
            failed = True
            lines.append(f"lnat: counterexample p={tuple(bad.p)} q={tuple(bad.q)} "
                         f"shift={bad.lam}")
    text = "\n".join(lines) + "\n"
    if failed:
        sys.stderr.write(text)
        return 1
    sys.stdout.write(text)
    return 0


def _cmd_compare(args) -> int:
    budget = _budget()
    instance = load_instance(args.instance)
    oracle = LyapunovOracle(instance, budget=budget)
    report = {}
    finals = []
    for flag in STRATEGY_FLAGS:  # fixed order, independent of runtimes
        result = ascending_auction(instance, STRATEGY_FLAGS[flag], seed=args.seed,
                                   budget=budget, oracle=oracle)
        report[flag] = {"p_final": list(result.p_min),
                        "iterations": len(result.trajectory)}
        finals.append(result.p_min)
    agree = all(p == finals[0] for p in finals)
    doc = {"seed": args.seed, "strategies": report, "all_equal": agree,
           "p_min": list(finals[0]) if agree else None}
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    if not agree:
        sys.stderr.write("strategies disagree on the final price\n")
        return 1
    return 0


def _cmd_oracle(args) -> int:
    budget = _budget()
    instance = load_instance(args.instance)
    minimizers = all_lyapunov_minimizers(instance, budget=budget)
    p_min = brute_force_min_equilibrium(instance, budget=budget)
    doc = {
        "price_cap": list(price_cap(instance)),
        "lyapunov_minimizers": [list(p) for p in sorted(minimizers)],
        "min_equilibrium_price": list(p_min),
    }
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="walras",
        description="Compute minimal market-clearing prices for auctions "
                    "with substitutes valuations.")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="run one ascending auction")
    solve.add_argument("--instance", required=True)
    solve.add_argument("--strategy", required=True, choices=sorted(STRATEGY_FLAGS))
    solve.add_argument("--start", default="zero",
                       help="'zero' or a path to a JSON list of start prices")
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--out")
    solve.add_argument("--format", choices=("json", "csv"), default="json")
    solve.set_defaults(func=_cmd_solve)

    verify = sub.add_parser("verify", help="check structural properties of an instance")
    verify.add_argument("--instance", required=True)
    verify.add_argument("--check", choices=("mnat", "lnat", "monotone", "all"),
                        default="all")
    verify.set_defaults(func=_cmd_verify)

    compare = sub.add_parser("compare", help="run every strategy and compare")
    compare.add_argument("--instance", required=True)
    compare.add_argument("--seed", type=int, default=0)
    compare.add_argument("--out")
    compare.set_defaults(func=_cmd_compare)

    oracle = sub.add_parser("oracle", help="brute-force minimizer scan")
    oracle.add_argument("--instance", required=True)
    oracle.add_argument("--out")
    oracle.set_defaults(func=_cmd_oracle)

    return parser


def run_command(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "seed", 0) < 0 or getattr(args, "seed", 0) >= 1 << 64:
        sys.stderr.write("seed must be an unsigned 64-bit integer\n")
        return 2
    try:
        return args.func(args)
    except WalrasError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


def main(argv=None) -> None:
    sys.exit(run_command(sys.argv[1:] if argv is None else argv))

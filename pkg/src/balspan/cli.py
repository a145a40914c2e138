"""Command-line entry point: ``balspan solve|sweep|verify <problem.json>``.

Exit codes: 0 success, 1 unreadable/malformed problem file, 2 invalid
instance or missing data, 3 solver failure, 4 instance too large for the
oracle (verify without --paper-trace), 5 a verification check failed.
"""

from __future__ import annotations

import argparse
import logging
import math
import re
import sys
from pathlib import Path

from .files import (
    ProblemFormatError,
    dumps,
    load_problem,
    solution_to_dict,
    solution_to_dot,
)
from .model import BalspanError, ProblemInstance, validate_instance
from .oracle import MAX_ORACLE_ITEMS, best_qcb, check_mst, replay_paper_trace
from .quality import quality_vector
from .schemes import CondensingKind, Scheme
from .strategies import (
    candidate_strategies,
    local_improve,
    pareto_sweep,
    resolve_layers,
    strategy_balance_then_span,
    strategy_direct,
    strategy_layered,
    strategy_spanning_then_balance,
)

EXIT_PARSE, EXIT_INVALID, EXIT_SOLVER, EXIT_GUARD, EXIT_CHECK = 1, 2, 3, 4, 5


def _fmt(x: float) -> str:
    return "inf" if math.isinf(x) else f"{x:g}"


def _load(path: str) -> ProblemInstance | int:
    try:
        instance = load_problem(path)
    except (OSError, ProblemFormatError) as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    violations = validate_instance(instance)
    if violations:
        for v in violations:
            print(f"invalid: {v}", file=sys.stderr)
        return EXIT_INVALID
    return instance


def _write(out_dir: Path, name: str, text: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    path.write_text(text)
    return path


def cmd_solve(args: argparse.Namespace) -> int:
    instance = _load(args.file)
    if isinstance(instance, int):
        return instance
    if args.strategy == "layered":
        try:
            resolve_layers(instance)
        except BalspanError as exc:
            print(f"invalid: {exc}", file=sys.stderr)
            return EXIT_INVALID
    try:
        if args.strategy == "span-balance":
            kind = CondensingKind(Scheme(args.scheme), args.center_type)
            sol = strategy_spanning_then_balance(instance, kind)
            label = f"span-balance/{args.scheme}"
        else:
            run = {
                "balance-span": strategy_balance_then_span,
                "direct": strategy_direct,
                "layered": strategy_layered,
            }[args.strategy]
            sol = run(instance)
            label = args.strategy
        if args.improve:
            sol = local_improve(sol, instance)
    except BalspanError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER

    out_dir = Path(args.out_dir)
    written = []
    if args.out in ("json", "both"):
        written.append(_write(out_dir, "solution.json", dumps(solution_to_dict(sol, instance, label))))
    if args.out in ("dot", "both"):
        written.append(_write(out_dir, "solution.dot", solution_to_dot(sol, instance)))
    qv = quality_vector(sol, instance)
    print(f"{label}: {len(sol.clusters)} clusters, q_cb={qv.q_cb} q_s={_fmt(qv.q_s)}")
    for path in written:
        print(f"wrote {path}")
    return 0


def _slug(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", label).strip("_")


def cmd_sweep(args: argparse.Namespace) -> int:
    instance = _load(args.file)
    if isinstance(instance, int):
        return instance
    result = pareto_sweep(instance, improve=args.improve, center_type=args.center_type)
    out_dir = Path(args.out_dir)
    rows = []
    for cand in result.candidates:
        row = {"label": cand.label, "ok": cand.ok}
        if cand.ok:
            name = f"solution_{_slug(cand.label)}.json"
            _write(out_dir, name, dumps(solution_to_dict(cand.solution, instance, cand.label)))
            row.update({
                "q_cb": cand.quality.q_cb,
                "q_s": None if math.isinf(cand.quality.q_s) else cand.quality.q_s,
                "file": name,
            })
        else:
            row["error"] = cand.error
        rows.append(row)
        status = (
            f"q_cb={cand.quality.q_cb} q_s={_fmt(cand.quality.q_s)}" if cand.ok
            else f"FAILED ({cand.error})"
        )
        mark = "*" if cand.label in result.front else " "
        print(f"{mark} {cand.label:<22} {status}")
    path = _write(out_dir, "sweep.json", dumps({"candidates": rows, "front": list(result.front)}))
    print(f"front: {', '.join(result.front)}")
    print(f"wrote {path}")
    return 0 if any(c.ok for c in result.candidates) else EXIT_SOLVER


def cmd_verify(args: argparse.Namespace) -> int:
    instance = _load(args.file)
    if isinstance(instance, int):
        return instance
    ok = True
    if args.paper_trace:
        report = replay_paper_trace()
        print(f"trace: {'MATCH' if report.match else 'MISMATCH'}")
        for d in report.diffs:
            print(f"  {d}")
        ok &= report.match

    if len(instance.items) > MAX_ORACLE_ITEMS:
        if not args.paper_trace:
            print(
                f"error: instance too large for oracle ({len(instance.items)} > {MAX_ORACLE_ITEMS} items)",
                file=sys.stderr,
            )
            return EXIT_GUARD
        print(f"oracle checks skipped: {len(instance.items)} items > {MAX_ORACLE_ITEMS}")
        return 0 if ok else EXIT_CHECK

    same, got, expected = check_mst(instance)
    print(f"mst: weight {_fmt(got)} vs enumerated minimum {_fmt(expected)} -> {'ok' if same else 'FAIL'}")
    ok &= same

    optimum, _ = best_qcb(instance)
    print(f"oracle best q_cb = {optimum}")
    print(f"{'strategy':<22} {'q_cb':>5} {'gap':>5}")
    for label, run in candidate_strategies(instance):
        try:
            value = quality_vector(run(instance), instance).q_cb
        except BalspanError as exc:
            print(f"{label:<22} failed: {exc}")
            continue
        row_ok = value >= optimum
        ok &= row_ok
        print(f"{label:<22} {value:>5} {value - optimum:>5}{'' if row_ok else '  FAIL'}")
    return 0 if ok else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="balspan",
        description="Balanced clustering with a spanning tree over the clusters.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="run one strategy and write the solution")
    solve.add_argument("file")
    solve.add_argument(
        "--strategy", required=True,
        choices=["balance-span", "span-balance", "direct", "layered"],
    )
    solve.add_argument("--scheme", choices=[s.value for s in Scheme])
    solve.add_argument("--center-type", type=int, default=1)
    solve.add_argument("--improve", action="store_true", help="apply single-node local improvement")
    solve.add_argument("--out", choices=["json", "dot", "both"], default="both")
    solve.add_argument("--out-dir", default=".")
    solve.set_defaults(func=cmd_solve)

    sweep = sub.add_parser("sweep", help="run every strategy and report the Pareto front")
    sweep.add_argument("file")
    sweep.add_argument("--improve", action="store_true")
    sweep.add_argument("--center-type", type=int, default=1)
    sweep.add_argument("--out-dir", default=".")
    sweep.set_defaults(func=cmd_sweep)

    verify = sub.add_parser("verify", help="check heuristics against exhaustive oracles")
    verify.add_argument("file")
    verify.add_argument("--paper-trace", action="store_true",
                        help="replay the bundled 19-item worked example")
    verify.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    if args.command == "solve":
        if args.strategy == "span-balance" and args.scheme is None:
            parser.error("--scheme is required with --strategy span-balance")
        if args.strategy != "span-balance" and args.scheme is not None:
            parser.error("--scheme only applies to --strategy span-balance")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

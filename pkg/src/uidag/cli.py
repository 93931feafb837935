"""Command line front end.

Subcommands: validate, order, skeleton, solve, eval, simulate.  Exit code 0 on
success, 1 on validation or solving failures, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from .bundle import BundleError, read_bundle, write_bundle
from .model import (
    UidError,
    load_document,
    temporal_order,
    uid_from_document,
    validate,
)
from .oracle import OracleScaleError, brute_meu, simulate, strategy_eu
from .skeleton import build_skeleton, expand_normal_form, export_dot
from .solver import SolverError, solve


def _read_uid(path: str):
    with open(path) as f:
        return uid_from_document(load_document(f.read()))


def _load_valid_uid(path: str):
    uid = _read_uid(path)
    problems = validate(uid)
    if problems:
        raise UidError("invalid model: " + problems[0])
    return uid


def _cmd_validate(args) -> int:
    uid = _read_uid(args.file)
    problems = validate(uid)
    for p in problems:
        print(p)
    return 1 if problems else 0


def _cmd_order(args) -> int:
    uid = _load_valid_uid(args.file)
    po = temporal_order(uid)
    for a, b in sorted(po.pairs):
        print(f"{a} < {b}")
    return 0


def _cmd_skeleton(args) -> int:
    uid = _load_valid_uid(args.file)
    sk = build_skeleton(uid, trim=args.trim_relevance)
    sink = sk.nodes[sk.sink]
    print(f"nodes {len(sk.nodes)}")
    print(f"edges {len(sk.edges)}")
    print("sink {" + ", ".join(sorted(sink.label)) + "}")
    if args.dot:
        with open(args.dot, "w") as f:
            f.write(export_dot(sk))
    return 0


def _trace_doc(strategy) -> list[dict]:
    events = []
    for ev in strategy.trace:
        entry: dict = {"op": ev.op, "subject": ev.subject}
        entry["created"] = [
            {"kind": p.kind, "domain": list(p.domain),
             "values": [float(x) for x in p.flat]}
            for p in ev.created
        ]
        if ev.policy is not None:
            entry["policy_domain"] = list(ev.policy.domain)
        if ev.step is not None:
            entry["step_domain"] = list(ev.step.domain)
        events.append(entry)
    return events


def _cmd_solve(args) -> int:
    uid = _load_valid_uid(args.file)
    sk = build_skeleton(uid, trim=args.trim_relevance)
    sdag = expand_normal_form(uid, sk)
    strategy = solve(uid, sdag, record_trace=args.dump_potentials)
    print(f"MEU {strategy.meu:.12g}")
    if args.bundle:
        write_bundle(args.bundle, uid, strategy,
                     flags={"trim_relevance": args.trim_relevance})
    if args.dump_potentials:
        print(json.dumps({"events": _trace_doc(strategy)}, indent=2))
    return 0


def _cmd_eval(args) -> int:
    uid = _load_valid_uid(args.file)
    print(f"brute_meu {brute_meu(uid):.12g}")
    if args.bundle:
        loaded = read_bundle(args.bundle)
        print(f"strategy_eu {strategy_eu(uid, loaded.strategy):.12g}")
    return 0


def _cmd_simulate(args) -> int:
    uid = _load_valid_uid(args.file)
    loaded = read_bundle(args.bundle)
    mean, stderr = simulate(uid, loaded.strategy, n=args.n, seed=args.seed)
    print(f"mean {mean:.12g} stderr {stderr:.12g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uidag",
        description="Solve unconstrained influence diagrams and export strategies.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="report model invariant violations")
    p.add_argument("file")
    p.set_defaults(fn=_cmd_validate)

    p = sub.add_parser("order", help="print the induced partial temporal order")
    p.add_argument("file")
    p.set_defaults(fn=_cmd_order)

    p = sub.add_parser("skeleton", help="build the skeleton and summarize it")
    p.add_argument("file")
    p.add_argument("--trim-relevance", action="store_true")
    p.add_argument("--dot", metavar="PATH")
    p.set_defaults(fn=_cmd_skeleton)

    p = sub.add_parser("solve", help="compute the optimal strategy")
    p.add_argument("file")
    p.add_argument("--trim-relevance", action="store_true")
    p.add_argument("--bundle", metavar="PATH")
    p.add_argument("--dump-potentials", action="store_true")
    p.set_defaults(fn=_cmd_solve)

    p = sub.add_parser("eval", help="exhaustive value, plus bundle re-scoring")
    p.add_argument("file")
    p.add_argument("--bundle", metavar="PATH")
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("simulate", help="Monte Carlo rollout of a bundle")
    p.add_argument("file")
    p.add_argument("--bundle", metavar="PATH", required=True)
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.fn(args)
    except (UidError, SolverError, BundleError, OracleScaleError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

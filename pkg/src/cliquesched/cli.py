"""Command-line interface.

Subcommands: ``solve`` (run one optimizer on an instance), ``validate``
(report instance violations), ``oracle`` (exhaustive optimum for small
instances), ``reduce`` (build a scheduling instance from a clique-cover
question), and ``pack`` (annotate a schedule with VM packing groups).

Exit codes: 0 success, 1 input error, 2 infeasible.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Mapping, Sequence

from .errors import (
    CheckpointMismatch,
    CliqueschedError,
    CoverExceedsBudget,
    DegenerateTarget,
    EmptyLayer,
    Infeasible,
    InvalidInstance,
    UnsatisfiableInclude,
)
from .model import check_schedule, schedule_vertices, validate_instance
from .pipeline import (
    ALGORITHM_IDS,
    checkpoint_from_dict,
    instance_from_dict,
    instance_to_dict,
    load_checkpoint,
    load_instance,
    load_schedule,
    pack_schedule,
    run_pipeline,
    save_checkpoint,
    schedule_to_dict,
)
from .reduction import GeneralGraph, brute_force, reduce_to_instance

INFEASIBLE_ERRORS = (
    Infeasible,
    EmptyLayer,
    UnsatisfiableInclude,
    CoverExceedsBudget,
    DegenerateTarget,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cliquesched",
        description="Coverage-constrained test schedule construction",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="optimize a schedule for an instance")
    solve.add_argument("--instance", required=True, help="instance JSON file")
    solve.add_argument("--algorithm", required=True, choices=ALGORITHM_IDS)
    solve.add_argument("--budget", type=float, help="wall-clock budget in seconds")
    solve.add_argument(
        "--iterations", type=int, help="iteration budget (annealing moves / node expansions)"
    )
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--branch-factor", type=int, default=None)
    solve.add_argument("--resume", help="checkpoint file to continue from")
    solve.add_argument("--checkpoint-out", help="write the final solver state here")
    solve.add_argument("--output", help="schedule JSON output (default: stdout)")

    validate = sub.add_parser("validate", help="check instance invariants")
    validate.add_argument("--instance", required=True)

    oracle = sub.add_parser("oracle", help="exact optimum by exhaustive search")
    oracle.add_argument("--instance", required=True)
    oracle.add_argument("--output", help="schedule JSON output (default: stdout)")

    reduce_cmd = sub.add_parser(
        "reduce", help="turn a clique-cover question into a scheduling instance"
    )
    reduce_cmd.add_argument("--graph", required=True, help="graph JSON: {vertices, edges}")
    reduce_cmd.add_argument("--n", type=int, required=True, help="cover size bound")
    reduce_cmd.add_argument("--output", help="instance JSON output (default: stdout)")

    pack = sub.add_parser("pack", help="annotate a schedule with VM packing groups")
    pack.add_argument("--schedule", required=True, help="schedule JSON file")
    pack.add_argument("--instance", required=True, help="instance JSON with a packing table")
    pack.add_argument("--output", help="packed schedule output (default: stdout)")

    return parser


def _emit(doc: Mapping, output: str | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_solve(args: argparse.Namespace) -> int:
    if args.budget is None and args.iterations is None:
        print("solve: need --budget and/or --iterations", file=sys.stderr)
        return 1
    inst = load_instance(args.instance)
    checkpoint = load_checkpoint(args.resume) if args.resume else None
    result = run_pipeline(
        inst,
        args.algorithm,
        seed=args.seed,
        iterations=args.iterations,
        time_limit=args.budget,
        branch_factor=args.branch_factor,
        checkpoint=checkpoint,
    )
    if args.checkpoint_out:
        save_checkpoint(result.checkpoint, args.checkpoint_out)
    _emit(schedule_to_dict(result, inst), args.output)
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    inst = load_instance(args.instance)
    violations = validate_instance(inst)
    _emit({"valid": not violations, "violations": violations}, None)
    return 1 if violations else 0


def _cmd_oracle(args: argparse.Namespace) -> int:
    inst = load_instance(args.instance)
    violations = validate_instance(inst)
    if violations:
        raise InvalidInstance("; ".join(violations))
    schedule, value = brute_force(inst)
    report = check_schedule(schedule, inst, inst.required or schedule_vertices(schedule))
    doc = {
        "format": "cliquesched-oracle",
        "version": 1,
        "cost": value,
        "n": inst.n,
        "configs": [
            {"ids": list(c), "labels": [inst.labels.get(v, str(v)) for v in c]}
            for c in schedule
        ],
        "coverage_report": report.as_dict(),
    }
    _emit(doc, args.output)
    return 0


def _cmd_reduce(args: argparse.Namespace) -> int:
    with open(args.graph, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    graph = GeneralGraph.build(doc["vertices"], [tuple(e) for e in doc["edges"]])
    reduced = reduce_to_instance(graph, args.n)
    _emit(instance_to_dict(reduced.instance), args.output)
    return 0


def _cmd_pack(args: argparse.Namespace) -> int:
    inst = load_instance(args.instance)
    doc = dict(load_schedule(args.schedule))
    configs = [tuple(entry["ids"]) for entry in doc.get("configs", [])]
    groups = pack_schedule(configs, inst.packing)

    def config_doc(config: tuple) -> dict:
        return {
            "ids": list(config),
            "labels": [inst.labels.get(v, str(v)) for v in config],
        }

    doc["configs"] = [config_doc(g.config) for g in groups for _ in range(g.copies)]
    doc["node_groups"] = [
        {"node": i, **config_doc(g.config), "copies": g.copies} for i, g in enumerate(groups)
    ]
    _emit(doc, args.output)
    return 0


COMMANDS = {
    "solve": _cmd_solve,
    "validate": _cmd_validate,
    "oracle": _cmd_oracle,
    "reduce": _cmd_reduce,
    "pack": _cmd_pack,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except INFEASIBLE_ERRORS as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 2
    except (InvalidInstance, CheckpointMismatch) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError, KeyError, ValueError, CliqueschedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

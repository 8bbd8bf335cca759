"""End-to-end pipeline, file formats, checkpoints, and VM packing.

The pipeline runs scope -> prune -> clique cover (with an optional
layer-size restriction) -> target adjustment -> expanded coverage
schedule -> one of eighteen optimizers, and can persist/resume solver
state so successive runs keep improving the same schedule.

Documents are JSON.  An instance file carries the graph (dimension names,
values with labels, edges), the scope, the budget ``n``, the objective,
and optional ``max_dimension_size``, ``packing``, and ``required``
fields.  Schedule and checkpoint documents are produced by this module;
all serialization is canonical (sorted keys) so identical runs produce
byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .annealing import NeighborMode, SaConfig, SimulatedAnnealer, expand_cover
from .branchbound import BnbConfig, BranchAndBound, Family, Strategy
from .errors import CheckpointMismatch, Infeasible, InvalidInstance
from .graphops import CliqueCover, clique_cover, prune_graph, restrict_dimension_size, scope_graph
from .model import (
    CompatibilityGraph,
    Config,
    ConstraintReport,
    Instance,
    Schedule,
    Scope,
    check_schedule,
    validate_instance,
)
from .objective import ObjectiveKind, TargetSpec, adjust_targets, cost

SA_VARIANTS: dict[str, tuple[NeighborMode, bool]] = {
    "1.1": (NeighborMode.RANDOM_VERTEX, False),
    "1.2": (NeighborMode.RANDOM_VERTEX, True),
    "1.3": (NeighborMode.ALL_BUT_ONE, False),
    "1.4": (NeighborMode.ALL_BUT_ONE, True),
    "1.5": (NeighborMode.SINGLE_VERTEX, False),
    "1.6": (NeighborMode.SINGLE_VERTEX, True),
}

BNB_VARIANTS: dict[str, tuple[Family, bool, Strategy]] = {
    "2.1": (Family.SCRATCH, False, Strategy.DEPTH_FIRST),
    "2.2": (Family.SCRATCH, True, Strategy.DEPTH_FIRST),
    "2.3": (Family.SCRATCH, False, Strategy.DEPTH_FIRST_BEST_FIRST),
    "2.4": (Family.SCRATCH, True, Strategy.DEPTH_FIRST_BEST_FIRST),
    "2.5": (Family.SCRATCH, False, Strategy.BEST_FIRST_DEPTH_FIRST),
    "2.6": (Family.SCRATCH, True, Strategy.BEST_FIRST_DEPTH_FIRST),
    "3.1": (Family.REFINE, False, Strategy.DEPTH_FIRST),
    "3.2": (Family.REFINE, True, Strategy.DEPTH_FIRST),
    "3.3": (Family.REFINE, False, Strategy.DEPTH_FIRST_BEST_FIRST),
    "3.4": (Family.REFINE, True, Strategy.DEPTH_FIRST_BEST_FIRST),
    "3.5": (Family.REFINE, False, Strategy.BEST_FIRST_DEPTH_FIRST),
    "3.6": (Family.REFINE, True, Strategy.BEST_FIRST_DEPTH_FIRST),
}

ALGORITHM_IDS: tuple[str, ...] = tuple(sorted(SA_VARIANTS) + sorted(BNB_VARIANTS))


@dataclass(frozen=True)
class PackingTable:
    """Per (hardware vertex, VM vertex) capacity: how many VMs fit on one node."""

    vm_dimension: int
    capacity: Mapping[tuple[int, int], int]


@dataclass(frozen=True)
class NodeGroup:
    """One physical node running ``copies`` instances of the same configuration."""

    config: Config
    copies: int


def pack_schedule(
    schedule: Sequence[Config], packing: PackingTable | None
) -> tuple[NodeGroup, ...]:
    """Duplicate each configuration up to its node's VM capacity.

    Each configuration becomes one node group of ``w`` copies, where ``w``
    is the capacity of its hardware/VM pair (default 1).  The number of
    nodes equals the schedule length.
    """
    groups = []
    for config in schedule:
        copies = 1
        if packing is not None:
            copies = packing.capacity.get((config[0], config[packing.vm_dimension]), 1)
        groups.append(NodeGroup(config=config, copies=copies))
    return tuple(groups)


@dataclass(frozen=True)
class Checkpoint:
    """Persisted optimizer state for continuous training."""

    instance_digest: str
    algorithm: str
    seed: int
    solver: str  # "sa" or "bnb"
    state: dict
    best_cost: float


@dataclass(frozen=True)
class PreparedInstance:
    """Everything the optimizers need, computed once per instance."""

    instance: Instance
    cover: CliqueCover
    s0: Schedule
    target: TargetSpec | None
    required: frozenset[int]
    initial_cost: float


@dataclass(frozen=True)
class PipelineResult:
    schedule: Schedule
    cost: float
    initial_cost: float
    required: frozenset[int]
    report: ConstraintReport
    checkpoint: Checkpoint
    algorithm: str
    seed: int


def prepare_instance(inst: Instance, seed: int = 0) -> PreparedInstance:
    """Run the graph stage and build the expanded coverage schedule.

    Deterministic for a given (instance, seed), so a resumed run rebuilds
    exactly the state the original run started from.
    """
    violations = validate_instance(inst)
    if violations:
        raise InvalidInstance("; ".join(violations))

    scoped = scope_graph(inst.graph, inst.scope)
    include = inst.scope.include_union
    pruned = prune_graph(scoped, include)

    protected = include | (inst.required or frozenset())
    cover_targets = None if inst.required is None else frozenset(inst.required | include)
    rng = random.Random(seed)

    if inst.max_dimension_size is not None:
        if protected:
            head = clique_cover(pruned, protected, rng, vertices=protected)
            shrunk = restrict_dimension_size(
                head.graph, inst.target, inst.max_dimension_size, protected | head.covered
            )
            cover = clique_cover(
                shrunk,
                protected,
                rng,
                vertices=cover_targets,
                initial_cliques=head.cliques,
                initial_covered=head.covered,
            )
        else:
            shrunk = restrict_dimension_size(
                pruned, inst.target, inst.max_dimension_size, frozenset()
            )
            cover = clique_cover(shrunk, protected, rng, vertices=cover_targets)
    else:
        cover = clique_cover(pruned, protected, rng, vertices=cover_targets)

    if not cover.cliques:
        raise Infeasible("no valid configuration exists under the scope")

    required = inst.required if inst.required is not None else cover.covered
    target = None if inst.target is None else adjust_targets(inst.target, cover.graph)
    s0 = expand_cover(cover.cliques, inst.n)
    initial_cost = 0.0 if target is None else cost(s0, target)
    return PreparedInstance(
        instance=inst,
        cover=cover,
        s0=s0,
        target=target,
        required=frozenset(required),
        initial_cost=initial_cost,
    )


def build_solver(
    prepared: PreparedInstance,
    algorithm: str,
    seed: int = 0,
    branch_factor: int | None = None,
    retries_limit: int = 8,
    reset_probability: float = 1e-7,
    swap_beyond_cover: bool = False,
) -> SimulatedAnnealer | BranchAndBound:
    if algorithm in SA_VARIANTS:
        mode, preserve = SA_VARIANTS[algorithm]
        cfg = SaConfig(
            neighbor_mode=mode,
            preserve_cover=preserve,
            retries_limit=retries_limit,
            reset_probability=reset_probability,
            swap_beyond_cover=swap_beyond_cover,
            seed=seed,
        )
        return SimulatedAnnealer(
            prepared.cover.graph,
            prepared.cover.cliques,
            prepared.instance.n,
            prepared.target,
            prepared.required,
            cfg,
        )
    if algorithm in BNB_VARIANTS:
        family, look_ahead, strategy = BNB_VARIANTS[algorithm]
        cfg = BnbConfig(
            family=family,
            look_ahead=look_ahead,
            strategy=strategy,
            branch_factor=branch_factor,
            seed=seed,
        )
        return BranchAndBound(
            prepared.cover.graph,
            prepared.cover.cliques,
            prepared.s0,
            prepared.instance.n,
            prepared.target,
            prepared.required,
            cfg,
        )
    raise ValueError(f"unknown algorithm id {algorithm!r}; expected one of {ALGORITHM_IDS}")


def run_pipeline(
    inst: Instance,
    algorithm: str,
    seed: int = 0,
    iterations: int | None = None,
    time_limit: float | None = None,
    branch_factor: int | None = None,
    retries_limit: int = 8,
    reset_probability: float = 1e-7,
    swap_beyond_cover: bool = False,
    checkpoint: Checkpoint | None = None,
) -> PipelineResult:
    """Solve an instance with one algorithm, optionally resuming a checkpoint.

    ``iterations`` caps annealing iterations or branch-and-bound node
    expansions; ``time_limit`` is wall-clock seconds.  At least one budget
    is required.  With a checkpoint the run continues where the previous
    one stopped, and the returned cost never exceeds the checkpointed one.
    """
    prepared = prepare_instance(inst, seed=seed)
    solver = build_solver(
        prepared,
        algorithm,
        seed=seed,
        branch_factor=branch_factor,
        retries_limit=retries_limit,
        reset_probability=reset_probability,
        swap_beyond_cover=swap_beyond_cover,
    )

    digest = instance_digest(inst)
    if checkpoint is not None:
        if checkpoint.instance_digest != digest:
            raise CheckpointMismatch("checkpoint belongs to a different instance")
        if checkpoint.algorithm != algorithm:
            raise CheckpointMismatch(
                f"checkpoint was produced by algorithm {checkpoint.algorithm}, not {algorithm}"
            )
        solver.load_state_dict(checkpoint.state)

    if isinstance(solver, SimulatedAnnealer):
        best, best_cost = solver.run(max_iterations=iterations, time_limit=time_limit)
    else:
        best, best_cost = solver.run(max_expansions=iterations, time_limit=time_limit)

    new_checkpoint = Checkpoint(
        instance_digest=digest,
        algorithm=algorithm,
        seed=seed,
        solver="sa" if isinstance(solver, SimulatedAnnealer) else "bnb",
        state=solver.state_dict(),
        best_cost=best_cost,
    )
    report = check_schedule(best, inst, prepared.required)
    return PipelineResult(
        schedule=best,
        cost=best_cost,
        initial_cost=prepared.initial_cost,
        required=prepared.required,
        report=report,
        checkpoint=new_checkpoint,
        algorithm=algorithm,
        seed=seed,
    )


# --------------------------------------------------------------------------
# Instance documents


def instance_to_dict(inst: Instance) -> dict:
    """Canonical JSON-ready form of an instance (also the digest input)."""
    g = inst.graph
    doc: dict = {
        "dimensions": list(g.dimensions),
        "values": {
            name: [
                {"id": v, "label": inst.labels.get(v, str(v))} for v in sorted(g.layers[i])
            ]
            for i, name in enumerate(g.dimensions)
        },
        "edges": sorted([u, v] for u, v in g.edges),
        "scope": {
            "include": {
                g.dimensions[i]: sorted(vs) for i, vs in enumerate(inst.scope.include) if vs
            },
            "exclude": {
                g.dimensions[i]: sorted(vs) for i, vs in enumerate(inst.scope.exclude) if vs
            },
        },
        "n": inst.n,
        "objective": _objective_to_dict(inst.target, g),
    }
    if inst.max_dimension_size is not None:
        doc["max_dimension_size"] = inst.max_dimension_size
    if inst.required is not None:
        doc["required"] = sorted(inst.required)
    if inst.packing is not None:
        doc["packing"] = {
            "vm_dimension": g.dimensions[inst.packing.vm_dimension],
            "capacity": sorted([hw, vm, w] for (hw, vm), w in inst.packing.capacity.items()),
        }
    return doc


def _objective_to_dict(target: TargetSpec | None, g: CompatibilityGraph) -> dict:
    if target is None:
        return {"kind": "constant"}
    if target.kind == ObjectiveKind.DIMENSION:
        return {
            "kind": "dimension",
            "weights": {g.dimensions[i]: w for i, w in sorted(target.weights.items())},
            "targets": {
                g.dimensions[i]: {str(v): mass for v, mass in sorted(group.items())}
                for i, group in enumerate(target.targets)
            },
        }
    if target.kind == ObjectiveKind.RELATIONSHIP:
        return {
            "kind": "relationship",
            "weights": [
                [g.dimensions[i], g.dimensions[j], w]
                for (i, j), w in sorted(target.weights.items())
            ],
            "targets": [
                [u, v, mass]
                for pair, group in sorted(target.targets.items())
                for (u, v), mass in sorted(group.items())
            ],
        }
    return {
        "kind": "combination",
        "targets": [[list(config), mass] for config, mass in sorted(target.targets.items())],
    }


def instance_from_dict(doc: Mapping) -> Instance:
    """Parse an instance document; raw target counts are normalized here."""
    dimensions = list(doc["dimensions"])
    dim_index = {name: i for i, name in enumerate(dimensions)}
    labels: dict[int, str] = {}
    layers: list[list[int]] = []
    for name in dimensions:
        layer = []
        for entry in doc["values"][name]:
            vid = int(entry["id"])
            layer.append(vid)
            if "label" in entry:
                labels[vid] = str(entry["label"])
        layers.append(layer)
    graph = CompatibilityGraph.build(
        dimensions, layers, [(int(u), int(v)) for u, v in doc["edges"]]
    )

    scope_doc = doc.get("scope", {})
    scope = Scope.build(
        len(dimensions),
        include={
            dim_index[name]: [int(v) for v in vs]
            for name, vs in scope_doc.get("include", {}).items()
        },
        exclude={
            dim_index[name]: [int(v) for v in vs]
            for name, vs in scope_doc.get("exclude", {}).items()
        },
    )

    target = _objective_from_dict(doc.get("objective", {"kind": "constant"}), graph, dim_index)

    packing = None
    if "packing" in doc and doc["packing"] is not None:
        p = doc["packing"]
        packing = PackingTable(
            vm_dimension=dim_index[p["vm_dimension"]],
            capacity={(int(hw), int(vm)): int(w) for hw, vm, w in p["capacity"]},
        )

    required = None
    if "required" in doc and doc["required"] is not None:
        required = frozenset(int(v) for v in doc["required"])

    return Instance(
        graph=graph,
        scope=scope,
        n=int(doc["n"]),
        target=target,
        packing=packing,
        labels=labels,
        required=required,
        max_dimension_size=doc.get("max_dimension_size"),
    )


def _objective_from_dict(
    doc: Mapping, graph: CompatibilityGraph, dim_index: Mapping[str, int]
) -> TargetSpec | None:
    kind = doc.get("kind", "constant")
    if kind == "constant":
        return None
    if kind == "dimension":
        groups: list[dict[int, float]] = []
        for i, name in enumerate(graph.dimensions):
            raw = doc.get("targets", {}).get(name, {})
            group = {int(v): float(mass) for v, mass in raw.items()}
            for v in graph.layers[i]:
                group.setdefault(v, 0.0)  # unlisted values get zero target share
            groups.append(group)
        weights = None
        if doc.get("weights"):
            weights = {dim_index[name]: float(w) for name, w in doc["weights"].items()}
        return TargetSpec.for_dimensions(groups, weights)
    if kind == "relationship":
        pair_groups: dict[tuple[int, int], dict[tuple[int, int], float]] = {}
        for u, v, mass in doc["targets"]:
            u, v = int(u), int(v)
            du, dv = graph.dimension_of(u), graph.dimension_of(v)
            if du > dv:
                u, v, du, dv = v, u, dv, du
            pair_groups.setdefault((du, dv), {})[(u, v)] = float(mass)
        # Unlisted compatible pairs of a listed dimension pair get zero share.
        for a, b in sorted(graph.edges):
            da, db = graph.dimension_of(a), graph.dimension_of(b)
            if da > db:
                a, b, da, db = b, a, db, da
            if (da, db) in pair_groups:
                pair_groups[(da, db)].setdefault((a, b), 0.0)
        weights = None
        if doc.get("weights"):
            weights = {
                (dim_index[ni], dim_index[nj]): float(w) for ni, nj, w in doc["weights"]
            }
            weights = {(min(p), max(p)): w for p, w in weights.items()}
        return TargetSpec.for_relationships(pair_groups, weights)
    if kind == "combination":
        targets = {tuple(int(v) for v in config): float(mass) for config, mass in doc["targets"]}
        return TargetSpec.for_combinations(targets)
    raise ValueError(f"unknown objective kind {kind!r}")


def instance_digest(inst: Instance) -> str:
    """Content hash of the canonical instance document (machine independent)."""
    blob = json.dumps(instance_to_dict(inst), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def load_instance(path: str | Path) -> Instance:
    with open(path, "r", encoding="utf-8") as fh:
        return instance_from_dict(json.load(fh))


def save_instance(inst: Instance, path: str | Path) -> None:
    _dump(instance_to_dict(inst), path)


# --------------------------------------------------------------------------
# Schedule documents


def schedule_to_dict(
    result: PipelineResult,
    inst: Instance,
    node_groups: Sequence[NodeGroup] | None = None,
) -> dict:
    labels = inst.labels

    def config_doc(config: Config) -> dict:
        return {
            "ids": list(config),
            "labels": [labels.get(v, str(v)) for v in config],
        }

    doc = {
        "format": "cliquesched-schedule",
        "version": 1,
        "algorithm": result.algorithm,
        "seed": result.seed,
        "n": inst.n,
        "cost": result.cost,
        "initial_cost": result.initial_cost,
        "configs": [config_doc(c) for c in result.schedule],
        "required": sorted(result.required),
        "coverage_report": result.report.as_dict(),
        "node_groups": None,
    }
    if node_groups is not None:
        doc["configs"] = [
            config_doc(g.config) for g in node_groups for _ in range(g.copies)
        ]
        doc["node_groups"] = [
            {"node": i, **config_doc(g.config), "copies": g.copies}
            for i, g in enumerate(node_groups)
        ]
    return doc


def save_schedule(doc: Mapping, path: str | Path) -> None:
    _dump(doc, path)


def load_schedule(path: str | Path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


# --------------------------------------------------------------------------
# Checkpoint documents


def checkpoint_to_dict(ckpt: Checkpoint) -> dict:
    return {
        "format": "cliquesched-checkpoint",
        "version": 1,
        "instance_digest": ckpt.instance_digest,
        "algorithm": ckpt.algorithm,
        "seed": ckpt.seed,
        "solver": ckpt.solver,
        "best_cost": ckpt.best_cost,
        "state": ckpt.state,
    }


def checkpoint_from_dict(doc: Mapping) -> Checkpoint:
    if doc.get("format") != "cliquesched-checkpoint":
        raise CheckpointMismatch("not a checkpoint document")
    return Checkpoint(
        instance_digest=doc["instance_digest"],
        algorithm=doc["algorithm"],
        seed=int(doc["seed"]),
        solver=doc["solver"],
        state=doc["state"],
        best_cost=float(doc["best_cost"]),
    )


def save_checkpoint(ckpt: Checkpoint, path: str | Path) -> None:
    _dump(checkpoint_to_dict(ckpt), path)


def load_checkpoint(path: str | Path) -> Checkpoint:
    with open(path, "r", encoding="utf-8") as fh:
        return checkpoint_from_dict(json.load(fh))


def _dump(doc: Mapping, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")

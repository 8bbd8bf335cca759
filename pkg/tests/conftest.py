"""Shared fixtures: the golden instance and the random instance pool."""

from __future__ import annotations

import random

import pytest

import cliquesched as cs
from cliquesched.errors import (
    CoverExceedsBudget,
    DegenerateTarget,
    EmptyLayer,
    Infeasible,
    TooLarge,
    UnsatisfiableInclude,
)

# Three dimensions (hw/vm/os), eight vertices.  With the scope below the
# surviving graph has exactly three full configurations and the unique
# optimal schedule {(0,3,5) x2, (1,4,6)} at cost zero.
GOLDEN_EDGES = [
    (0, 3), (0, 5), (1, 3), (1, 4), (1, 6), (2, 4),
    (2, 7), (3, 5), (3, 6), (4, 6), (4, 7),
]
GOLDEN_OPTIMUM = ((0, 3, 5), (0, 3, 5), (1, 4, 6))


def golden_graph() -> cs.CompatibilityGraph:
    return cs.CompatibilityGraph.build(
        ["hw", "vm", "os"], [{0, 1, 2}, {3, 4}, {5, 6, 7}], GOLDEN_EDGES
    )


def golden_scope() -> cs.Scope:
    return cs.Scope.build(3, include={0: [0, 1]}, exclude={2: [7]})


def golden_target() -> cs.TargetSpec:
    return cs.TargetSpec.for_dimensions(
        [{0: 0.6, 1: 0.3, 2: 0.1}, {3: 2, 4: 1}, {5: 0.6, 6: 0.3, 7: 0.1}],
        [0.4, 0.4, 0.2],
    )


def golden_instance() -> cs.Instance:
    return cs.Instance(
        graph=golden_graph(),
        scope=golden_scope(),
        n=3,
        target=golden_target(),
        labels={0: "hw-a", 1: "hw-b", 2: "hw-c", 3: "vm-a", 4: "vm-b",
                5: "os-a", 6: "os-b", 7: "os-c"},
    )


@pytest.fixture
def golden() -> cs.Instance:
    return golden_instance()


@pytest.fixture
def golden_scoped() -> cs.CompatibilityGraph:
    return cs.scope_graph(golden_graph(), golden_scope())


def make_random_instance(seed: int) -> cs.Instance | None:
    """One random small instance, or None when the draw is unusable.

    Dimensions in {2, 3}, layer sizes in [2, 4], edge density in
    {0.5, 0.8, 1.0}, n in [2, 4], all three objective kinds, occasional
    exclude scopes.
    """
    rng = random.Random(seed)
    d = rng.choice([2, 3])
    sizes = [rng.randint(2, 4) for _ in range(d)]
    density = rng.choice([0.5, 0.8, 1.0])
    next_id, layers = 0, []
    for size in sizes:
        layers.append(list(range(next_id, next_id + size)))
        next_id += size
    edges = []
    for i in range(d):
        for j in range(i + 1, d):
            for u in layers[i]:
                for v in layers[j]:
                    if rng.random() < density:
                        edges.append((u, v))
    graph = cs.CompatibilityGraph.build([f"d{i}" for i in range(d)], layers, edges)
    kind = rng.choice(list(cs.ObjectiveKind))
    n = rng.randint(2, 4)
    if kind == cs.ObjectiveKind.DIMENSION:
        target = cs.TargetSpec.for_dimensions(
            [{v: rng.randint(1, 9) for v in layer} for layer in layers],
            [rng.randint(1, 3) for _ in range(d)],
        )
    elif kind == cs.ObjectiveKind.RELATIONSHIP:
        groups: dict = {}
        for u, v in edges:
            du, dv = graph.dimension_of(u), graph.dimension_of(v)
            pair = (min(du, dv), max(du, dv))
            unit = (u, v) if du < dv else (v, u)
            groups.setdefault(pair, {})[unit] = rng.randint(0, 9)
        if not groups:
            return None
        try:
            target = cs.TargetSpec.for_relationships(groups)
        except DegenerateTarget:
            return None
    else:
        cliques = cs.enumerate_cliques(graph)
        if not cliques:
            return None
        chosen = {c: rng.randint(1, 9) for c in cliques if rng.random() < 0.7}
        target = cs.TargetSpec.for_combinations(chosen or {cliques[0]: 1})
    scope = cs.Scope.empty(d)
    if rng.random() < 0.3:
        i = rng.randrange(d)
        layer = sorted(graph.layers[i])
        if len(layer) > 1:
            scope = cs.Scope.build(d, exclude={i: [rng.choice(layer)]})
    inst = cs.Instance(graph=graph, scope=scope, n=n, target=target)
    if cs.validate_instance(inst):
        return None
    return inst


def build_instance_pool(count: int = 50, max_search: int = 50_000):
    """Deterministic pool of solvable instances with their exact optima.

    Each entry is (seed, instance, oracle_schedule, oracle_cost).  The
    clique-count guard keeps exhaustive enumeration over all partial
    schedules tractable.
    """
    pool = []
    seed = 0
    while len(pool) < count:
        seed += 1
        if seed > 10_000:
            raise RuntimeError("instance generator exhausted")
        inst = make_random_instance(seed)
        if inst is None:
            continue
        try:
            scoped = cs.scope_graph(inst.graph, inst.scope)
            cliques = cs.enumerate_cliques(scoped)
            if not cliques or len(cliques) ** inst.n > max_search:
                continue
            opt_schedule, opt_cost = cs.brute_force(inst)
            cs.prepare_instance(inst, seed=seed)
        except (Infeasible, DegenerateTarget, TooLarge, UnsatisfiableInclude,
                EmptyLayer, CoverExceedsBudget):
            continue
        pool.append((seed, inst, opt_schedule, opt_cost))
    return pool


@pytest.fixture(scope="session")
def instance_pool():
    pool = build_instance_pool(50)
    kinds = {inst.target.kind for _, inst, _, _ in pool}
    assert kinds == set(cs.ObjectiveKind), "pool must exercise all objective kinds"
    return pool


def synthetic_fleet_instance(n: int = 150) -> cs.Instance:
    """A 150-node, three-dimension instance for continuous-training tests."""
    rng = random.Random(99)
    sizes = [12, 8, 10]
    next_id, layers = 0, []
    for size in sizes:
        layers.append(list(range(next_id, next_id + size)))
        next_id += size
    edges = []
    for i in range(3):
        for j in range(i + 1, 3):
            for u in layers[i]:
                for v in layers[j]:
                    if rng.random() < 0.55:
                        edges.append((u, v))
    graph = cs.CompatibilityGraph.build(["hw", "bios", "vm"], layers, edges)
    target = cs.TargetSpec.for_dimensions(
        [{v: rng.randint(1, 20) for v in layer} for layer in layers]
    )
    return cs.Instance(graph=graph, scope=cs.Scope.empty(3), n=n, target=target)

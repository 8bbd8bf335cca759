"""Clique-cover reduction gadget and a brute-force oracle for small instances.

``reduce_to_instance`` converts "can graph G be covered by at most n
cliques?" into a scheduling instance: one dimension per vertex of G, each
dimension holding a copy of every vertex.  Copies of distinct vertices
are compatible when the originals are adjacent; copies of the same vertex
are compatible across every dimension pair except the first two, which
rules out configurations that collapse to a single original vertex.  The
instance's required-coverage set holds one copy of each original (the
diagonal), so any feasible schedule maps back to a cover of G.

Because collapsing configurations are ruled out, covers on both sides of
the reduction consist of cliques with at least two vertices;
``find_clique_cover`` (the independent validator) searches under the same
convention.

``brute_force`` enumerates every schedule of a small instance and is the
correctness anchor for the optimizers.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, combinations_with_replacement
from typing import Hashable, Iterable, Sequence

from .errors import EmptyLayer, Infeasible, InvalidSolution, TooLarge
from .graphops import enumerate_cliques, scope_graph
from .model import CompatibilityGraph, Config, Instance, Schedule, Scope, schedule_vertices
from .objective import adjust_targets, cost


@dataclass(frozen=True)
class GeneralGraph:
    """Plain undirected graph (no layers), the reduction's input."""

    vertices: tuple[Hashable, ...]
    edges: frozenset[tuple[Hashable, Hashable]]

    @classmethod
    def build(
        cls, vertices: Iterable[Hashable], edges: Iterable[tuple[Hashable, Hashable]]
    ) -> "GeneralGraph":
        vs = tuple(sorted(set(vertices), key=repr))
        known = set(vs)
        canon = set()
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop on {u!r}")
            if u not in known or v not in known:
                raise ValueError(f"edge ({u!r}, {v!r}) references an unknown vertex")
            canon.add(tuple(sorted((u, v), key=repr)))
        return cls(vs, frozenset(canon))

    def has_edge(self, u: Hashable, v: Hashable) -> bool:
        return tuple(sorted((u, v), key=repr)) in self.edges


@dataclass(frozen=True)
class ReducedInstance:
    """The scheduling instance for a cover question, plus its bookkeeping."""

    instance: Instance
    graph: GeneralGraph
    diagonal: frozenset[int]  # the copies the schedule must cover


def copy_id(dimension: int, original_index: int, size: int) -> int:
    """Vertex id of the dimension-``dimension`` copy of original ``original_index``."""
    return dimension * size + original_index


def reduce_to_instance(graph: GeneralGraph, n: int) -> ReducedInstance:
    """Build the scheduling instance whose feasibility answers the cover question."""
    if len(graph.vertices) < 2:
        raise ValueError("need at least two vertices")
    m = len(graph.vertices)
    index = {v: k for k, v in enumerate(graph.vertices)}
    dimensions = tuple(f"copy{i}" for i in range(m))
    layers = [frozenset(copy_id(i, k, m) for k in range(m)) for i in range(m)]
    edges: set[tuple[int, int]] = set()
    for i, j in combinations(range(m), 2):
        for a, b in graph.edges:
            ka, kb = index[a], index[b]
            edges.add((copy_id(i, ka, m), copy_id(j, kb, m)))
            edges.add((copy_id(i, kb, m), copy_id(j, ka, m)))
        if (i, j) != (0, 1):
            for k in range(m):
                edges.add((copy_id(i, k, m), copy_id(j, k, m)))
    labels = {
        copy_id(i, k, m): f"{graph.vertices[k]!r}@{i}" for i in range(m) for k in range(m)
    }
    diagonal = frozenset(copy_id(i, i, m) for i in range(m))
    instance = Instance(
        graph=CompatibilityGraph.build(dimensions, layers, edges),
        scope=Scope.empty(m),
        n=n,
        target=None,  # feasibility only: every schedule scores zero
        labels=labels,
        required=diagonal,
    )
    return ReducedInstance(instance=instance, graph=graph, diagonal=diagonal)


def map_back(schedule: Sequence[Config], graph: GeneralGraph) -> list[frozenset]:
    """Map a schedule of a reduced instance to a clique cover of the graph.

    Each configuration's copies are consolidated to their originals.
    Raises InvalidSolution when a mapped set is not a clique or the sets
    do not cover every vertex.
    """
    m = len(graph.vertices)
    covers: list[frozenset] = []
    for config in schedule:
        originals = frozenset(graph.vertices[v % m] for v in config)
        if len(originals) < 2:
            raise InvalidSolution(f"configuration {config} collapses to a single vertex")
        for u, v in combinations(sorted(originals, key=repr), 2):
            if not graph.has_edge(u, v):
                raise InvalidSolution(
                    f"configuration {config} maps to non-adjacent pair ({u!r}, {v!r})"
                )
        covers.append(originals)
    missing = set(graph.vertices) - set().union(*covers) if covers else set(graph.vertices)
    if missing:
        raise InvalidSolution(f"mapped cover misses vertices {sorted(missing, key=repr)}")
    return covers


def find_clique_cover(graph: GeneralGraph, n: int) -> tuple[frozenset, ...] | None:
    """Direct search for a cover of all vertices by at most ``n`` cliques.

    Cliques must span at least two vertices (single vertices do not
    count), matching the convention of the reduction.  Returns the first
    cover found in deterministic order, or None.
    """
    cliques = _all_cliques(graph)
    order = sorted(graph.vertices, key=repr)

    def extend(covered: frozenset, used: tuple) -> tuple[frozenset, ...] | None:
        if covered >= set(graph.vertices):
            return used
        if len(used) >= n:
            return None
        pivot = next(v for v in order if v not in covered)
        for clique in cliques:
            if pivot in clique:
                result = extend(covered | clique, used + (clique,))
                if result is not None:
                    return result
        return None

    return extend(frozenset(), ())


def _all_cliques(graph: GeneralGraph) -> list[frozenset]:
    """Every clique with >= 2 vertices, largest first (helps the cover search)."""
    vs = sorted(graph.vertices, key=repr)
    out: list[frozenset] = []
    for size in range(2, len(vs) + 1):
        for group in combinations(vs, size):
            if all(graph.has_edge(u, v) for u, v in combinations(group, 2)):
                out.append(frozenset(group))
    return sorted(out, key=lambda c: (-len(c), sorted(map(repr, c))))


def brute_force(
    inst: Instance,
    max_space: int = 10**3,
    max_schedules: int = 10**6,
) -> tuple[Schedule, float]:
    """Exact minimum-cost schedule by exhaustive enumeration.

    Enumerates every configuration of the scoped graph, then every
    multiset of ``n`` of them, and keeps the cheapest one that covers the
    required vertices.  Raises TooLarge beyond the guards and Infeasible
    when no schedule satisfies the constraints.  The returned schedule is
    in canonical (sorted) order.
    """
    try:
        scoped = scope_graph(inst.graph, inst.scope)
    except EmptyLayer as exc:
        raise Infeasible(str(exc)) from exc

    space = 1
    for layer in scoped.layers:
        space *= len(layer)
    if space > max_space:
        raise TooLarge(f"configuration space {space} exceeds the guard {max_space}")

    cliques = enumerate_cliques(scoped)
    if not cliques:
        raise Infeasible("the scoped graph admits no full configuration")

    coverable = frozenset(schedule_vertices(cliques))
    include = inst.scope.include_union
    if not include <= coverable:
        raise Infeasible(f"include vertices {sorted(include - coverable)} cannot be covered")
    if inst.required is not None:
        required = inst.required
        if not required <= coverable:
            raise Infeasible(f"required vertices {sorted(required - coverable)} cannot be covered")
    else:
        required = coverable

    target = None if inst.target is None else adjust_targets(inst.target, scoped.subgraph(coverable))

    if target is None:
        schedule = _first_cover(cliques, required, inst.n)
        if schedule is None:
            raise Infeasible(f"no {inst.n}-configuration schedule covers the required vertices")
        return schedule, 0.0

    if len(cliques) ** inst.n > max_schedules:
        raise TooLarge(
            f"{len(cliques)}^{inst.n} candidate schedules exceed the guard {max_schedules}"
        )

    best: Schedule | None = None
    best_cost = float("inf")
    for schedule in combinations_with_replacement(cliques, inst.n):
        if not required <= schedule_vertices(schedule):
            continue
        value = cost(schedule, target)
        if value < best_cost:
            best = schedule
            best_cost = value
    if best is None:
        raise Infeasible(f"no {inst.n}-configuration schedule covers the required vertices")
    return best, best_cost


def _first_cover(cliques: Sequence[Config], required: frozenset[int], n: int) -> Schedule | None:
    """First multiset of ``n`` cliques covering ``required`` (set-cover search)."""
    order = sorted(required)

    def extend(covered: frozenset, used: tuple) -> tuple | None:
        missing = [v for v in order if v not in covered]
        if not missing:
            return used
        if len(used) >= n:
            return None
        pivot = missing[0]
        for clique in cliques:
            if pivot in clique:
                result = extend(covered | frozenset(clique), used + (clique,))
                if result is not None:
                    return result
        return None

    found = extend(frozenset(), ())
    if found is None:
        return None
    padded = found + tuple(cliques[0] for _ in range(n - len(found)))
    return tuple(sorted(padded))

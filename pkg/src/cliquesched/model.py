"""Core data model: compatibility graphs, scopes, instances, and schedules.

A problem instance consists of a d-partite compatibility graph (one layer
of vertices per testing dimension, edges only between layers), a
per-dimension include/exclude scope, a node budget ``n``, and an optional
target distribution.  A solution is a schedule: an ordered list of ``n``
node configurations, each configuration picking one vertex per dimension
such that all picked vertices are pairwise compatible (a size-d clique).

All types here are immutable values; solvers share them freely.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING, Iterable, Mapping

if TYPE_CHECKING:  # pragma: no cover - import cycle guards
    from .objective import TargetSpec
    from .pipeline import PackingTable

# A node configuration: tuple of vertex ids, slot i holds the dimension-i value.
Config = tuple[int, ...]
# A schedule is an ordered list of configurations; order matters only for
# reproducibility, every constraint treats it as a multiset.
Schedule = tuple[Config, ...]


@dataclass(frozen=True)
class CompatibilityGraph:
    """Undirected d-partite graph of dimension values.

    ``dimensions`` are the layer names, ``layers[i]`` the vertex ids of
    dimension i, and ``edges`` canonical ``(min, max)`` id pairs.  Vertex
    ids are globally unique integers.
    """

    dimensions: tuple[str, ...]
    layers: tuple[frozenset[int], ...]
    edges: frozenset[tuple[int, int]]

    @classmethod
    def build(
        cls,
        dimensions: Iterable[str],
        layers: Iterable[Iterable[int]],
        edges: Iterable[tuple[int, int]],
    ) -> "CompatibilityGraph":
        """Canonicalize inputs; no structural validation (see validate_instance)."""
        return cls(
            dimensions=tuple(dimensions),
            layers=tuple(frozenset(layer) for layer in layers),
            edges=frozenset((min(u, v), max(u, v)) for u, v in edges),
        )

    @property
    def d(self) -> int:
        return len(self.dimensions)

    @cached_property
    def vertices(self) -> frozenset[int]:
        out: set[int] = set()
        for layer in self.layers:
            out |= layer
        return frozenset(out)

    @cached_property
    def vertex_dimension(self) -> dict[int, int]:
        return {v: i for i, layer in enumerate(self.layers) for v in layer}

    @cached_property
    def vertex_order(self) -> tuple[int, ...]:
        """All vertex ids in ascending order (stable sampling pool)."""
        return tuple(sorted(self.vertices))

    @cached_property
    def adjacency(self) -> dict[int, frozenset[int]]:
        nbrs: dict[int, set[int]] = {v: set() for v in self.vertices}
        for u, v in self.edges:
            if u in nbrs and v in nbrs:
                nbrs[u].add(v)
                nbrs[v].add(u)
        return {v: frozenset(ns) for v, ns in nbrs.items()}

    def dimension_of(self, v: int) -> int:
        return self.vertex_dimension[v]

    def neighbors(self, v: int) -> frozenset[int]:
        return self.adjacency[v]

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edges

    def subgraph(self, keep: Iterable[int]) -> "CompatibilityGraph":
        """Induced subgraph on ``keep``; dimension count is preserved."""
        kept = frozenset(keep)
        return CompatibilityGraph(
            dimensions=self.dimensions,
            layers=tuple(layer & kept for layer in self.layers),
            edges=frozenset(e for e in self.edges if e[0] in kept and e[1] in kept),
        )

    def remove_vertices(self, drop: Iterable[int]) -> "CompatibilityGraph":
        return self.subgraph(self.vertices - frozenset(drop))


@dataclass(frozen=True)
class Scope:
    """Per-dimension include/exclude vertex sets.

    An empty include set means "no include restriction for this dimension".
    """

    include: tuple[frozenset[int], ...]
    exclude: tuple[frozenset[int], ...]

    @classmethod
    def empty(cls, d: int) -> "Scope":
        return cls(tuple(frozenset() for _ in range(d)), tuple(frozenset() for _ in range(d)))

    @classmethod
    def build(
        cls,
        d: int,
        include: Mapping[int, Iterable[int]] | None = None,
        exclude: Mapping[int, Iterable[int]] | None = None,
    ) -> "Scope":
        inc = [frozenset() for _ in range(d)]
        exc = [frozenset() for _ in range(d)]
        for i, vs in (include or {}).items():
            inc[i] = frozenset(vs)
        for i, vs in (exclude or {}).items():
            exc[i] = frozenset(vs)
        return cls(tuple(inc), tuple(exc))

    @cached_property
    def include_union(self) -> frozenset[int]:
        out: set[int] = set()
        for s in self.include:
            out |= s
        return frozenset(out)


@dataclass(frozen=True)
class Instance:
    """A full problem instance.

    ``required`` optionally pins the exact set of vertices the schedule
    must cover; when ``None`` the pipeline derives it (all vertices that
    survive scoping, pruning, and coverability filtering).  Instances
    produced by the clique-cover reduction use this field.
    """

    graph: CompatibilityGraph
    scope: Scope
    n: int
    target: "TargetSpec | None" = None
    packing: "PackingTable | None" = None
    labels: Mapping[int, str] = field(default_factory=dict)
    required: frozenset[int] | None = None
    max_dimension_size: int | None = None


@dataclass(frozen=True)
class ConstraintReport:
    """One flag per schedule constraint; all True means the schedule is valid."""

    length_ok: bool
    one_per_dimension: bool
    pairwise_compatible: bool
    excludes_avoided: bool
    required_covered: bool
    include_exclusive: bool

    @property
    def all_satisfied(self) -> bool:
        return all(self.flags())

    def flags(self) -> tuple[bool, ...]:
        return (
            self.length_ok,
            self.one_per_dimension,
            self.pairwise_compatible,
            self.excludes_avoided,
            self.required_covered,
            self.include_exclusive,
        )

    def as_dict(self) -> dict[str, bool]:
        return {
            "length": self.length_ok,
            "one_per_dimension": self.one_per_dimension,
            "pairwise_compatible": self.pairwise_compatible,
            "excludes_avoided": self.excludes_avoided,
            "required_covered": self.required_covered,
            "include_exclusive": self.include_exclusive,
        }


def is_clique(graph: CompatibilityGraph, vertices: Iterable[int]) -> bool:
    """True when the vertices occupy distinct dimensions and are pairwise adjacent."""
    vs = list(vertices)
    dims = set()
    for v in vs:
        if v not in graph.vertices:
            return False
        dims.add(graph.dimension_of(v))
    if len(dims) != len(vs):
        return False
    return all(graph.has_edge(u, v) for i, u in enumerate(vs) for v in vs[i + 1 :])


def make_config(graph: CompatibilityGraph, vertices: Iterable[int]) -> Config:
    """Order a full set of clique vertices into a configuration tuple.

    Raises ValueError unless exactly one vertex per dimension is given and
    the vertices form a clique.
    """
    slots: dict[int, int] = {}
    for v in vertices:
        dim = graph.dimension_of(v)
        if dim in slots:
            raise ValueError(f"two vertices in dimension {dim}")
        slots[dim] = v
    if len(slots) != graph.d:
        raise ValueError("configuration must span every dimension")
    config = tuple(slots[i] for i in range(graph.d))
    if not is_clique(graph, config):
        raise ValueError("vertices are not pairwise compatible")
    return config


def schedule_vertices(schedule: Iterable[Config]) -> set[int]:
    out: set[int] = set()
    for config in schedule:
        out.update(config)
    return out


def covers(schedule: Iterable[Config], required: Iterable[int]) -> bool:
    return set(required) <= schedule_vertices(schedule)


def validate_instance(inst: Instance) -> list[str]:
    """Return a report of every violated instance invariant (empty = valid).

    Pure diagnostics: never raises, identical input yields an identical
    report.
    """
    from .objective import ObjectiveKind  # local import to avoid a cycle

    violations: list[str] = []
    g = inst.graph
    d = g.d

    if d < 2:
        violations.append(f"graph must have at least 2 dimensions, got {d}")

    seen: dict[int, int] = {}
    for i, layer in enumerate(g.layers):
        for v in layer:
            if v in seen:
                violations.append(f"vertex {v} appears in dimensions {seen[v]} and {i}")
            else:
                seen[v] = i

    for u, v in sorted(g.edges):
        if u == v:
            violations.append(f"self-loop on vertex {u}")
            continue
        if u not in seen or v not in seen:
            violations.append(f"edge ({u}, {v}) references an unknown vertex")
        elif seen[u] == seen[v]:
            violations.append(f"intra-layer edge ({u}, {v}) in dimension {seen[u]}")

    if len(inst.scope.include) != d or len(inst.scope.exclude) != d:
        violations.append("scope must provide one include and one exclude set per dimension")
    else:
        for i in range(d):
            overlap = inst.scope.include[i] & inst.scope.exclude[i]
            if overlap:
                violations.append(f"include/exclude overlap, dimension {i}: {sorted(overlap)}")
            for v in sorted(inst.scope.include[i] | inst.scope.exclude[i]):
                if v not in g.layers[i]:
                    violations.append(f"scope vertex {v} is not in dimension {i}")

    if inst.n < 1:
        violations.append(f"n must be positive, got {inst.n}")

    if inst.required is not None:
        for v in sorted(inst.required - g.vertices):
            violations.append(f"required vertex {v} is not in the graph")

    if inst.max_dimension_size is not None and inst.max_dimension_size < 1:
        violations.append("max_dimension_size must be positive")

    if inst.target is not None:
        t = inst.target
        if t.kind == ObjectiveKind.DIMENSION:
            if len(t.targets) != d:
                violations.append("dimension targets must cover every dimension")
            for i, group in enumerate(t.targets):
                for v in sorted(group):
                    if i >= d or v not in g.layers[i]:
                        violations.append(f"target vertex {v} is not in dimension {i}")
        elif t.kind == ObjectiveKind.RELATIONSHIP:
            for (i, j), group in sorted(t.targets.items()):
                for u, v in sorted(group):
                    if u not in g.vertices or v not in g.vertices:
                        violations.append(f"target pair ({u}, {v}) references an unknown vertex")
                    elif (g.dimension_of(u), g.dimension_of(v)) != (i, j):
                        violations.append(f"target pair ({u}, {v}) does not match dimensions ({i}, {j})")
        else:
            for config in sorted(t.targets):
                if len(config) != d:
                    violations.append(f"target configuration {config} has wrong arity")
                elif any(v not in g.vertices for v in config):
                    violations.append(f"target configuration {config} references an unknown vertex")

    if inst.packing is not None:
        p = inst.packing
        if not 0 <= p.vm_dimension < d:
            violations.append(f"packing vm_dimension {p.vm_dimension} out of range")
        for (hw, vm), w in sorted(p.capacity.items()):
            if w < 1:
                violations.append(f"packing capacity for ({hw}, {vm}) must be >= 1, got {w}")

    return violations


def check_schedule(
    schedule: Iterable[Config],
    inst: Instance,
    required: Iterable[int],
) -> ConstraintReport:
    """Evaluate the six schedule constraints against an instance.

    ``required`` is the coverage obligation: the vertex set that must
    appear in the schedule (normally computed by the graph stage after
    scoping and pruning).
    """
    g = inst.graph
    configs = list(schedule)
    required = set(required)

    length_ok = len(configs) == inst.n

    one_per_dimension = all(
        len(c) == g.d and all(c[i] in g.layers[i] for i in range(g.d)) for c in configs
    )

    pairwise_compatible = all(
        g.has_edge(c[i], c[j])
        for c in configs
        for i in range(len(c))
        for j in range(i + 1, len(c))
    )

    used = schedule_vertices(configs)
    excludes_avoided = all(not (used & exc) for exc in inst.scope.exclude)
    required_covered = required <= used
    include_exclusive = True
    for i, inc in enumerate(inst.scope.include):
        if inc and i < g.d:
            outside = (g.layers[i] - inc) & used
            if outside:
                include_exclusive = False
                break

    return ConstraintReport(
        length_ok=length_ok,
        one_per_dimension=one_per_dimension,
        pairwise_compatible=pairwise_compatible,
        excludes_avoided=excludes_avoided,
        required_covered=required_covered,
        include_exclusive=include_exclusive,
    )

"""Graph algorithms: scoping, pruning, layer-size restriction, and clique cover.

The cover construction grows one clique at a time with a depth-first
extension search: every added vertex must neighbor all vertices chosen so
far, vertices not yet covered by any clique are tried before covered ones,
and the search backtracks on dead ends.  Running it from every uncovered
vertex (include-scope vertices first) yields a cover of all coverable
vertices.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Iterator

from .errors import EmptyLayer, UnsatisfiableInclude
from .model import CompatibilityGraph, Config, Scope

if TYPE_CHECKING:  # pragma: no cover
    from .objective import TargetSpec


@dataclass(frozen=True)
class CliqueCover:
    """A set of configurations covering all coverable vertices.

    ``graph`` is the input graph with uncoverable vertices removed;
    ``covered`` equals the union of all clique members.
    """

    cliques: tuple[Config, ...]
    covered: frozenset[int]
    graph: CompatibilityGraph


def scope_graph(graph: CompatibilityGraph, scope: Scope) -> CompatibilityGraph:
    """Apply the include/exclude scope, dropping out-of-scope vertices.

    For each dimension the excluded vertices are removed; when an include
    set is given, everything outside it is removed as well.  Raises
    EmptyLayer when a dimension loses all of its vertices.
    """
    keep: set[int] = set()
    for i, layer in enumerate(graph.layers):
        kept = layer - scope.exclude[i]
        if scope.include[i]:
            kept &= scope.include[i]
        if not kept:
            raise EmptyLayer(f"dimension {i} ({graph.dimensions[i]}) has no vertices in scope")
        keep |= kept
    return graph.subgraph(keep)


def prune_graph(graph: CompatibilityGraph, include_union: Iterable[int]) -> CompatibilityGraph:
    """Remove vertices that cannot participate in any full configuration.

    Iterates to a fixed point: a non-protected vertex is dropped when it
    lacks an edge to some other layer, or (when ``include_union`` is
    non-empty) has no edge to any protected vertex.  Raises
    UnsatisfiableInclude when a protected vertex loses an entire layer of
    neighbors, and EmptyLayer when a dimension empties.
    """
    include = frozenset(include_union)
    g = graph
    while True:
        drop: set[int] = set()
        for i, layer in enumerate(g.layers):
            for v in layer:
                missing_layer = any(
                    j != i and not (g.neighbors(v) & other)
                    for j, other in enumerate(g.layers)
                )
                if v in include:
                    if missing_layer:
                        raise UnsatisfiableInclude(
                            f"include vertex {v} has no compatible value in some dimension"
                        )
                    continue
                if missing_layer or (include and not (g.neighbors(v) & include)):
                    drop.add(v)
        if not drop:
            return g
        g = g.remove_vertices(drop)
        for i, layer in enumerate(g.layers):
            if not layer:
                raise EmptyLayer(f"dimension {i} ({g.dimensions[i]}) emptied during pruning")


def restrict_dimension_size(
    graph: CompatibilityGraph,
    target: "TargetSpec | None",
    max_size: int,
    protected: Iterable[int],
) -> CompatibilityGraph:
    """Cap each layer at ``max_size`` vertices, keeping the most wanted ones.

    Vertices are ranked by their prevalence in the target distribution
    (ties broken by ascending id); protected vertices are always kept,
    even when that leaves a layer above the cap.
    """
    protected = frozenset(protected)
    prevalence = _vertex_prevalence(target)
    keep: set[int] = set()
    for layer in graph.layers:
        safe = layer & protected
        rest = sorted(layer - protected, key=lambda v: (-prevalence.get(v, 0.0), v))
        room = max(0, max_size - len(safe))
        keep |= safe
        keep.update(rest[:room])
    return graph.subgraph(keep)


def _vertex_prevalence(target: "TargetSpec | None") -> dict[int, float]:
    """Per-vertex target mass, summed over every unit mentioning the vertex."""
    if target is None:
        return {}
    from .objective import ObjectiveKind

    prevalence: dict[int, float] = {}
    if target.kind == ObjectiveKind.DIMENSION:
        for group in target.targets:
            for v, mass in group.items():
                prevalence[v] = prevalence.get(v, 0.0) + mass
    elif target.kind == ObjectiveKind.RELATIONSHIP:
        for group in target.targets.values():
            for (u, v), mass in group.items():
                prevalence[u] = prevalence.get(u, 0.0) + mass
                prevalence[v] = prevalence.get(v, 0.0) + mass
    else:
        for config, mass in target.targets.items():
            for v in config:
                prevalence[v] = prevalence.get(v, 0.0) + mass
    return prevalence


def iter_extensions(
    graph: CompatibilityGraph,
    seed: Iterable[int],
    uncovered: frozenset[int] | set[int] = frozenset(),
    rng: random.Random | None = None,
) -> Iterator[Config]:
    """Yield every full configuration containing ``seed``, best-first.

    Depth-first extension: each added vertex must neighbor all chosen
    vertices.  The next dimension to fill is the one with the fewest
    candidates; within a dimension, uncovered candidates come before
    covered ones, and ``rng`` (when given) shuffles within each class.
    Yields nothing when the seed is not a partial clique.
    """
    state = _seed_state(graph, seed)
    if state is None:
        return
    chosen, candidates = state
    yield from _extend(graph, chosen, candidates, frozenset(uncovered), rng)


def _candidate_order(
    pool: frozenset[int], uncovered: frozenset[int], rng: random.Random | None
) -> list[int]:
    """Uncovered candidates first, rng shuffling within each class."""
    fresh = sorted(v for v in pool if v in uncovered)
    stale = sorted(v for v in pool if v not in uncovered)
    if rng is not None:
        rng.shuffle(fresh)
        rng.shuffle(stale)
    return fresh + stale


def _extend(
    graph: CompatibilityGraph,
    chosen: dict[int, int],
    candidates: dict[int, frozenset[int]],
    uncovered: frozenset[int],
    rng: random.Random | None,
) -> Iterator[Config]:
    if not candidates:
        yield tuple(chosen[i] for i in range(graph.d))
        return
    # Fail-first: fill the dimension with the fewest remaining candidates.
    j = min(candidates, key=lambda k: (len(candidates[k]), k))
    pool = candidates[j]
    if not pool:
        return
    rest = {k: c for k, c in candidates.items() if k != j}
    for v in _candidate_order(pool, uncovered, rng):
        chosen[j] = v
        narrowed = {k: c & graph.neighbors(v) for k, c in rest.items()}
        yield from _extend(graph, chosen, narrowed, uncovered, rng)
        del chosen[j]


def _seed_state(
    graph: CompatibilityGraph, seed: Iterable[int]
) -> tuple[dict[int, int], dict[int, frozenset[int]]] | None:
    """Validate a seed and compute per-dimension candidate pools."""
    seed = list(seed)
    chosen: dict[int, int] = {}
    for v in seed:
        if v not in graph.vertices:
            return None
        dim = graph.dimension_of(v)
        if dim in chosen:
            return None
        chosen[dim] = v
    for i, u in enumerate(seed):
        for v in seed[i + 1 :]:
            if not graph.has_edge(u, v):
                return None
    candidates: dict[int, frozenset[int]] = {}
    for j in range(graph.d):
        if j in chosen:
            continue
        pool = graph.layers[j]
        for v in chosen.values():
            pool &= graph.neighbors(v)
        candidates[j] = pool
    return chosen, candidates


def build_clique(
    graph: CompatibilityGraph,
    seed: Iterable[int],
    uncovered: frozenset[int] | set[int] = frozenset(),
    rng: random.Random | None = None,
) -> Config | None:
    """First full configuration containing ``seed``, or None when none exists.

    Visits candidates in exactly the order ``iter_extensions`` would, but
    without generator plumbing (this runs in the annealing hot loop).
    """
    state = _seed_state(graph, seed)
    if state is None:
        return None
    chosen, candidates = state
    return _first_extension(graph, chosen, candidates, frozenset(uncovered), rng)


def _first_extension(
    graph: CompatibilityGraph,
    chosen: dict[int, int],
    candidates: dict[int, frozenset[int]],
    uncovered: frozenset[int],
    rng: random.Random | None,
) -> Config | None:
    if not candidates:
        return tuple(chosen[i] for i in range(graph.d))
    if len(candidates) == 1:
        # any remaining candidate already neighbors every chosen vertex
        ((j, pool),) = candidates.items()
        order = _candidate_order(pool, uncovered, rng)
        if not order:
            return None
        chosen[j] = order[0]
        found = tuple(chosen[i] for i in range(graph.d))
        del chosen[j]
        return found
    j = min(candidates, key=lambda k: (len(candidates[k]), k))
    pool = candidates[j]
    if not pool:
        return None
    rest = {k: c for k, c in candidates.items() if k != j}
    for v in _candidate_order(pool, uncovered, rng):
        chosen[j] = v
        narrowed = {k: c & graph.neighbors(v) for k, c in rest.items()}
        found = _first_extension(graph, chosen, narrowed, uncovered, rng)
        if found is not None:
            return found
        del chosen[j]
    return None


def enumerate_cliques(graph: CompatibilityGraph, limit: int | None = None) -> list[Config]:
    """All full configurations of the graph in ascending order.

    ``limit`` stops the enumeration early; passing None enumerates
    everything (use only on small graphs).
    """
    out: list[Config] = []
    if not graph.vertices:
        return out
    base = min(range(graph.d), key=lambda i: (len(graph.layers[i]), i))
    for v in sorted(graph.layers[base]):
        for config in iter_extensions(graph, (v,)):
            out.append(config)
            if limit is not None and len(out) >= limit:
                return sorted(out)
    return sorted(out)


def clique_cover(
    graph: CompatibilityGraph,
    include_union: Iterable[int],
    rng: random.Random | None = None,
    vertices: Iterable[int] | None = None,
    initial_cliques: Iterable[Config] = (),
    initial_covered: Iterable[int] = (),
) -> CliqueCover:
    """Cover vertices with full configurations, one extension search per seed.

    Seeds are the uncovered members of ``vertices`` (default: the whole
    graph), protected vertices first, each class in ascending id order.
    Seeds that admit no configuration are removed from the graph, unless
    protected, in which case UnsatisfiableInclude is raised.  ``vertices``
    plus the ``initial_*`` arguments allow covering in stages (e.g. the
    include scope before a layer-size restriction, the rest after).
    """
    include = frozenset(include_union)
    cliques = list(initial_cliques)
    covered = set(initial_covered)
    g = graph
    pool = g.vertices if vertices is None else (frozenset(vertices) & g.vertices)
    seeds = sorted(pool & include) + sorted(pool - include)
    for v in seeds:
        if v in covered or v not in g.vertices:
            continue
        clique = build_clique(g, (v,), uncovered=g.vertices - covered, rng=rng)
        if clique is None:
            if v in include:
                raise UnsatisfiableInclude(f"vertex {v} cannot be covered by any configuration")
            g = g.remove_vertices((v,))
        else:
            cliques.append(clique)
            covered.update(clique)
    return CliqueCover(cliques=tuple(cliques), covered=frozenset(covered), graph=g)


def distinct_cliques_roundrobin(
    iterators: Iterable[Iterator[Config]],
    limit: int,
    seen: Iterable[Config] = (),
) -> list[Config]:
    """Drain clique iterators round-robin, keeping the first ``limit`` distinct ones.

    Each turn pulls one *new* clique from an iterator (skipping repeats),
    so the first round yields at most one clique per source before any
    source contributes a second.
    """
    found: list[Config] = []
    known = set(seen)
    active = deque(iterators)
    while active and len(found) < limit:
        it = active.popleft()
        for config in it:
            if config not in known:
                known.add(config)
                found.append(config)
                active.append(it)
                break
    return found

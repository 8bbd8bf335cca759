"""Branch and bound over schedules.

Two branching families: ``from-scratch`` assembles a schedule clique by
clique (each added clique must cover a new vertex until coverage is
complete), while ``refine`` overwrites the expanded coverage schedule
position by position, only with cliques that keep coverage attainable by
the remaining suffix.  Nodes are pruned against the incumbent using the
greedy relaxation bound, which never exceeds the cost of any real
completion, so an exhausted tree proves optimality.
"""

from __future__ import annotations

import heapq
import random
import time
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .graphops import distinct_cliques_roundrobin, iter_extensions
from .model import CompatibilityGraph, Config, Schedule, schedule_vertices
from .objective import TargetSpec, cost, lower_bound


class Family(str, Enum):
    SCRATCH = "from-scratch"
    REFINE = "refine"


class Strategy(str, Enum):
    DEPTH_FIRST = "depth-first"
    DEPTH_FIRST_BEST_FIRST = "depth-first-best-first"
    BEST_FIRST_DEPTH_FIRST = "best-first-depth-first"


DEFAULT_BRANCH_FACTOR = {
    Strategy.DEPTH_FIRST: 500,
    Strategy.DEPTH_FIRST_BEST_FIRST: 500,
    # The global best-first queue holds far more open nodes, so it runs
    # with a smaller branch factor by default.
    Strategy.BEST_FIRST_DEPTH_FIRST: 50,
}


@dataclass(frozen=True)
class BnbConfig:
    family: Family = Family.SCRATCH
    look_ahead: bool = False
    strategy: Strategy = Strategy.DEPTH_FIRST
    branch_factor: int | None = None  # None = strategy default
    seed: int = 0

    def __post_init__(self) -> None:
        if self.branch_factor is not None and self.branch_factor < 1:
            raise ValueError("branch_factor must be >= 1")

    @property
    def effective_branch_factor(self) -> int:
        if self.branch_factor is not None:
            return self.branch_factor
        return DEFAULT_BRANCH_FACTOR[self.strategy]


@dataclass(frozen=True)
class SearchNode:
    """A partial schedule plus its relaxation bound."""

    partial: Schedule
    bound: float
    gen: int  # creation order, used as the deterministic tie-breaker

    @property
    def depth(self) -> int:
        return len(self.partial)


def is_feasible(schedule: Sequence[Config], required: Iterable[int], n: int) -> bool:
    """Full length and full coverage of the required vertex set."""
    return len(schedule) == n and set(required) <= schedule_vertices(schedule)


def branch_scratch(
    partial: Schedule,
    graph: CompatibilityGraph,
    required: frozenset[int],
    b: int,
    rng: random.Random,
) -> list[Schedule]:
    """Child schedules appending one clique each.

    While required vertices remain uncovered, every appended clique covers
    at least one of them; afterwards any clique qualifies.  At most ``b``
    distinct children are produced, drawn round-robin across seeds.
    """
    uncovered = frozenset(required - schedule_vertices(partial))
    if uncovered:
        seeds = sorted(uncovered)
    else:
        base = min(range(graph.d), key=lambda i: (len(graph.layers[i]), i))
        seeds = sorted(graph.layers[base])
    rng.shuffle(seeds)
    iterators = [iter_extensions(graph, (v,), uncovered, rng) for v in seeds]
    cliques = distinct_cliques_roundrobin(iterators, b)
    return [partial + (c,) for c in cliques]


def branch_refine(
    partial: Schedule,
    s0: Schedule,
    graph: CompatibilityGraph,
    required: frozenset[int],
    b: int,
    rng: random.Random,
) -> list[Schedule]:
    """Child schedules appending one clique that keeps coverage reachable.

    A clique qualifies at depth k when the partial schedule, the clique,
    and the last ``n - k - 1`` entries of the initial schedule together
    cover the required set.
    """
    depth = len(partial)
    suffix = s0[depth + 1 :]
    base = schedule_vertices(partial) | schedule_vertices(suffix)
    missing = frozenset(required - base)
    if missing:
        # Only cliques containing every missing vertex qualify.
        iterators = [iter_extensions(graph, sorted(missing), missing, rng)]
    else:
        layer = min(range(graph.d), key=lambda i: (len(graph.layers[i]), i))
        seeds = sorted(graph.layers[layer])
        rng.shuffle(seeds)
        iterators = [iter_extensions(graph, (v,), frozenset(), rng) for v in seeds]
    cliques = distinct_cliques_roundrobin(iterators, b)
    return [partial + (c,) for c in cliques]


def complete_scratch(
    partial: Schedule,
    cover: Sequence[Config],
    required: frozenset[int],
    n: int,
    rng: random.Random,
) -> Schedule:
    """Pad with cover cliques: greedy max-new-coverage first, then random."""
    out = list(partial)
    while len(out) < n:
        uncovered = required - schedule_vertices(out)
        if uncovered:
            out.append(max(cover, key=lambda c: len(uncovered & set(c))))
        else:
            out.append(rng.choice(cover))
    return tuple(out)


def complete_refine(partial: Schedule, s0: Schedule) -> Schedule:
    """Pad with the trailing entries of the initial schedule."""
    return partial + s0[len(partial) :]


class BranchAndBound:
    """Stateful solver; supports budgeted runs and checkpoint round-trips."""

    def __init__(
        self,
        graph: CompatibilityGraph,
        cover: Sequence[Config],
        s0: Schedule,
        n: int,
        target: TargetSpec | None,
        required: frozenset[int],
        cfg: BnbConfig,
    ) -> None:
        self.graph = graph
        self.cover = tuple(cover)
        self.s0 = tuple(s0)
        self.n = n
        self.target = target
        self.required = frozenset(required)
        self.cfg = cfg
        self.rng = random.Random(cfg.seed)
        self.incumbent: Schedule = self.s0
        self.incumbent_cost = self._cost(self.s0)
        self.expansions = 0
        self._gen = 0
        root = SearchNode(partial=(), bound=self._bound(()), gen=self._next_gen())
        self.frontier: list[tuple[tuple, SearchNode]] = []
        self._push(root)

    def _cost(self, schedule: Schedule) -> float:
        return 0.0 if self.target is None else cost(schedule, self.target)

    def _bound(self, partial: Schedule) -> float:
        return 0.0 if self.target is None else lower_bound(partial, self.n, self.target)

    def _next_gen(self) -> int:
        self._gen += 1
        return self._gen

    def _key(self, node: SearchNode) -> tuple:
        if self.cfg.strategy is Strategy.BEST_FIRST_DEPTH_FIRST:
            return (node.bound, -node.depth, node.gen)
        # Depth-first-best-first: always resume at the deepest open node,
        # best bound first among equals.
        return (-node.depth, node.bound, node.gen)

    def _push(self, node: SearchNode) -> None:
        if self.cfg.strategy is Strategy.DEPTH_FIRST:
            self.frontier.append(((), node))
        else:
            heapq.heappush(self.frontier, (self._key(node), node))

    def _pop(self) -> SearchNode:
        if self.cfg.strategy is Strategy.DEPTH_FIRST:
            return self.frontier.pop()[1]
        return heapq.heappop(self.frontier)[1]

    def _offer(self, candidate: Schedule) -> None:
        if not is_feasible(candidate, self.required, self.n):
            return
        value = self._cost(candidate)
        if value < self.incumbent_cost:
            self.incumbent = candidate
            self.incumbent_cost = value

    def _branch(self, node: SearchNode) -> list[Schedule]:
        b = self.cfg.effective_branch_factor
        if self.cfg.family is Family.SCRATCH:
            return branch_scratch(node.partial, self.graph, self.required, b, self.rng)
        return branch_refine(node.partial, self.s0, self.graph, self.required, b, self.rng)

    def _complete(self, partial: Schedule) -> Schedule:
        if self.cfg.family is Family.SCRATCH:
            return complete_scratch(partial, self.cover, self.required, self.n, self.rng)
        return complete_refine(partial, self.s0)

    def step(self) -> None:
        """Expand one node: prune, optionally look ahead, then branch."""
        node = self._pop()
        if node.bound >= self.incumbent_cost:
            return
        self.expansions += 1
        if self.cfg.look_ahead:
            self._offer(self._complete(node.partial))
        children = self._branch(node)
        ordered: list[SearchNode] = []
        for child in children:
            if len(child) == self.n:
                self._offer(child)
                continue
            bound = self._bound(child)
            if bound < self.incumbent_cost:
                ordered.append(SearchNode(partial=child, bound=bound, gen=self._next_gen()))
        if self.cfg.strategy is Strategy.DEPTH_FIRST:
            # Push in descending bound so the best child is expanded first.
            for sub in sorted(ordered, key=lambda s: (-s.bound, -s.gen)):
                self._push(sub)
        else:
            for sub in ordered:
                self._push(sub)

    @property
    def exhausted(self) -> bool:
        return not self.frontier

    def run(
        self,
        max_expansions: int | None = None,
        time_limit: float | None = None,
    ) -> tuple[Schedule, float]:
        """Expand nodes until the tree or a budget is exhausted."""
        if max_expansions is None and time_limit is None:
            raise ValueError("need an expansion or time budget")
        deadline = None if time_limit is None else time.monotonic() + time_limit
        start = self.expansions
        while self.frontier:
            if max_expansions is not None and self.expansions - start >= max_expansions:
                break
            if deadline is not None and time.monotonic() >= deadline:
                break
            self.step()
        return self.incumbent, self.incumbent_cost

    def state_dict(self, max_frontier: int = 10_000) -> dict:
        """Serializable state; the frontier is truncated to the best bounds.

        The incumbent survives exactly; the frontier snapshot is
        best-effort (its fine-grained expansion order is not preserved).
        """
        nodes = [n for _, n in self.frontier]
        nodes = sorted(nodes, key=lambda n: (n.bound, n.gen))[:max_frontier]
        return {
            "incumbent": [list(c) for c in self.incumbent],
            "incumbent_cost": self.incumbent_cost,
            "expansions": self.expansions,
            "gen": self._gen,
            "rng_state": [self.rng.getstate()[0], list(self.rng.getstate()[1]), self.rng.getstate()[2]],
            "frontier": [
                {"partial": [list(c) for c in n.partial], "bound": n.bound, "gen": n.gen}
                for n in nodes
            ],
        }

    def load_state_dict(self, state: dict) -> None:
        self.incumbent = tuple(tuple(c) for c in state["incumbent"])
        self.incumbent_cost = float(state["incumbent_cost"])
        self.expansions = int(state["expansions"])
        self._gen = int(state["gen"])
        version, internal, gauss = state["rng_state"]
        self.rng.setstate((version, tuple(internal), gauss))
        self.frontier = []
        nodes = [
            SearchNode(
                partial=tuple(tuple(c) for c in raw["partial"]),
                bound=float(raw["bound"]),
                gen=int(raw["gen"]),
            )
            for raw in state["frontier"]
        ]
        if self.cfg.strategy is Strategy.DEPTH_FIRST:
            nodes.reverse()  # stack pops from the end: best bound first
        for node in nodes:
            self._push(node)


def solve(
    graph: CompatibilityGraph,
    cover: Sequence[Config],
    s0: Schedule,
    n: int,
    target: TargetSpec | None,
    required: frozenset[int],
    cfg: BnbConfig,
    max_expansions: int | None = None,
    time_limit: float | None = None,
) -> tuple[Schedule, float]:
    """One-shot branch-and-bound run; returns the incumbent and its cost."""
    solver = BranchAndBound(graph, cover, s0, n, target, required, cfg)
    return solver.run(max_expansions=max_expansions, time_limit=time_limit)

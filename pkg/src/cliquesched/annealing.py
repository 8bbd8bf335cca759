"""Simulated annealing over schedules.

The search starts from the expanded coverage schedule (the clique cover
padded to length n by cyclic duplication) and repeatedly replaces one
configuration with a freshly built one.  Moves are accepted by the
Metropolis rule under a sigmoid temperature schedule that cools with the
number of iterations since the last random restart.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .errors import CoverExceedsBudget
from .graphops import build_clique
from .model import CompatibilityGraph, Config, Schedule, covers, schedule_vertices
from .objective import TargetSpec, cost


class NeighborMode(str, Enum):
    """How the replacement configuration is seeded when coverage is intact."""

    RANDOM_VERTEX = "random-vertex"  # grow from one random vertex of the graph
    ALL_BUT_ONE = "all-but-one"  # keep all but one vertex of the replaced config
    SINGLE_VERTEX = "single-vertex"  # keep a single vertex of the replaced config


@dataclass(frozen=True)
class SaConfig:
    neighbor_mode: NeighborMode = NeighborMode.RANDOM_VERTEX
    preserve_cover: bool = True
    retries_limit: int = 8
    reset_probability: float = 1e-7
    # Restrict replacements to positions past the embedded cover, which
    # keeps coverage intact without any repair step.
    swap_beyond_cover: bool = False
    seed: int = 0

    def __post_init__(self) -> None:
        if self.retries_limit < 1:
            raise ValueError("retries_limit must be >= 1")
        if not 0.0 <= self.reset_probability <= 1.0:
            raise ValueError("reset_probability must be in [0, 1]")


def temperature(x: float) -> float:
    """Sigmoid cooling schedule; 2000 at x = 0, strictly decreasing."""
    return 4000.0 / (1.0 + math.exp(x / 3000.0))


def expand_cover(cover: Sequence[Config], n: int) -> Schedule:
    """Pad the cover to length ``n`` by repeating its cliques in cycle order."""
    if len(cover) > n:
        raise CoverExceedsBudget(f"cover needs {len(cover)} configurations but n = {n}")
    return tuple(cover[i % len(cover)] for i in range(n))


def reset_candidate(cover: Sequence[Config], n: int, rng: random.Random) -> Schedule:
    """The cover plus ``n - len(cover)`` cliques drawn from it with replacement."""
    if len(cover) > n:
        raise CoverExceedsBudget(f"cover needs {len(cover)} configurations but n = {n}")
    picks = tuple(rng.choice(cover) for _ in range(n - len(cover)))
    return tuple(cover) + picks


def next_candidate(
    schedule: Schedule,
    graph: CompatibilityGraph,
    cover: Sequence[Config],
    required: frozenset[int],
    cfg: SaConfig,
    rng: random.Random,
) -> Schedule:
    """Replace one randomly chosen configuration with a different one.

    When ``preserve_cover`` is set and dropping the chosen configuration
    would lose coverage, the replacement is grown from exactly the lost
    vertices so coverage survives.  Otherwise the replacement is grown
    per ``neighbor_mode``.  After ``retries_limit`` failed attempts the
    schedule is rebuilt with ``reset_candidate``.
    """
    n = len(schedule)
    low = len(cover) if cfg.swap_beyond_cover else 0
    if low >= n:
        low = 0
    for _ in range(cfg.retries_limit):
        idx = rng.randrange(low, n)
        current = schedule[idx]
        rest = schedule[:idx] + schedule[idx + 1 :]
        rest_vertices = schedule_vertices(rest)
        lost = sorted((required & set(current)) - rest_vertices)
        uncovered = frozenset(required - rest_vertices)

        if cfg.preserve_cover and lost:
            replacement = build_clique(graph, lost, uncovered=uncovered, rng=rng)
        else:
            if cfg.neighbor_mode is NeighborMode.RANDOM_VERTEX:
                seed = (rng.choice(graph.vertex_order),)
            elif cfg.neighbor_mode is NeighborMode.ALL_BUT_ONE:
                dropped = rng.randrange(len(current))
                seed = current[:dropped] + current[dropped + 1 :]
            else:
                seed = (current[rng.randrange(len(current))],)
            replacement = build_clique(graph, seed, uncovered=uncovered, rng=rng)

        if replacement is None or replacement == current:
            continue
        if cfg.preserve_cover and lost and not set(lost) <= set(replacement):
            continue
        return schedule[:idx] + (replacement,) + schedule[idx + 1 :]
    return reset_candidate(cover, n, rng)


class SimulatedAnnealer:
    """Stateful annealer; supports budgeted runs and checkpoint round-trips."""

    def __init__(
        self,
        graph: CompatibilityGraph,
        cover: Sequence[Config],
        n: int,
        target: TargetSpec | None,
        required: frozenset[int],
        cfg: SaConfig,
    ) -> None:
        self.graph = graph
        self.cover = tuple(cover)
        self.n = n
        self.target = target
        self.required = frozenset(required)
        self.cfg = cfg
        self.rng = random.Random(cfg.seed)
        self.current: Schedule = expand_cover(self.cover, n)
        self.current_cost = self._cost(self.current)
        self.best: Schedule = self.current
        self.best_cost = self.current_cost
        self.iterations = 0
        self.since_restart = 0

    def _cost(self, schedule: Schedule) -> float:
        return 0.0 if self.target is None else cost(schedule, self.target)

    def step(self) -> None:
        if self.rng.random() < self.cfg.reset_probability:
            self.current = reset_candidate(self.cover, self.n, self.rng)
            self.current_cost = self._cost(self.current)
            self.since_restart = 0
            self._record(self.current, self.current_cost)
        candidate = next_candidate(
            self.current, self.graph, self.cover, self.required, self.cfg, self.rng
        )
        candidate_cost = self._cost(candidate)
        delta = candidate_cost - self.current_cost
        if delta <= 0 or self.rng.random() < math.exp(-delta / temperature(self.since_restart)):
            self.current = candidate
            self.current_cost = candidate_cost
            self._record(candidate, candidate_cost)
        self.iterations += 1
        self.since_restart += 1

    def _record(self, schedule: Schedule, value: float) -> None:
        # Only coverage-feasible schedules may become the answer.
        if value < self.best_cost and covers(schedule, self.required):
            self.best = schedule
            self.best_cost = value

    def run(
        self,
        max_iterations: int | None = None,
        time_limit: float | None = None,
        target_cost: float | None = None,
    ) -> tuple[Schedule, float]:
        """Iterate until an iteration, wall-clock, or cost budget is hit."""
        if max_iterations is None and time_limit is None:
            raise ValueError("need an iteration or time budget")
        deadline = None if time_limit is None else time.monotonic() + time_limit
        done = 0
        while True:
            if max_iterations is not None and done >= max_iterations:
                break
            if deadline is not None and time.monotonic() >= deadline:
                break
            if target_cost is not None and self.best_cost <= target_cost:
                break
            self.step()
            done += 1
        return self.best, self.best_cost

    def state_dict(self) -> dict:
        return {
            "current": [list(c) for c in self.current],
            "current_cost": self.current_cost,
            "best": [list(c) for c in self.best],
            "best_cost": self.best_cost,
            "iterations": self.iterations,
            "since_restart": self.since_restart,
            "rng_state": _encode_rng_state(self.rng.getstate()),
        }

    def load_state_dict(self, state: dict) -> None:
        self.current = tuple(tuple(c) for c in state["current"])
        self.current_cost = float(state["current_cost"])
        self.best = tuple(tuple(c) for c in state["best"])
        self.best_cost = float(state["best_cost"])
        self.iterations = int(state["iterations"])
        self.since_restart = int(state["since_restart"])
        self.rng.setstate(_decode_rng_state(state["rng_state"]))


def anneal(
    graph: CompatibilityGraph,
    cover: Sequence[Config],
    n: int,
    target: TargetSpec | None,
    required: frozenset[int],
    cfg: SaConfig,
    max_iterations: int | None = None,
    time_limit: float | None = None,
) -> tuple[Schedule, float]:
    """One-shot annealing run; returns the best schedule and its cost."""
    annealer = SimulatedAnnealer(graph, cover, n, target, required, cfg)
    return annealer.run(max_iterations=max_iterations, time_limit=time_limit)


def _encode_rng_state(state: tuple) -> list:
    version, internal, gauss = state
    return [version, list(internal), gauss]


def _decode_rng_state(raw: list) -> tuple:
    version, internal, gauss = raw
    return (version, tuple(internal), gauss)

"""Target distributions and the three mean-squared-error objective families.

A schedule is scored by how closely its empirical distribution matches a
target distribution, at one of three granularities:

- dimension: per-vertex shares within each dimension, mixed by
  per-dimension weights;
- relationship: shares of cross-dimension vertex pairs within each
  dimension pair, mixed by per-pair weights;
- combination: shares of whole configurations.

Each granularity scores a weighted sum of mean squared errors between the
true and target distributions.  ``lower_bound`` relaxes the problem to
score the best reachable distribution for a partial schedule: the missing
configurations are assigned greedily, unit by unit, without requiring
them to be valid configurations.
"""

from __future__ import annotations

import heapq
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

from .errors import DegenerateTarget, EmptySchedule, UnitMismatch
from .model import CompatibilityGraph, Config

PairUnit = tuple[int, int]  # (vertex in dim i, vertex in dim j), i < j
DimPair = tuple[int, int]


class ObjectiveKind(str, Enum):
    DIMENSION = "dimension"
    RELATIONSHIP = "relationship"
    COMBINATION = "combination"


def _normalize_group(group: Mapping, what: str) -> dict:
    total = 0.0
    for unit, mass in group.items():
        if mass < 0:
            raise ValueError(f"negative target mass for {what} unit {unit}")
        total += mass
    if not group or total <= 0.0:
        raise DegenerateTarget(f"{what} has no target mass")
    if abs(total - 1.0) < 1e-12:
        # already normalized: dividing again would drift by an ulp and
        # break serialization round-trips (digests must be stable)
        return {unit: float(mass) for unit, mass in sorted(group.items())}
    return {unit: mass / total for unit, mass in sorted(group.items())}


@dataclass(frozen=True)
class TargetSpec:
    """Normalized target distribution plus mixing weights.

    ``targets`` is structured per kind: a tuple of per-dimension
    ``{vertex: share}`` maps, a ``{(dim_i, dim_j): {(u, v): share}}`` map,
    or a ``{config: share}`` map.  Raw counts are accepted; every group is
    normalized to sum to one.  Construct through the ``for_*`` factories.
    """

    kind: ObjectiveKind
    targets: tuple[dict[int, float], ...] | dict[DimPair, dict[PairUnit, float]] | dict[Config, float]
    weights: dict | None = None

    @classmethod
    def for_dimensions(
        cls,
        groups: Sequence[Mapping[int, float]],
        weights: Sequence[float] | Mapping[int, float] | None = None,
    ) -> "TargetSpec":
        d = len(groups)
        targets = tuple(_normalize_group(g, f"dimension {i}") for i, g in enumerate(groups))
        if weights is None:
            w = {i: 1.0 for i in range(d)}
        elif isinstance(weights, Mapping):
            w = {int(i): float(v) for i, v in weights.items()}
        else:
            w = {i: float(v) for i, v in enumerate(weights)}
        if set(w) != set(range(d)):
            raise ValueError("need one mixing weight per dimension")
        return cls(ObjectiveKind.DIMENSION, targets, _normalize_group(w, "dimension weights"))

    @classmethod
    def for_relationships(
        cls,
        groups: Mapping[DimPair, Mapping[PairUnit, float]],
        weights: Mapping[DimPair, float] | None = None,
    ) -> "TargetSpec":
        targets = {
            pair: _normalize_group(g, f"dimension pair {pair}")
            for pair, g in sorted(groups.items())
        }
        if not targets:
            raise DegenerateTarget("no dimension pairs in relationship targets")
        if weights is None:
            w = {pair: 1.0 for pair in targets}
        else:
            w = {pair: float(v) for pair, v in weights.items()}
        if set(w) != set(targets):
            raise ValueError("need one mixing weight per dimension pair")
        return cls(ObjectiveKind.RELATIONSHIP, targets, _normalize_group(w, "pair weights"))

    @classmethod
    def for_combinations(cls, targets: Mapping[Config, float]) -> "TargetSpec":
        return cls(
            ObjectiveKind.COMBINATION,
            _normalize_group(dict(targets), "configuration space"),
            None,
        )


@dataclass(frozen=True)
class Distribution:
    """Empirical distribution of a schedule, mirroring the target structure."""

    kind: ObjectiveKind
    values: tuple[dict[int, float], ...] | dict[DimPair, dict[PairUnit, float]] | dict[Config, float]


def true_distribution(schedule: Sequence[Config], kind: ObjectiveKind) -> Distribution:
    """Occurrence shares of each unit in the schedule."""
    if not schedule:
        raise EmptySchedule("cannot take the distribution of an empty schedule")
    m = len(schedule)
    d = len(schedule[0])
    if kind == ObjectiveKind.DIMENSION:
        per_dim = []
        for i in range(d):
            counts = Counter(config[i] for config in schedule)
            per_dim.append({v: c / m for v, c in sorted(counts.items())})
        return Distribution(kind, tuple(per_dim))
    if kind == ObjectiveKind.RELATIONSHIP:
        values: dict[DimPair, dict[PairUnit, float]] = {}
        for i in range(d):
            for j in range(i + 1, d):
                counts = Counter((config[i], config[j]) for config in schedule)
                values[(i, j)] = {u: c / m for u, c in sorted(counts.items())}
        return Distribution(kind, values)
    counts = Counter(schedule)
    return Distribution(kind, {config: c / m for config, c in sorted(counts.items())})


def _group_mse(counts: Mapping, scale: float, group: Mapping) -> float:
    """Mean squared error between counts/scale and the target group."""
    total = 0.0
    for unit in sorted(group):
        total += (counts.get(unit, 0) / scale - group[unit]) ** 2
    return total / len(group)


def _check_units(counts: Iterable, group: Mapping, what: str) -> None:
    for unit in counts:
        if unit not in group:
            raise UnitMismatch(f"schedule uses {what} {unit} absent from the target space")


def _per_dimension_counts(schedule: Sequence[Config], d: int) -> list[dict[int, int]]:
    counts: list[dict[int, int]] = [{} for _ in range(d)]
    for config in schedule:
        for i in range(d):
            v = config[i]
            slot = counts[i]
            slot[v] = slot.get(v, 0) + 1
    return counts


def cost(schedule: Sequence[Config], target: TargetSpec) -> float:
    """Weighted MSE between the schedule's distribution and the target.

    Zero exactly when the two distributions agree on every unit.  For the
    combination kind the unit space is the target-listed configurations
    plus any configuration present in the schedule (missing target mass
    counts as zero).
    """
    if not schedule:
        raise EmptySchedule("cannot score an empty schedule")
    m = len(schedule)
    if target.kind == ObjectiveKind.DIMENSION:
        total = 0.0
        per_dim = _per_dimension_counts(schedule, len(target.targets))
        for i, group in enumerate(target.targets):
            counts = per_dim[i]
            _check_units(counts, group, f"dimension-{i} vertex")
            total += target.weights[i] * _group_mse(counts, m, group)
        return total
    if target.kind == ObjectiveKind.RELATIONSHIP:
        total = 0.0
        for pair, group in sorted(target.targets.items()):
            i, j = pair
            counts = Counter((config[i], config[j]) for config in schedule)
            _check_units(counts, group, f"dimension {pair} pair")
            total += target.weights[pair] * _group_mse(counts, m, group)
        return total
    counts = Counter(schedule)
    space = sorted(set(target.targets) | set(counts))
    total = 0.0
    for unit in space:
        total += (counts.get(unit, 0) / m - target.targets.get(unit, 0.0)) ** 2
    return total / len(space)


def adjust_targets(target: TargetSpec, surviving: CompatibilityGraph) -> TargetSpec:
    """Restrict targets to the surviving graph and renormalize each group.

    Entries whose unit mentions a removed vertex are dropped; the rest are
    renormalized per dimension, per dimension pair, or globally.  Raises
    DegenerateTarget when a group loses all of its mass.
    """
    alive = surviving.vertices
    if target.kind == ObjectiveKind.DIMENSION:
        groups = [
            {v: mass for v, mass in group.items() if v in alive}
            for group in target.targets
        ]
        return TargetSpec.for_dimensions(groups, target.weights)
    if target.kind == ObjectiveKind.RELATIONSHIP:
        groups = {
            pair: {unit: mass for unit, mass in group.items() if unit[0] in alive and unit[1] in alive}
            for pair, group in target.targets.items()
        }
        return TargetSpec.for_relationships(groups, target.weights)
    kept = {
        config: mass
        for config, mass in target.targets.items()
        if all(v in alive for v in config)
    }
    return TargetSpec.for_combinations(kept)


def _greedy_counts(counts: Counter, group: Mapping, n: int, extra: int) -> Counter:
    """Add ``extra`` unit increments where the target-count deficit is largest."""
    counts = Counter(counts)
    heap = [(-(group[unit] * n - counts.get(unit, 0)), unit) for unit in sorted(group)]
    heapq.heapify(heap)
    for _ in range(extra):
        deficit, unit = heapq.heappop(heap)
        counts[unit] += 1
        heapq.heappush(heap, (deficit + 1, unit))
    return counts


def lower_bound(partial: Sequence[Config], n: int, target: TargetSpec) -> float:
    """Cost of the best length-``n`` relaxed completion of ``partial``.

    The missing configurations are assembled unit by unit: within each
    group, each of the ``n - len(partial)`` virtual additions goes to the
    unit whose target count exceeds its current count by the most (ties to
    the smallest unit).  The virtual additions need not combine into valid
    configurations, so the result never exceeds the cost of any real
    completion.
    """
    k = len(partial)
    if k > n:
        raise ValueError(f"partial schedule longer than the budget: {k} > {n}")
    extra = n - k
    if target.kind == ObjectiveKind.DIMENSION:
        total = 0.0
        for i, group in enumerate(target.targets):
            counts = Counter(config[i] for config in partial)
            _check_units(counts, group, f"dimension-{i} vertex")
            filled = _greedy_counts(counts, group, n, extra)
            total += target.weights[i] * _group_mse(filled, n, group)
        return total
    if target.kind == ObjectiveKind.RELATIONSHIP:
        total = 0.0
        for pair, group in sorted(target.targets.items()):
            i, j = pair
            counts = Counter((config[i], config[j]) for config in partial)
            _check_units(counts, group, f"dimension {pair} pair")
            filled = _greedy_counts(counts, group, n, extra)
            total += target.weights[pair] * _group_mse(filled, n, group)
        return total
    counts = Counter(partial)
    space = {unit: target.targets.get(unit, 0.0) for unit in set(target.targets) | set(counts)}
    filled = _greedy_counts(counts, space, n, extra)
    total = 0.0
    for unit in sorted(space):
        total += (filled.get(unit, 0) / n - space[unit]) ** 2
    return total / len(space)

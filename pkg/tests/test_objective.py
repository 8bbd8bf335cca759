"""Tests for distributions, the three cost families, target adjustment,
and the greedy relaxation bound.

Hand-verified expectations on the golden instance (adjusted targets are
2/3 and 1/3 per dimension, weights 0.4/0.4/0.2):

- cost of three copies of (1,4,6): each dimension contributes
  ((0 - 2/3)^2 + (1 - 1/3)^2) / 2 = 4/9, so the total is 4/9.
- cost of [(0,3,5), (1,4,6), (1,4,6)]: each dimension contributes
  ((1/3 - 2/3)^2 + (2/3 - 1/3)^2) / 2 = 1/9, so the total is 1/9.
"""

import itertools
import random

import pytest

import cliquesched as cs
from cliquesched.errors import DegenerateTarget, EmptySchedule, UnitMismatch
from conftest import GOLDEN_OPTIMUM, golden_instance, golden_target, make_random_instance

TOL = 1e-12


@pytest.fixture
def adjusted(golden):
    prepared = cs.prepare_instance(golden)
    return prepared.target


class TestTrueDistribution:
    def test_golden_dimension_shares(self):
        dist = cs.true_distribution(GOLDEN_OPTIMUM, cs.ObjectiveKind.DIMENSION)
        assert dist.values[0] == {0: 2 / 3, 1: 1 / 3}
        assert dist.values[1] == {3: 2 / 3, 4: 1 / 3}
        assert dist.values[2] == {5: 2 / 3, 6: 1 / 3}

    def test_repeated_config(self):
        dist = cs.true_distribution(((0, 3, 5),) * 3, cs.ObjectiveKind.DIMENSION)
        assert dist.values == ({0: 1.0}, {3: 1.0}, {5: 1.0})

    def test_combination_shares(self):
        dist = cs.true_distribution(GOLDEN_OPTIMUM, cs.ObjectiveKind.COMBINATION)
        assert dist.values == {(0, 3, 5): 2 / 3, (1, 4, 6): 1 / 3}

    def test_relationship_shares(self):
        dist = cs.true_distribution(GOLDEN_OPTIMUM, cs.ObjectiveKind.RELATIONSHIP)
        assert dist.values[(0, 1)] == {(0, 3): 2 / 3, (1, 4): 1 / 3}

    def test_empty_schedule(self):
        with pytest.raises(EmptySchedule):
            cs.true_distribution((), cs.ObjectiveKind.DIMENSION)


class TestCost:
    def test_optimum_scores_zero(self, adjusted):
        assert cs.cost(GOLDEN_OPTIMUM, adjusted) == pytest.approx(0.0, abs=TOL)

    def test_all_same_config(self, adjusted):
        assert cs.cost(((1, 4, 6),) * 3, adjusted) == pytest.approx(4 / 9, abs=TOL)

    def test_two_to_one_split(self, adjusted):
        schedule = ((0, 3, 5), (1, 4, 6), (1, 4, 6))
        assert cs.cost(schedule, adjusted) == pytest.approx(1 / 9, abs=TOL)

    def test_permutation_invariance(self, adjusted):
        schedule = ((0, 3, 5), (1, 4, 6), (1, 3, 6))
        base = cs.cost(schedule, adjusted)
        for perm in itertools.permutations(schedule):
            assert cs.cost(perm, adjusted) == base

    def test_nonnegative_and_zero_iff_match(self, adjusted):
        for schedule in itertools.combinations_with_replacement(
            [(0, 3, 5), (1, 3, 6), (1, 4, 6)], 3
        ):
            value = cs.cost(schedule, adjusted)
            assert value >= 0.0
            dist = cs.true_distribution(schedule, cs.ObjectiveKind.DIMENSION)
            matches = all(
                dist.values[i].get(v, 0.0) == pytest.approx(share, abs=TOL)
                for i, group in enumerate(adjusted.targets)
                for v, share in group.items()
            )
            assert (value < TOL) == matches

    def test_unit_mismatch(self, adjusted):
        with pytest.raises(UnitMismatch):
            cs.cost(((2, 4, 7),) * 3, adjusted)  # 2 and 7 were scoped away

    def test_combination_space_includes_schedule_configs(self):
        target = cs.TargetSpec.for_combinations({(0, 3, 5): 1.0})
        # (1, 4, 6) is absent from the targets: space has two units.
        value = cs.cost(((1, 4, 6),), target)
        assert value == pytest.approx((1.0 + 1.0) / 2, abs=TOL)

    def test_relationship_cost_zero_on_match(self):
        target = cs.TargetSpec.for_relationships(
            {(0, 1): {(0, 3): 2, (1, 4): 1}, (0, 2): {(0, 5): 2, (1, 6): 1},
             (1, 2): {(3, 5): 2, (4, 6): 1}}
        )
        assert cs.cost(GOLDEN_OPTIMUM, target) == pytest.approx(0.0, abs=TOL)

    def test_empty_schedule(self, adjusted):
        with pytest.raises(EmptySchedule):
            cs.cost((), adjusted)


class TestAdjustTargets:
    def test_golden_renormalization(self):
        prepared = cs.prepare_instance(golden_instance())
        groups = prepared.target.targets
        assert groups[0] == pytest.approx({0: 2 / 3, 1: 1 / 3}, abs=TOL)
        assert groups[2] == pytest.approx({5: 2 / 3, 6: 1 / 3}, abs=TOL)

    def test_identity_when_nothing_removed(self):
        target = golden_target()
        same = cs.adjust_targets(target, golden_instance().graph)
        assert same.targets == target.targets

    def test_group_sums_to_one(self):
        for seed in range(25):
            inst = make_random_instance(seed)
            if inst is None or inst.target.kind != cs.ObjectiveKind.DIMENSION:
                continue
            adjusted = cs.adjust_targets(inst.target, inst.graph)
            for group in adjusted.targets:
                assert sum(group.values()) == pytest.approx(1.0, abs=1e-9)

    def test_degenerate_dimension_raises(self):
        g = cs.CompatibilityGraph.build(["a", "b"], [{2}, {3}], [(2, 3)])
        target = cs.TargetSpec.for_dimensions([{0: 1, 2: 0}, {3: 1}])
        with pytest.raises(DegenerateTarget):
            cs.adjust_targets(target, g)

    def test_combination_adjustment_drops_removed(self):
        target = cs.TargetSpec.for_combinations({(0, 3, 5): 1, (2, 4, 7): 1})
        surviving = golden_instance().graph.subgraph({0, 1, 3, 4, 5, 6})
        adjusted = cs.adjust_targets(target, surviving)
        assert adjusted.targets == {(0, 3, 5): 1.0}

    def test_relationship_adjustment_renormalizes(self):
        target = cs.TargetSpec.for_relationships(
            {(0, 1): {(0, 3): 1, (2, 4): 2, (1, 4): 1}}
        )
        surviving = golden_instance().graph.subgraph({0, 1, 3, 4, 5, 6})
        adjusted = cs.adjust_targets(target, surviving)
        assert adjusted.targets[(0, 1)] == pytest.approx(
            {(0, 3): 0.5, (1, 4): 0.5}, abs=TOL
        )


class TestLowerBound:
    def test_empty_partial_reaches_zero(self, adjusted):
        assert cs.lower_bound((), 3, adjusted) == pytest.approx(0.0, abs=TOL)

    def test_one_config_partial_reaches_zero(self, adjusted):
        assert cs.lower_bound(((1, 4, 6),), 3, adjusted) == pytest.approx(0.0, abs=TOL)

    def test_full_schedule_equals_cost(self, adjusted):
        for schedule in itertools.combinations_with_replacement(
            [(0, 3, 5), (1, 3, 6), (1, 4, 6)], 3
        ):
            assert cs.lower_bound(schedule, 3, adjusted) == cs.cost(schedule, adjusted)

    def test_full_schedule_equals_cost_all_kinds(self):
        rng = random.Random(3)
        for seed in range(40):
            inst = make_random_instance(seed)
            if inst is None:
                continue
            cliques = cs.enumerate_cliques(inst.graph)
            if not cliques:
                continue
            schedule = tuple(rng.choice(cliques) for _ in range(inst.n))
            try:
                expected = cs.cost(schedule, inst.target)
            except UnitMismatch:
                continue
            assert cs.lower_bound(schedule, inst.n, inst.target) == expected

    def test_partial_longer_than_budget_rejected(self, adjusted):
        with pytest.raises(ValueError):
            cs.lower_bound(((0, 3, 5),) * 4, 3, adjusted)

    def test_monotone_under_the_relaxation(self, adjusted):
        # The bound never exceeds the true optimum over completions.
        cliques = [(0, 3, 5), (1, 3, 6), (1, 4, 6)]
        for k in range(3):
            for partial in itertools.combinations_with_replacement(cliques, k):
                bound = cs.lower_bound(partial, 3, adjusted)
                best = min(
                    cs.cost(partial + rest, adjusted)
                    for rest in itertools.combinations_with_replacement(cliques, 3 - k)
                )
                assert bound <= best + TOL

"""Cross-cutting invariants checked on randomly generated instances."""

import dataclasses
import random

import pytest

from rmcdp.graphs import build_graph, circuit_cost, dispatch_sequences, greedy_solve
from rmcdp.model import DepotSpec, Instance
from rmcdp.priority import priority_solve
from rmcdp.schedule import check, evaluate, expand_consecutive

from conftest import random_instance

MIN = 60


def shift_instance(instance: Instance, delta: int) -> Instance:
    depot = dataclasses.replace(
        instance.depot, start_time=instance.depot.start_time + delta
    )
    sites = tuple(
        dataclasses.replace(site, proposed_start=site.proposed_start + delta)
        for site in instance.sites
    )
    return Instance(depot=depot, sites=sites)


def random_sequence(rng: random.Random, instance: Instance) -> tuple[int, ...]:
    trips = []
    for site in instance.sites:
        count = -(-site.demand // instance.depot.truck_capacity)
        trips += [site.id] * count
    rng.shuffle(trips)
    return tuple(trips)


class TestTranslationInvariance:
    @pytest.mark.parametrize("seed", range(20))
    def test_objective_unchanged_by_clock_shift(self, seed):
        rng = random.Random(seed)
        instance = random_instance(rng)
        shifted = shift_instance(instance, 2 * 3600)
        sequence = random_sequence(rng, instance)
        assert circuit_cost(instance, sequence) == circuit_cost(shifted, sequence)

    @pytest.mark.parametrize("seed", range(10))
    def test_priority_result_shifts_with_clock(self, seed):
        rng = random.Random(seed)
        instance = random_instance(rng)
        delta = 3 * 3600
        base = priority_solve(instance)
        moved = priority_solve(shift_instance(instance, delta))
        assert base.stats.feasible_count == moved.stats.feasible_count
        assert base.stats.best_objective == moved.stats.best_objective
        if base.schedule is not None:
            base_starts = [e.depot_start for e in base.schedule.entries]
            moved_starts = [e.depot_start for e in moved.schedule.entries]
            assert moved_starts == [t + delta for t in base_starts]


class TestWaitIdleExclusivity:
    @pytest.mark.parametrize("seed", range(25))
    def test_each_gap_is_wait_or_idle_never_both(self, seed):
        rng = random.Random(seed)
        instance = random_instance(rng)
        sequence = random_sequence(rng, instance)
        schedule = expand_consecutive(instance, sequence)
        for site in instance.sites:
            entries = schedule.by_site()[site.id]
            for prev, cur in zip(entries, entries[1:]):
                gap = cur.site_arrival - prev.site_arrival
                wait = max(0, gap - site.unload_time)
                idle = max(0, site.unload_time - gap)
                assert wait == 0 or idle == 0
        report = evaluate(instance, schedule)
        total_wait = sum(
            s.first_wait + s.inter_trip_wait for s in report.per_site.values()
        )
        assert total_wait == report.total_site_wait


class TestCircuitCostIsEvaluate:
    def test_thousand_random_sequences(self):
        rng = random.Random(12345)
        checked = 0
        while checked < 1000:
            instance = random_instance(rng)
            for _ in range(10):
                sequence = random_sequence(rng, instance)
                schedule = expand_consecutive(instance, sequence)
                assert circuit_cost(instance, sequence) == evaluate(
                    instance, schedule
                ).total_site_wait
                checked += 1


class TestDeterminism:
    @pytest.mark.parametrize("seed", range(10))
    def test_priority_solve_is_deterministic(self, seed):
        rng = random.Random(seed)
        instance = random_instance(rng)
        first = priority_solve(instance)
        second = priority_solve(instance)
        assert first.sequence == second.sequence
        assert first.stats.best_objective == second.stats.best_objective
        assert first.stats.feasible_count == second.stats.feasible_count

    @pytest.mark.parametrize("seed", range(10))
    def test_greedy_sequence_covers_trip_multiset(self, seed):
        rng = random.Random(seed)
        instance = random_instance(rng)
        result = greedy_solve(build_graph(instance))
        assert sorted(result.sequence) == sorted(build_graph(instance).labels)


class TestTruckLimitMonotonicity:
    @pytest.mark.parametrize("seed", range(10))
    def test_more_trucks_never_hurt(self, seed):
        rng = random.Random(seed)
        instance = random_instance(rng)
        objectives = []
        for limit in (2, 4, 8, None):
            result = priority_solve(instance, truck_limit=limit)
            objectives.append(result.stats.best_objective)
        seen = [o for o in objectives if o is not None]
        assert seen == sorted(seen, reverse=True)
        # Once any limit admits a solution, every larger limit must too.
        first_feasible = next(
            (i for i, o in enumerate(objectives) if o is not None), None
        )
        if first_feasible is not None:
            assert all(o is not None for o in objectives[first_feasible:])


class TestPriorityScheduleValidity:
    @pytest.mark.parametrize("seed", range(25))
    def test_best_schedule_passes_checks(self, seed):
        rng = random.Random(seed)
        instance = random_instance(rng)
        result = priority_solve(instance)
        if result.schedule is None:
            return
        report = check(instance, result.schedule)
        assert report.feasible
        objective = evaluate(instance, result.schedule)
        assert objective.total_site_wait == result.stats.best_objective
        assert objective.truck_idle_total == 0

"""Priority-rule search over site permutations.

Every permutation of the site list is turned into one schedule: the site in
position ``r`` gets the ``r``-th loading slot for its first trip, and each
following trip aims at ``beta * U_i`` after the previous one.  Occupied (or
truck-starved) slots push a trip to the next free slot; the delay is site
waiting.  A pushed trip that would land more than ``gamma`` after the
previous pour makes the permutation infeasible.  The best feasible
permutation wins; ties go to the lexicographically smallest permutation of
the instance's site list.

Sites with identical parameters produce identical timings, so permutations
are evaluated once per equivalence class and fanned out combinatorially.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from .graphs import _multiset_permutations
from .model import Instance, SiteSpec, ValidationError
from .schedule import Schedule, ScheduleEntry, TripId

#: Marker: take the truck limit from the instance (``depot.trucks``).
AUTO = object()

#: Streaming limit: above this many equivalence classes, run sequentially.
_MATERIALIZE_LIMIT = 1_000_000


class SlotGrid:
    """Loading slots of the single depot bay.

    Keeps per-slot occupancy plus the number of trucks already committed at
    each slot instant (a dispatched truck is unavailable for one inclusive
    gamma window).
    """

    def __init__(self, start_time: int, slot_length: int, gamma: int) -> None:
        self.start_time = start_time
        self.slot_length = slot_length
        #: Slots a dispatch keeps its truck busy for, endpoint included.
        self.busy_slots = gamma // slot_length + 1
        self.occupied: dict[int, TripId | None] = {}
        self.load: dict[int, int] = {}

    def slot_time(self, slot: int) -> int:
        return self.start_time + (slot - 1) * self.slot_length

    def slot_at_or_after(self, when: int | Fraction) -> int:
        offset = Fraction(when) - self.start_time
        return max(1, math.ceil(offset / self.slot_length) + 1)

    def admissible(self, slot: int, truck_limit: int | None) -> bool:
        if slot in self.occupied:
            return False
        return truck_limit is None or self.load.get(slot, 0) < truck_limit

    def next_empty_slot(self, desired: int, truck_limit: int | None = None) -> int:
        slot = desired
        while not self.admissible(slot, truck_limit):
            slot += 1
        return slot

    def place(self, slot: int, trip: TripId | None = None) -> None:
        self.occupied[slot] = trip
        for s in range(slot, slot + self.busy_slots):
            self.load[s] = self.load.get(s, 0) + 1


@dataclass(frozen=True)
class SitePlacement:
    slots: tuple[int, ...]
    inter_trip_wait: Fraction


def place_site(
    grid: SlotGrid,
    unload_time: int,
    gamma: int,
    trip_count: int,
    first_slot: int,
    beta: Fraction = Fraction(1),
    truck_limit: int | None = None,
    trip: TripId | None = None,
) -> SitePlacement | None:
    """Place all trips of one site on the grid, or report infeasibility.

    The first trip takes the first admissible slot at or after
    ``first_slot``; later trips aim ``beta * U`` after the previous loading
    and slide forward past occupied slots, accumulating the slide as
    waiting.  Returns ``None`` when a slide breaks the pour window.
    """
    slot = grid.next_empty_slot(first_slot, truck_limit)
    grid.place(slot, trip)
    slots = [slot]
    previous = grid.slot_time(slot)
    wait = Fraction(0)
    for _ in range(trip_count - 1):
        target = previous + beta * unload_time
        slot = grid.next_empty_slot(grid.slot_at_or_after(target), truck_limit)
        when = grid.slot_time(slot)
        if when - previous > gamma:
            return None
        if when > target:
            wait += when - target
        grid.place(slot, trip)
        slots.append(slot)
        previous = when
    return SitePlacement(slots=tuple(slots), inter_trip_wait=wait)


@dataclass(frozen=True)
class PrioritySearchStats:
    permutations_created: int
    feasible_count: int
    best_objective: int | None
    runtime: float

    @property
    def feasibility_rate(self) -> float:
        if not self.permutations_created:
            return 0.0
        return self.feasible_count / self.permutations_created


@dataclass(frozen=True)
class PriorityResult:
    schedule: Schedule | None
    permutation: tuple[int, ...] | None  # site ids in priority order
    sequence: tuple[int, ...] | None     # dispatch order by depot time
    stats: PrioritySearchStats


_SiteKey = tuple[int, int, int, int, int]


def _site_key(instance: Instance, site: SiteSpec) -> _SiteKey:
    return (
        instance.trips_for(site),
        site.unload_time,
        site.haul_time,
        site.proposed_start,
        instance.gamma_for(site),
    )


def _evaluate_class(
    instance: Instance,
    key_sequence: Sequence[_SiteKey],
    beta: Fraction,
    truck_limit: int | None,
) -> Fraction | None:
    """Total site waiting of one permutation class, or None if infeasible."""
    grid = SlotGrid(
        instance.depot.start_time, instance.depot.loading_time, instance.depot.gamma
    )
    lt = instance.depot.loading_time
    total = Fraction(0)
    for position, key in enumerate(key_sequence, start=1):
        trip_count, unload, haul, proposed, gamma = key
        placed = place_site(
            grid, unload, gamma, trip_count, position, beta, truck_limit
        )
        if placed is None:
            return None
        first_arrival = grid.slot_time(placed.slots[0]) + lt + haul
        total += max(0, first_arrival - proposed) + placed.inter_trip_wait
    return total


def _class_chunk_worker(
    args: tuple[Instance, list[tuple[_SiteKey, ...]], str, int | None]
) -> tuple[int, tuple[Fraction, tuple[_SiteKey, ...]] | None]:
    instance, chunk, beta_text, truck_limit = args
    beta = Fraction(beta_text)
    feasible = 0
    best: tuple[Fraction, tuple[_SiteKey, ...]] | None = None
    for key_sequence in chunk:
        wait = _evaluate_class(instance, key_sequence, beta, truck_limit)
        if wait is None:
            continue
        feasible += 1
        if best is None or wait < best[0]:
            best = (wait, tuple(key_sequence))
    return feasible, best


def _lexmin_assignment(
    key_sequence: Sequence[_SiteKey], groups: dict[_SiteKey, list[int]]
) -> tuple[int, ...]:
    """Smallest site-position permutation realising a key sequence."""
    cursors = {key: 0 for key in groups}
    positions = []
    for key in key_sequence:
        positions.append(groups[key][cursors[key]])
        cursors[key] += 1
    return tuple(positions)


def _build_schedule(
    instance: Instance,
    ordered_sites: Sequence[SiteSpec],
    beta: Fraction,
    truck_limit: int | None,
) -> Schedule:
    grid = SlotGrid(
        instance.depot.start_time, instance.depot.loading_time, instance.depot.gamma
    )
    lt = instance.depot.loading_time
    capacity = instance.depot.truck_capacity
    entries = []
    for position, site in enumerate(ordered_sites, start=1):
        placed = place_site(
            grid,
            site.unload_time,
            instance.gamma_for(site),
            instance.trips_for(site),
            position,
            beta,
            truck_limit,
            trip=TripId(site.id, 1),
        )
        assert placed is not None, "winning permutation must replay feasibly"
        poured = 0.0
        for index, slot in enumerate(placed.slots, start=1):
            depot_start = grid.slot_time(slot)
            arrival = depot_start + lt + site.haul_time
            delivered = min(capacity, site.demand - poured)
            poured += delivered
            entries.append(
                ScheduleEntry(
                    trip=TripId(site.id, index),
                    depot_start=depot_start,
                    site_arrival=arrival,
                    site_departure=arrival + site.unload_time,
                    delivered=delivered,
                    cumulative_delivered=poured,
                )
            )
    entries.sort(key=lambda e: e.trip)
    return Schedule(entries=tuple(entries), origin="priority")


def priority_solve(
    instance: Instance,
    beta: Fraction | int | float | str = 1,
    truck_limit: int | None | object = AUTO,
    threads: int = 1,
) -> PriorityResult:
    """Search all ``n!`` site permutations for the least total waiting."""
    beta = Fraction(str(beta))
    if beta < 1:
        raise ValidationError(f"beta: must be at least 1, got {beta}")
    if truck_limit is AUTO:
        truck_limit = instance.depot.truck_count
    if truck_limit is not None and truck_limit <= 0:
        raise ValidationError("truck_limit: must be positive when given")

    started = time.perf_counter()
    n = len(instance.sites)
    created = math.factorial(n)

    groups: dict[_SiteKey, list[int]] = {}
    for position, site in enumerate(instance.sites):
        groups.setdefault(_site_key(instance, site), []).append(position)
    keys = sorted(groups, key=lambda key: groups[key][0])
    counts = [len(groups[key]) for key in keys]
    multiplicity = math.prod(math.factorial(c) for c in counts)
    class_count = created // multiplicity

    def reduce_result(
        wait: Fraction, key_sequence: tuple[_SiteKey, ...]
    ) -> tuple[Fraction, tuple[int, ...], tuple[_SiteKey, ...]]:
        return (wait, _lexmin_assignment(key_sequence, groups), key_sequence)

    feasible_classes = 0
    best: tuple[Fraction, tuple[int, ...], tuple[_SiteKey, ...]] | None = None

    if threads > 1 and class_count <= _MATERIALIZE_LIMIT:
        import multiprocessing

        classes = list(_multiset_permutations(keys, counts))
        chunk_size = max(1, math.ceil(len(classes) / threads))
        chunks = [
            (instance, classes[i : i + chunk_size], str(beta), truck_limit)
            for i in range(0, len(classes), chunk_size)
        ]
        with multiprocessing.Pool(processes=threads) as pool:
            for feasible, chunk_best in pool.map(_class_chunk_worker, chunks):
                feasible_classes += feasible
                if chunk_best is not None:
                    candidate = reduce_result(*chunk_best)
                    if best is None or candidate[:2] < best[:2]:
                        best = candidate
    else:
        for key_sequence in _multiset_permutations(keys, counts):
            wait = _evaluate_class(instance, key_sequence, beta, truck_limit)
            if wait is None:
                continue
            feasible_classes += 1
            candidate = reduce_result(wait, key_sequence)
            if best is None or candidate[:2] < best[:2]:
                best = candidate

    feasible = feasible_classes * multiplicity
    if best is None:
        stats = PrioritySearchStats(
            permutations_created=created,
            feasible_count=0,
            best_objective=None,
            runtime=time.perf_counter() - started,
        )
        return PriorityResult(None, None, None, stats)

    wait, positions, _ = best
    ordered_sites = [instance.sites[p] for p in positions]
    schedule = _build_schedule(instance, ordered_sites, beta, truck_limit)
    objective = int(wait) if wait.denominator == 1 else float(wait)
    stats = PrioritySearchStats(
        permutations_created=created,
        feasible_count=feasible,
        best_objective=objective,
        runtime=time.perf_counter() - started,
    )
    return PriorityResult(
        schedule=schedule,
        permutation=tuple(site.id for site in ordered_sites),
        sequence=schedule.dispatch_sequence(),
        stats=stats,
    )

"""Schedules, feasibility checking and objective evaluation.

A schedule is a set of timed trips.  The checker collects every violation
instead of stopping at the first one; the evaluator computes site waiting
(first delivery later than requested, or a delivery gap wider than the
unloading time) and truck idling at sites (a delivery arriving before the
previous one has finished unloading).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .model import Instance, InputError, SiteSpec, trip_duration

#: Violation kinds reported by :func:`check`.
VIOLATION_KINDS = (
    "gamma_exceeded",
    "slot_conflict",
    "truck_overrun",
    "accessibility",
    "coverage",
)


@dataclass(frozen=True, order=True)
class TripId:
    site_id: int
    trip_index: int  # 1-based within the site


@dataclass(frozen=True)
class ScheduleEntry:
    trip: TripId
    depot_start: int       # loading starts at the depot
    site_arrival: int      # pouring starts at the site
    site_departure: int    # pouring done, truck heads back
    delivered: float       # m3 on this trip
    cumulative_delivered: float

    @property
    def site_id(self) -> int:
        return self.trip.site_id


@dataclass(frozen=True)
class Schedule:
    entries: tuple[ScheduleEntry, ...]
    origin: str = ""

    def by_site(self) -> dict[int, list[ScheduleEntry]]:
        grouped: dict[int, list[ScheduleEntry]] = {}
        for entry in self.entries:
            grouped.setdefault(entry.site_id, []).append(entry)
        for entries in grouped.values():
            entries.sort(key=lambda e: e.trip.trip_index)
        return grouped

    def dispatch_sequence(self) -> tuple[int, ...]:
        """Site ids ordered by depot loading time."""
        return tuple(
            e.site_id for e in sorted(self.entries, key=lambda e: e.depot_start)
        )


@dataclass(frozen=True)
class Violation:
    kind: str
    trips: tuple[TripId, ...]
    measured: float
    bound: float
    detail: str = ""


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    violations: tuple[Violation, ...]


@dataclass(frozen=True)
class SiteObjective:
    first_wait: int
    inter_trip_wait: int
    truck_idle: int

    @property
    def total_wait(self) -> int:
        return self.first_wait + self.inter_trip_wait


@dataclass(frozen=True)
class ObjectiveReport:
    first_wait_total: int
    inter_trip_wait_total: int
    truck_idle_total: int
    trucks_required: int
    per_site: Mapping[int, SiteObjective] = field(default_factory=dict)

    @property
    def total_site_wait(self) -> int:
        return self.first_wait_total + self.inter_trip_wait_total


def expand_consecutive(instance: Instance, sequence: Sequence[int]) -> Schedule:
    """Expand a dispatch sequence into timed trips on consecutive slots.

    Trip ``i`` of the sequence loads at ``D_s + (i - 1) * L_t``.  The
    sequence must contain each site exactly as many times as it has trips.
    """
    expected = Counter(
        {site.id: instance.trips_for(site) for site in instance.sites}
    )
    actual = Counter(sequence)
    if actual != expected:
        raise InputError(
            f"sequence multiset {dict(sorted(actual.items()))} does not match "
            f"required trips per site {dict(sorted(expected.items()))}"
        )

    lt = instance.depot.loading_time
    capacity = instance.depot.truck_capacity
    seen: Counter[int] = Counter()
    poured: dict[int, float] = {site.id: 0.0 for site in instance.sites}
    entries = []
    for position, site_id in enumerate(sequence):
        site = instance.site(site_id)
        seen[site_id] += 1
        depot_start = instance.depot.start_time + position * lt
        arrival = depot_start + lt + site.haul_time
        delivered = min(capacity, site.demand - poured[site_id])
        poured[site_id] += delivered
        entries.append(
            ScheduleEntry(
                trip=TripId(site_id, seen[site_id]),
                depot_start=depot_start,
                site_arrival=arrival,
                site_departure=arrival + site.unload_time,
                delivered=delivered,
                cumulative_delivered=poured[site_id],
            )
        )
    entries.sort(key=lambda e: e.trip)
    return Schedule(entries=tuple(entries), origin="consecutive")


def trucks_required(instance: Instance, schedule: Schedule) -> int:
    """Peak number of trucks simultaneously committed to a trip.

    A truck is tied up for one full cold-joint window (gamma, inclusive)
    from its loading start; with gamma covering load, both hauls and the
    pour for every accessible site, this is the window the fleet has to be
    sized for.
    """
    window = instance.depot.gamma
    starts = sorted(e.depot_start for e in schedule.entries)
    peak = 0
    lo = 0
    for hi, start in enumerate(starts):
        while starts[lo] < start - window:
            lo += 1
        peak = max(peak, hi - lo + 1)
    return peak


def _coverage_violations(instance: Instance, schedule: Schedule) -> list[Violation]:
    violations = []
    expected = {
        TripId(site.id, j)
        for site in instance.sites
        for j in range(1, instance.trips_for(site) + 1)
    }
    actual = Counter(e.trip for e in schedule.entries)
    for trip, count in sorted(actual.items()):
        if trip not in expected:
            violations.append(
                Violation("coverage", (trip,), count, 0, "unknown trip")
            )
        elif count > 1:
            violations.append(
                Violation("coverage", (trip,), count, 1, "duplicated trip")
            )
    for trip in sorted(expected - set(actual)):
        violations.append(Violation("coverage", (trip,), 0, 1, "missing trip"))

    # Trip indices must follow depot time within each site.
    for site_id, entries in schedule.by_site().items():
        starts = [e.depot_start for e in entries]
        if starts != sorted(starts):
            violations.append(
                Violation(
                    "coverage",
                    tuple(e.trip for e in entries),
                    0,
                    0,
                    f"site {site_id} trip order disagrees with depot times",
                )
            )
    return violations


def check(
    instance: Instance,
    schedule: Schedule,
    gamma_override: int | None = None,
    truck_limit: int | None = None,
) -> FeasibilityReport:
    """Collect every constraint violation of a schedule."""
    violations = list(_coverage_violations(instance, schedule))

    by_start: dict[int, list[TripId]] = {}
    for entry in schedule.entries:
        by_start.setdefault(entry.depot_start, []).append(entry.trip)
    for start, trips in sorted(by_start.items()):
        if len(trips) > 1:
            violations.append(
                Violation(
                    "slot_conflict",
                    tuple(sorted(trips)),
                    len(trips),
                    1,
                    f"{len(trips)} loadings at the same depot time",
                )
            )

    lt = instance.depot.loading_time
    for site in instance.sites:
        gamma = gamma_override if gamma_override is not None else instance.gamma_for(site)
        span = lt + site.haul_time + site.unload_time
        if span > gamma:
            violations.append(
                Violation(
                    "accessibility",
                    (TripId(site.id, 1),),
                    span,
                    gamma,
                    f"site {site.id} cannot be reached within the pour window",
                )
            )

    grouped = schedule.by_site()
    for site in instance.sites:
        entries = grouped.get(site.id, [])
        gamma = gamma_override if gamma_override is not None else instance.gamma_for(site)
        for prev, cur in zip(entries, entries[1:]):
            gap = cur.site_arrival - prev.site_arrival
            if gap > gamma:
                violations.append(
                    Violation(
                        "gamma_exceeded",
                        (prev.trip, cur.trip),
                        gap,
                        gamma,
                        f"site {site.id}: consecutive pours {gap // 60} min apart",
                    )
                )

    if truck_limit is not None and schedule.entries:
        peak = trucks_required(instance, schedule)
        if peak > truck_limit:
            violations.append(
                Violation(
                    "truck_overrun",
                    (),
                    peak,
                    truck_limit,
                    f"needs {peak} trucks, only {truck_limit} available",
                )
            )

    return FeasibilityReport(feasible=not violations, violations=tuple(violations))


def evaluate(instance: Instance, schedule: Schedule) -> ObjectiveReport:
    """Waiting and idle totals of a schedule that covers every trip."""
    coverage = _coverage_violations(instance, schedule)
    if coverage:
        raise InputError("; ".join(v.detail for v in coverage))

    per_site: dict[int, SiteObjective] = {}
    grouped = schedule.by_site()
    for site in instance.sites:
        entries = grouped[site.id]
        first_wait = max(0, entries[0].site_arrival - site.proposed_start)
        wait = 0
        idle = 0
        for prev, cur in zip(entries, entries[1:]):
            gap = cur.site_arrival - prev.site_arrival
            wait += max(0, gap - site.unload_time)
            idle += max(0, site.unload_time - gap)
        per_site[site.id] = SiteObjective(first_wait, wait, idle)

    return ObjectiveReport(
        first_wait_total=sum(s.first_wait for s in per_site.values()),
        inter_trip_wait_total=sum(s.inter_trip_wait for s in per_site.values()),
        truck_idle_total=sum(s.truck_idle for s in per_site.values()),
        trucks_required=trucks_required(instance, schedule),
        per_site=per_site,
    )

"""Problem data for single-depot ready-mixed-concrete delivery scheduling.

A depot with one loading bay serves ``n`` construction sites.  Every trip
uses a full truck load, so site ``i`` with demand ``q_i`` needs
``ceil(q_i / Q)`` trips.  Concrete must be poured within ``gamma`` minutes
of batching (the cold-joint window), which bounds the gap between
consecutive deliveries at the same site and also yields a per-site
accessibility condition ``L_t + h_i + U_i <= gamma``.

All times are stored as integer seconds from midnight.  Quantities that do
not come out as whole seconds (loading time, haul time) are rejected rather
than rounded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

MINUTE = 60
HOUR = 3600

#: Default cold-joint window: 90 minutes.
DEFAULT_GAMMA = 90 * MINUTE


class ValidationError(ValueError):
    """Instance data violates a structural invariant."""


class InputError(ValueError):
    """A runtime input (sequence, schedule, file) is malformed."""


def _fraction(value: float | int | str, what: str) -> Fraction:
    """Exact rational view of a JSON-ish number."""
    try:
        return Fraction(str(value))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"{what}: not a number: {value!r}") from exc


def _exact_seconds(hours: Fraction, what: str) -> int:
    seconds = hours * HOUR
    if seconds.denominator != 1:
        raise ValidationError(
            f"{what}: {float(seconds):.6f} is not a whole number of seconds"
        )
    return int(seconds)


def loading_time(truck_capacity: float, productivity: float) -> int:
    """Seconds needed to load one truck: Q / P_r expressed in time."""
    if truck_capacity <= 0:
        raise ValidationError("truck_capacity: must be positive")
    if productivity <= 0:
        raise ValidationError("productivity: must be positive")
    ratio = _fraction(truck_capacity, "truck_capacity") / _fraction(
        productivity, "productivity"
    )
    return _exact_seconds(ratio, "loading time")


def trips_for_site(demand: float, truck_capacity: float) -> int:
    """Number of full-truck trips for one site: ceil(demand / capacity)."""
    if demand <= 0:
        raise ValidationError("demand: must be positive")
    if truck_capacity <= 0:
        raise ValidationError("truck_capacity: must be positive")
    ratio = _fraction(demand, "demand") / _fraction(truck_capacity, "truck_capacity")
    return int(math.ceil(ratio))


@dataclass(frozen=True)
class DepotSpec:
    start_time: int               # first loading start, seconds from midnight
    plant_capacity: float         # batching plant capacity, m3
    productivity: float           # batching rate P_r, m3/h
    truck_capacity: float         # Q, m3 per truck
    truck_count: int | None = None
    gamma: int = DEFAULT_GAMMA    # cold-joint window, seconds

    def __post_init__(self) -> None:
        if self.start_time < 0:
            raise ValidationError("depot.start: must be non-negative")
        if self.plant_capacity <= 0:
            raise ValidationError("depot.plant_capacity: must be positive")
        if self.productivity <= 0:
            raise ValidationError("depot.productivity: must be positive")
        if self.truck_capacity <= 0:
            raise ValidationError("depot.truck_capacity: must be positive")
        if self.truck_count is not None and self.truck_count <= 0:
            raise ValidationError("depot.trucks: must be positive when given")
        if self.gamma <= 0:
            raise ValidationError("depot.gamma: must be positive")

    @property
    def loading_time(self) -> int:
        return loading_time(self.truck_capacity, self.productivity)


@dataclass(frozen=True)
class SiteSpec:
    id: int
    demand: float                 # m3
    distance: float               # km, one way
    speed: float                  # km/h
    unload_time: int              # U_i, seconds
    proposed_start: int           # requested first-delivery time, seconds
    gamma_override: int | None = None

    def __post_init__(self) -> None:
        if self.id <= 0:
            raise ValidationError(f"sites[{self.id}].id: must be positive")
        if self.demand <= 0:
            raise ValidationError(f"sites[{self.id}].demand: must be positive")
        if self.distance < 0:
            raise ValidationError(f"sites[{self.id}].distance: must be non-negative")
        if self.speed <= 0:
            raise ValidationError(f"sites[{self.id}].speed: must be positive")
        if self.unload_time <= 0:
            raise ValidationError(f"sites[{self.id}].unload: must be positive")
        if self.proposed_start < 0:
            raise ValidationError(
                f"sites[{self.id}].proposed_start: must be non-negative"
            )
        if self.gamma_override is not None and self.gamma_override <= 0:
            raise ValidationError(
                f"sites[{self.id}].gamma_override: must be positive when given"
            )

    @property
    def haul_time(self) -> int:
        """One-way travel time d_i / v_i in seconds."""
        ratio = _fraction(self.distance, "distance") / _fraction(self.speed, "speed")
        return _exact_seconds(ratio, f"sites[{self.id}] haul time")


@dataclass(frozen=True)
class Instance:
    depot: DepotSpec
    sites: tuple[SiteSpec, ...]

    def __post_init__(self) -> None:
        if not self.sites:
            raise ValidationError("sites: at least one site is required")
        ids = sorted(s.id for s in self.sites)
        if ids != list(range(1, len(self.sites) + 1)):
            raise ValidationError(
                f"sites: ids must be exactly 1..{len(self.sites)}, got {ids}"
            )
        lt = self.depot.loading_time
        for site in self.sites:
            gamma = self.gamma_for(site)
            span = lt + site.haul_time + site.unload_time
            if span > gamma:
                raise ValidationError(
                    f"sites[{site.id}]: not accessible: loading + haul + unload "
                    f"= {span // MINUTE} min exceeds gamma = {gamma // MINUTE} min"
                )

    def site(self, site_id: int) -> SiteSpec:
        for site in self.sites:
            if site.id == site_id:
                return site
        raise InputError(f"unknown site id {site_id}")

    def gamma_for(self, site: SiteSpec) -> int:
        return site.gamma_override if site.gamma_override is not None else self.depot.gamma

    def trips_for(self, site: SiteSpec) -> int:
        return trips_for_site(site.demand, self.depot.truck_capacity)


def trip_duration(instance: Instance, site: SiteSpec) -> int:
    """Round-trip time of one delivery: loading + both hauls + unloading."""
    return instance.depot.loading_time + 2 * site.haul_time + site.unload_time


def total_trips(instance: Instance) -> int:
    return sum(instance.trips_for(site) for site in instance.sites)


def truck_upper_bound(gamma: int, load_time: int) -> int:
    """Largest useful fleet size, floor(2 * gamma / L_t)."""
    if load_time <= 0:
        raise ValidationError("loading time must be positive")
    return (2 * gamma) // load_time


def solution_space_size(instance: Instance) -> int:
    """Number of distinct dispatch sequences: a multinomial coefficient."""
    counts = [instance.trips_for(site) for site in instance.sites]
    size = math.factorial(sum(counts))
    for count in counts:
        size //= math.factorial(count)
    return size

"""Shared fixtures and a random-instance generator for property tests."""

from __future__ import annotations

import random

import pytest

from rmcdp import io as rio
from rmcdp.model import DepotSpec, Instance, SiteSpec

MIN = 60


@pytest.fixture(scope="session")
def example1() -> Instance:
    return rio.load_instance(rio.bundled_instance_path("example-1"))


@pytest.fixture(scope="session")
def instance1() -> Instance:
    return rio.load_instance(rio.bundled_instance_path("instance-1"))


@pytest.fixture(scope="session")
def instance2() -> Instance:
    return rio.load_instance(rio.bundled_instance_path("instance-2"))


@pytest.fixture(scope="session")
def golden_schedule(instance1):
    return rio.read_schedule_csv(
        rio.bundled_schedule_path("instance-1-schedule"), instance1
    )


def random_instance(rng: random.Random, max_total_trips: int = 6) -> Instance:
    """Small random instance: up to 3 sites, up to 3 trips per site.

    Loading and haul times are whole minutes and every site is accessible,
    so instances always validate.
    """
    lt_min = rng.choice((3, 5, 10))          # loading time, minutes
    productivity = {3: 200, 5: 120, 10: 60}[lt_min]
    n = rng.randint(1, 3)
    while True:
        trip_counts = [rng.randint(1, 3) for _ in range(n)]
        if sum(trip_counts) <= max_total_trips:
            break
    sites = []
    for sid, trips in enumerate(trip_counts, start=1):
        unload_min = lt_min * rng.randint(1, 3)
        max_haul = 90 - lt_min - unload_min
        haul_min = rng.randint(0, min(20, max_haul))
        demand = 10 * trips - rng.choice((0, 5))
        sites.append(
            SiteSpec(
                id=sid,
                demand=demand,
                distance=haul_min,  # speed 60 km/h: 1 km == 1 minute
                speed=60,
                unload_time=unload_min * MIN,
                proposed_start=(8 * 60 + rng.randint(0, 10)) * MIN,
                gamma_override=None,
            )
        )
    depot = DepotSpec(
        start_time=8 * 3600,
        plant_capacity=10,
        productivity=productivity,
        truck_capacity=10,
        gamma=90 * MIN,
    )
    return Instance(depot=depot, sites=tuple(sites))

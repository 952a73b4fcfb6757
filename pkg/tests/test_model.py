import math
import random

import pytest

from rmcdp.model import (
    DepotSpec,
    Instance,
    SiteSpec,
    ValidationError,
    loading_time,
    solution_space_size,
    total_trips,
    trip_duration,
    trips_for_site,
    truck_upper_bound,
)

MIN = 60


def make_instance(demands, unloads, distances, gamma=90 * MIN, productivity=120):
    sites = tuple(
        SiteSpec(
            id=i + 1,
            demand=demands[i],
            distance=distances[i],
            speed=60,
            unload_time=unloads[i],
            proposed_start=8 * 3600,
        )
        for i in range(len(demands))
    )
    depot = DepotSpec(
        start_time=8 * 3600,
        plant_capacity=10,
        productivity=productivity,
        truck_capacity=10,
        gamma=gamma,
    )
    return Instance(depot=depot, sites=sites)


class TestTripsForSite:
    def test_exact_division(self):
        assert trips_for_site(50, 10) == 5

    def test_partial_last_load(self):
        assert trips_for_site(51, 10) == 6
        assert trips_for_site(9.5, 10) == 1

    def test_rejects_nonpositive(self):
        with pytest.raises(ValidationError):
            trips_for_site(0, 10)

    @pytest.mark.parametrize("seed", range(20))
    def test_matches_ceiling(self, seed):
        rng = random.Random(seed)
        demand = rng.randint(1, 500)
        capacity = rng.randint(1, 30)
        assert trips_for_site(demand, capacity) == math.ceil(demand / capacity)


class TestLoadingTime:
    def test_reference_rates(self):
        assert loading_time(10, 120) == 5 * MIN
        assert loading_time(10, 60) == 10 * MIN

    def test_subminute_rate_is_exact(self):
        assert loading_time(1, 240) == 15

    def test_rejects_fractional_seconds(self):
        with pytest.raises(ValidationError):
            loading_time(1, 7)  # 3600/7 seconds


class TestDerivedQuantities:
    def test_total_trips(self):
        instance = make_instance([50, 45], [25 * MIN, 25 * MIN], [10, 10])
        assert total_trips(instance) == 10

    def test_trip_duration_round_trip(self):
        instance = make_instance([50], [25 * MIN], [30])
        assert trip_duration(instance, instance.sites[0]) == 90 * MIN

    def test_trip_duration_zero_distance(self):
        instance = make_instance([10], [20 * MIN], [0])
        assert trip_duration(instance, instance.sites[0]) == 25 * MIN

    def test_truck_upper_bound(self):
        assert truck_upper_bound(90 * MIN, 5 * MIN) == 36
        assert truck_upper_bound(90 * MIN, 10 * MIN) == 18
        assert truck_upper_bound(10 * MIN, 20 * MIN) == 1


class TestSolutionSpaceSize:
    def test_two_sites_two_trips(self):
        instance = make_instance([20, 20], [20 * MIN, 20 * MIN], [10, 20], productivity=60)
        assert solution_space_size(instance) == 6

    def test_five_sites_five_trips_each(self, instance1):
        assert solution_space_size(instance1) == 623_360_743_125_120

    def test_nine_sites_five_trips_each(self, instance2):
        size = solution_space_size(instance2)
        assert size == math.factorial(45) // math.factorial(5) ** 9
        # Rounded to 8 significant digits.
        assert f"{float(size):.7e}" == "2.3183588e+37"

    def test_invariant_under_site_reordering(self):
        a = make_instance([30, 10], [10 * MIN, 15 * MIN], [5, 10])
        b = make_instance([10, 30], [15 * MIN, 10 * MIN], [10, 5])
        assert solution_space_size(a) == solution_space_size(b)


class TestValidation:
    def test_site_ids_must_cover_range(self):
        sites = (
            SiteSpec(id=1, demand=10, distance=5, speed=60,
                     unload_time=10 * MIN, proposed_start=0),
            SiteSpec(id=3, demand=10, distance=5, speed=60,
                     unload_time=10 * MIN, proposed_start=0),
        )
        depot = DepotSpec(8 * 3600, 10, 120, 10)
        with pytest.raises(ValidationError, match="ids"):
            Instance(depot=depot, sites=sites)

    def test_inaccessible_site_rejected(self):
        with pytest.raises(ValidationError, match="not accessible"):
            make_instance([10], [30 * MIN], [60])  # 5 + 60 + 30 > 90

    def test_gamma_override_tightens_accessibility(self):
        sites = (
            SiteSpec(id=1, demand=10, distance=10, speed=60,
                     unload_time=20 * MIN, proposed_start=0,
                     gamma_override=30 * MIN),
        )
        depot = DepotSpec(8 * 3600, 10, 120, 10)
        with pytest.raises(ValidationError, match="not accessible"):
            Instance(depot=depot, sites=sites)

    def test_fractional_haul_seconds_rejected(self):
        sites = (
            SiteSpec(id=1, demand=10, distance=1, speed=7,
                     unload_time=10 * MIN, proposed_start=0),
        )
        depot = DepotSpec(8 * 3600, 10, 120, 10)
        with pytest.raises(ValidationError, match="whole number of seconds"):
            Instance(depot=depot, sites=sites)

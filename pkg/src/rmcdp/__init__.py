"""Single-depot ready-mixed-concrete delivery scheduling."""

from .model import (
    DepotSpec,
    Instance,
    InputError,
    SiteSpec,
    ValidationError,
    loading_time,
    solution_space_size,
    total_trips,
    trip_duration,
    trips_for_site,
    truck_upper_bound,
)
from .schedule import (
    FeasibilityReport,
    ObjectiveReport,
    Schedule,
    ScheduleEntry,
    TripId,
    Violation,
    check,
    evaluate,
    expand_consecutive,
    trucks_required,
)
from .graphs import (
    RmcdpGraph,
    SizeCapError,
    build_graph,
    circuit_cost,
    enumerate_exact,
    greedy_solve,
    grid_exact,
)
from .priority import (
    PriorityResult,
    PrioritySearchStats,
    SlotGrid,
    place_site,
    priority_solve,
)
from .mip import (
    MipModel,
    build_mip,
    emit_lp,
    encode_schedule,
    optimality_gap,
    parse_lp,
    validate_solution,
)

__all__ = [name for name in dir() if not name.startswith("_")]

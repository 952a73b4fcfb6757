"""Mixed-integer model of the dispatch problem and LP-format export.

The model assigns every trip to one loading slot on a discrete horizon
(binary ``X`` variables) and links slot times to site arrival times with
continuous variables.  The objective is total site waiting: first-delivery
delays plus delivery gaps beyond the unloading time.  Constraint names
embed the defining equation numbers (``c_eq22`` .. ``c_eq30``) so rows can
be traced back to the formulation.

All numbers in the emitted LP are minutes.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .model import Instance, InputError, ValidationError, total_trips
from .schedule import (
    FeasibilityReport,
    Schedule,
    ScheduleEntry,
    TripId,
    Violation,
    check,
    evaluate,
)


@dataclass(frozen=True)
class Row:
    name: str
    terms: tuple[tuple[Fraction, str], ...]
    sense: str  # "=", "<=" or ">="
    rhs: Fraction


@dataclass(frozen=True)
class MipModel:
    instance: Instance
    horizon: int
    objective: tuple[tuple[Fraction, str], ...]
    rows: tuple[Row, ...]
    continuous: tuple[str, ...]
    binaries: tuple[str, ...]

    @property
    def binary_count(self) -> int:
        return len(self.binaries)


def _minutes(seconds: int) -> Fraction:
    return Fraction(seconds, 60)


def default_horizon(instance: Instance) -> int:
    return 2 * total_trips(instance)


def build_mip(instance: Instance, horizon: int | None = None) -> MipModel:
    trips = total_trips(instance)
    if horizon is None:
        horizon = default_horizon(instance)
    if horizon < trips:
        raise ValidationError(
            f"horizon: {horizon} slots cannot hold {trips} trips"
        )

    lt = _minutes(instance.depot.loading_time)
    depot_start = _minutes(instance.depot.start_time)
    slot_times = [depot_start + (t - 1) * lt for t in range(1, horizon + 1)]

    objective: list[tuple[Fraction, str]] = []
    rows: list[Row] = []
    continuous: list[str] = []
    binaries: list[str] = []

    site_trips = {site.id: instance.trips_for(site) for site in instance.sites}
    for site in instance.sites:
        for j in range(1, site_trips[site.id] + 1):
            continuous.append(f"ks_s{site.id}_j{j}")
            continuous.append(f"kd_s{site.id}_j{j}")
        for j in range(1, site_trips[site.id]):
            continuous.append(f"T_s{site.id}_j{j}")
            continuous.append(f"W_s{site.id}_j{j}")
            objective.append((Fraction(1), f"W_s{site.id}_j{j}"))
        continuous.append(f"Wf_s{site.id}")
        objective.append((Fraction(1), f"Wf_s{site.id}"))
    for t in range(1, horizon + 1):
        for site in instance.sites:
            for j in range(1, site_trips[site.id] + 1):
                binaries.append(f"X_t{t}_s{site.id}_j{j}")

    one = Fraction(1)
    for site in instance.sites:
        sid = site.id
        unload = _minutes(site.unload_time)
        gamma = _minutes(instance.gamma_for(site))
        haul = _minutes(site.haul_time)
        proposed = _minutes(site.proposed_start)
        for j in range(1, site_trips[sid]):
            rows.append(
                Row(
                    f"c_eq22_s{sid}_j{j}",
                    ((one, f"ks_s{sid}_j{j + 1}"), (-one, f"ks_s{sid}_j{j}"),
                     (-one, f"T_s{sid}_j{j}")),
                    "=",
                    Fraction(0),
                )
            )
            rows.append(
                Row(
                    f"c_eq23_s{sid}_j{j}",
                    ((one, f"T_s{sid}_j{j}"), (-one, f"W_s{sid}_j{j}")),
                    "=",
                    unload,
                )
            )
            rows.append(
                Row(
                    f"c_eq24_s{sid}_j{j}",
                    ((one, f"T_s{sid}_j{j}"),),
                    ">=",
                    unload,
                )
            )
            rows.append(
                Row(
                    f"c_eq25_s{sid}_j{j}",
                    ((one, f"T_s{sid}_j{j}"),),
                    "<=",
                    gamma,
                )
            )
        for j in range(1, site_trips[sid] + 1):
            rows.append(
                Row(
                    f"c_eq26_s{sid}_j{j}",
                    ((one, f"ks_s{sid}_j1"), (-one, f"Wf_s{sid}")),
                    "=",
                    proposed,
                )
            )
            rows.append(
                Row(
                    f"c_eq27_s{sid}_j{j}",
                    ((one, f"ks_s{sid}_j{j}"), (-one, f"kd_s{sid}_j{j}")),
                    "=",
                    lt + haul,
                )
            )
            rows.append(
                Row(
                    f"c_eq28_s{sid}_j{j}",
                    tuple(
                        (slot_times[t - 1], f"X_t{t}_s{sid}_j{j}")
                        for t in range(1, horizon + 1)
                    )
                    + ((-one, f"kd_s{sid}_j{j}"),),
                    "=",
                    Fraction(0),
                )
            )
    for t in range(1, horizon + 1):
        rows.append(
            Row(
                f"c_eq29_t{t}",
                tuple(
                    (one, f"X_t{t}_s{site.id}_j{j}")
                    for site in instance.sites
                    for j in range(1, site_trips[site.id] + 1)
                ),
                "<=",
                Fraction(1),
            )
        )
    for site in instance.sites:
        for j in range(1, site_trips[site.id] + 1):
            rows.append(
                Row(
                    f"c_eq30_s{site.id}_j{j}",
                    tuple(
                        (one, f"X_t{t}_s{site.id}_j{j}")
                        for t in range(1, horizon + 1)
                    ),
                    "=",
                    Fraction(1),
                )
            )

    return MipModel(
        instance=instance,
        horizon=horizon,
        objective=tuple(objective),
        rows=tuple(rows),
        continuous=tuple(continuous),
        binaries=tuple(binaries),
    )


def _number(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return repr(float(value))


def _terms(terms: Iterable[tuple[Fraction, str]]) -> str:
    parts: list[str] = []
    for coefficient, name in terms:
        if not parts:
            if coefficient == 1:
                parts.append(name)
            elif coefficient == -1:
                parts.append(f"- {name}")
            else:
                parts.append(f"{_number(coefficient)} {name}")
            continue
        sign = "+" if coefficient > 0 else "-"
        magnitude = abs(coefficient)
        if magnitude == 1:
            parts.append(f"{sign} {name}")
        else:
            parts.append(f"{sign} {_number(magnitude)} {name}")
    return " ".join(parts)


def emit_lp(model: MipModel) -> str:
    lines = ["Minimize", f" obj: {_terms(model.objective)}", "Subject To"]
    for row in model.rows:
        lines.append(f" {row.name}: {_terms(row.terms)} {row.sense} {_number(row.rhs)}")
    lines.append("Bounds")
    for name in model.continuous:
        lines.append(f" 0 <= {name}")
    lines.append("Binary")
    for name in model.binaries:
        lines.append(f" {name}")
    lines.append("End")
    return "\n".join(lines) + "\n"


def _parse_terms(text: str) -> tuple[tuple[Fraction, str], ...]:
    tokens = text.split()
    terms: list[tuple[Fraction, str]] = []
    sign = Fraction(1)
    coefficient: Fraction | None = None
    for token in tokens:
        if token == "+":
            sign = Fraction(1)
        elif token == "-":
            sign = Fraction(-1)
        else:
            try:
                value = Fraction(token)
            except ValueError:
                terms.append((sign * (coefficient if coefficient is not None else 1), token))
                sign = Fraction(1)
                coefficient = None
            else:
                coefficient = value
    if coefficient is not None:
        raise InputError("dangling coefficient in LP expression")
    return tuple(terms)


def parse_lp(text: str, instance: Instance, horizon: int) -> MipModel:
    """Parse an LP file produced by :func:`emit_lp` back into a model."""
    section = None
    objective: tuple[tuple[Fraction, str], ...] = ()
    rows: list[Row] = []
    continuous: list[str] = []
    binaries: list[str] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("\\"):
            continue
        lowered = line.lower()
        if lowered in {"minimize", "subject to", "bounds", "binary", "end"}:
            section = lowered
            continue
        if section == "minimize":
            _, _, expr = line.partition(":")
            objective = _parse_terms(expr)
        elif section == "subject to":
            name, _, body = line.partition(":")
            for sense in ("<=", ">=", "="):
                if f" {sense} " in body:
                    expr, _, rhs = body.partition(f" {sense} ")
                    rows.append(
                        Row(name.strip(), _parse_terms(expr), sense, Fraction(rhs.strip()))
                    )
                    break
            else:
                raise InputError(f"constraint without relation: {line}")
        elif section == "bounds":
            continuous.append(line.split()[-1])
        elif section == "binary":
            binaries.append(line)
    return MipModel(
        instance=instance,
        horizon=horizon,
        objective=objective,
        rows=tuple(rows),
        continuous=tuple(continuous),
        binaries=tuple(binaries),
    )


def encode_schedule(
    instance: Instance, horizon: int, schedule: Schedule
) -> dict[str, float]:
    """Express a schedule as an assignment of the model's variables."""
    lt = instance.depot.loading_time
    start = instance.depot.start_time
    assignment: dict[str, float] = {}
    grouped = schedule.by_site()
    for site in instance.sites:
        entries = grouped.get(site.id, [])
        for entry in entries:
            offset = entry.depot_start - start
            if offset % lt:
                raise InputError(
                    f"trip {entry.trip} does not start on a loading slot"
                )
            slot = offset // lt + 1
            if not 1 <= slot <= horizon:
                raise InputError(f"trip {entry.trip} falls outside the horizon")
            j = entry.trip.trip_index
            assignment[f"X_t{slot}_s{site.id}_j{j}"] = 1.0
            assignment[f"kd_s{site.id}_j{j}"] = entry.depot_start / 60
            assignment[f"ks_s{site.id}_j{j}"] = entry.site_arrival / 60
        for j, (prev, cur) in enumerate(zip(entries, entries[1:]), start=1):
            gap = (cur.site_arrival - prev.site_arrival) / 60
            assignment[f"T_s{site.id}_j{j}"] = gap
            assignment[f"W_s{site.id}_j{j}"] = max(
                0.0, gap - site.unload_time / 60
            )
        if entries:
            assignment[f"Wf_s{site.id}"] = max(
                0.0, (entries[0].site_arrival - site.proposed_start) / 60
            )
    return assignment


def validate_solution(
    instance: Instance,
    horizon: int,
    assignment: Mapping[str, float],
) -> tuple[FeasibilityReport, int | None]:
    """Replay the model constraints against an assignment.

    Returns the violation report plus the objective (total site waiting,
    seconds) of the schedule reconstructed from the ``X`` variables, or
    ``None`` when no complete schedule can be reconstructed.
    """
    model = build_mip(instance, horizon)
    values = dict(assignment)

    chosen: dict[TripId, int] = {}
    slot_users: dict[int, list[TripId]] = {}
    for name in model.binaries:
        if values.get(name, 0.0) <= 0.5:
            continue
        _, t_part, s_part, j_part = name.split("_")
        slot = int(t_part[1:])
        trip = TripId(int(s_part[1:]), int(j_part[1:]))
        if trip in chosen:
            chosen[trip] = -1  # flagged below via eq30
        else:
            chosen[trip] = slot
        slot_users.setdefault(slot, []).append(trip)

    violations: list[Violation] = []
    expected_trips = [
        TripId(site.id, j)
        for site in instance.sites
        for j in range(1, instance.trips_for(site) + 1)
    ]
    for trip in expected_trips:
        used = sum(
            1
            for t in range(1, horizon + 1)
            if values.get(f"X_t{t}_s{trip.site_id}_j{trip.trip_index}", 0.0) > 0.5
        )
        if used != 1:
            violations.append(
                Violation(
                    "coverage",
                    (trip,),
                    used,
                    1,
                    f"trip assigned to {used} slots (c_eq30)",
                )
            )
    for slot, users in sorted(slot_users.items()):
        if len(users) > 1:
            violations.append(
                Violation(
                    "slot_conflict",
                    tuple(sorted(users)),
                    len(users),
                    1,
                    f"slot {slot} used {len(users)} times (c_eq29)",
                )
            )

    complete = all(chosen.get(trip, 0) > 0 for trip in expected_trips) and not any(
        len(u) > 1 for u in slot_users.values()
    )
    objective: int | None = None
    if complete:
        lt = instance.depot.loading_time
        start = instance.depot.start_time
        capacity = instance.depot.truck_capacity
        entries = []
        for site in instance.sites:
            poured = 0.0
            for j in range(1, instance.trips_for(site) + 1):
                slot = chosen[TripId(site.id, j)]
                depot_start = start + (slot - 1) * lt
                arrival = depot_start + lt + site.haul_time
                delivered = min(capacity, site.demand - poured)
                poured += delivered
                entries.append(
                    ScheduleEntry(
                        trip=TripId(site.id, j),
                        depot_start=depot_start,
                        site_arrival=arrival,
                        site_departure=arrival + site.unload_time,
                        delivered=delivered,
                        cumulative_delivered=poured,
                    )
                )
        entries.sort(key=lambda e: e.trip)
        schedule = Schedule(entries=tuple(entries), origin="mip")
        structural = check(instance, schedule)
        violations.extend(structural.violations)
        grouped = schedule.by_site()
        for site in instance.sites:
            site_entries = grouped[site.id]
            for j, (prev, cur) in enumerate(
                zip(site_entries, site_entries[1:]), start=1
            ):
                gap = cur.site_arrival - prev.site_arrival
                if gap < site.unload_time:
                    violations.append(
                        Violation(
                            "model_row",
                            (prev.trip, cur.trip),
                            gap,
                            site.unload_time,
                            f"c_eq24_s{site.id}_j{j}: gap below unloading time",
                        )
                    )
        if not violations:
            objective = evaluate(instance, schedule).total_site_wait

    return (
        FeasibilityReport(feasible=not violations, violations=tuple(violations)),
        objective,
    )


def optimality_gap(lower_bound: float, upper_bound: float) -> float:
    """Relative gap in percent between a bound pair, taken on the upper."""
    if upper_bound <= 0:
        raise InputError("upper bound must be positive")
    return (upper_bound - lower_bound) / upper_bound * 100.0

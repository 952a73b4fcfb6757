"""Instance and schedule file formats.

Instances are JSON documents::

    {"depot": {"start": "8:00", "plant_capacity": 10, "productivity": 120,
               "truck_capacity": 10, "trucks": 18, "gamma": 90},
     "sites": [{"id": 1, "demand": 50, "distance": 30, "speed": 60,
                "unload": 25, "proposed_start": "8:00"}, ...]}

Clock fields accept ``"H:MM"`` strings or plain minutes; ``gamma``,
``unload`` and ``gamma_override`` are durations in minutes.  Schedules
travel as CSV with one row per trip, sorted by site then trip.
"""

from __future__ import annotations

import csv
import io as _io
import json
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from .model import DepotSpec, Instance, InputError, SiteSpec, ValidationError
from .schedule import Schedule, ScheduleEntry, TripId

SCHEDULE_HEADER = ("site", "trip", "depot_start", "site_start", "site_end", "delivery")

MINUTE = 60


def parse_time(value: Any, what: str = "time") -> int:
    """Clock value ("H:MM", "H:MM:SS" or minutes) to seconds."""
    if isinstance(value, str):
        parts = value.split(":")
        if len(parts) not in (2, 3) or not all(p.isdigit() for p in parts):
            raise InputError(f"{what}: expected 'H:MM', got {value!r}")
        hours, minutes = int(parts[0]), int(parts[1])
        seconds = int(parts[2]) if len(parts) == 3 else 0
        if minutes >= 60 or seconds >= 60:
            raise InputError(f"{what}: expected 'H:MM', got {value!r}")
        return hours * 3600 + minutes * 60 + seconds
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InputError(f"{what}: expected 'H:MM' or minutes, got {value!r}")
    seconds = value * 60
    if seconds != int(seconds):
        raise InputError(f"{what}: {value!r} minutes is not a whole second count")
    return int(seconds)


def parse_duration(value: Any, what: str) -> int:
    """Duration in minutes to seconds."""
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InputError(f"{what}: expected minutes, got {value!r}")
    seconds = value * 60
    if seconds != int(seconds):
        raise InputError(f"{what}: {value!r} minutes is not a whole second count")
    if seconds <= 0:
        raise InputError(f"{what}: must be positive")
    return int(seconds)


def format_time(seconds: int) -> str:
    """Seconds from midnight to 'H:MM' (or 'H:MM:SS' off the minute)."""
    hours, rest = divmod(seconds, 3600)
    minutes, secs = divmod(rest, 60)
    if secs:
        return f"{hours}:{minutes:02d}:{secs:02d}"
    return f"{hours}:{minutes:02d}"


def _number(doc: Mapping[str, Any], field: str, what: str, default=None):
    if field not in doc:
        if default is not None:
            return default
        raise InputError(f"{what}.{field}: missing")
    value = doc[field]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InputError(f"{what}.{field}: expected a number, got {value!r}")
    return value


def instance_from_dict(doc: Mapping[str, Any]) -> Instance:
    if not isinstance(doc, Mapping):
        raise InputError("instance: expected a JSON object")
    depot_doc = doc.get("depot")
    if not isinstance(depot_doc, Mapping):
        raise InputError("depot: missing or not an object")
    sites_doc = doc.get("sites")
    if not isinstance(sites_doc, list) or not sites_doc:
        raise InputError("sites: missing or empty")

    try:
        depot = DepotSpec(
            start_time=parse_time(depot_doc.get("start"), "depot.start"),
            plant_capacity=_number(depot_doc, "plant_capacity", "depot"),
            productivity=_number(depot_doc, "productivity", "depot"),
            truck_capacity=_number(depot_doc, "truck_capacity", "depot"),
            truck_count=(
                int(_number(depot_doc, "trucks", "depot"))
                if "trucks" in depot_doc
                else None
            ),
            gamma=(
                parse_duration(depot_doc["gamma"], "depot.gamma")
                if "gamma" in depot_doc
                else DepotSpec.gamma
            ),
        )
    except ValidationError as exc:
        raise InputError(str(exc)) from exc

    sites = []
    for index, site_doc in enumerate(sites_doc):
        where = f"sites[{index}]"
        if not isinstance(site_doc, Mapping):
            raise InputError(f"{where}: expected an object")
        try:
            sites.append(
                SiteSpec(
                    id=int(_number(site_doc, "id", where)),
                    demand=_number(site_doc, "demand", where),
                    distance=_number(site_doc, "distance", where),
                    speed=_number(site_doc, "speed", where),
                    unload_time=parse_duration(
                        site_doc.get("unload"), f"{where}.unload"
                    ),
                    proposed_start=parse_time(
                        site_doc.get("proposed_start"), f"{where}.proposed_start"
                    ),
                    gamma_override=(
                        parse_duration(
                            site_doc["gamma_override"], f"{where}.gamma_override"
                        )
                        if "gamma_override" in site_doc
                        else None
                    ),
                )
            )
        except ValidationError as exc:
            raise InputError(f"{where}: {exc}") from exc

    try:
        return Instance(depot=depot, sites=tuple(sites))
    except ValidationError as exc:
        raise InputError(str(exc)) from exc


def load_instance(path: str | Path) -> Instance:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from exc
    try:
        return instance_from_dict(doc)
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from exc


def bundled_instance_path(name: str) -> Path:
    candidate = resources.files("rmcdp.data") / f"{name}.json"
    with resources.as_file(candidate) as path:
        if not path.exists():
            raise InputError(f"no bundled instance named {name!r}")
        return path


def bundled_schedule_path(name: str) -> Path:
    candidate = resources.files("rmcdp.data") / f"{name}.csv"
    with resources.as_file(candidate) as path:
        if not path.exists():
            raise InputError(f"no bundled schedule named {name!r}")
        return path


def schedule_to_csv(schedule: Schedule) -> str:
    buffer = _io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(SCHEDULE_HEADER)
    for entry in sorted(schedule.entries, key=lambda e: e.trip):
        writer.writerow(
            (
                entry.site_id,
                entry.trip.trip_index,
                format_time(entry.depot_start),
                format_time(entry.site_arrival),
                format_time(entry.site_departure),
                _format_quantity(entry.cumulative_delivered),
            )
        )
    return buffer.getvalue()


def _format_quantity(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else repr(float(value))


def write_schedule_csv(path: str | Path, schedule: Schedule) -> None:
    Path(path).write_text(schedule_to_csv(schedule))


def read_schedule_csv(path: str | Path, instance: Instance) -> Schedule:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc
    reader = csv.reader(_io.StringIO(text))
    rows = list(reader)
    if not rows or tuple(rows[0]) != SCHEDULE_HEADER:
        raise InputError(
            f"{path}:1: expected header {','.join(SCHEDULE_HEADER)}"
        )
    entries = []
    previous_cumulative: dict[int, float] = {}
    for line_no, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(SCHEDULE_HEADER):
            raise InputError(f"{path}:{line_no}: expected {len(SCHEDULE_HEADER)} fields")
        where = f"{path}:{line_no}"
        try:
            site_id = int(row[0])
            trip_index = int(row[1])
        except ValueError as exc:
            raise InputError(f"{where}: site and trip must be integers") from exc
        if not any(site.id == site_id for site in instance.sites):
            raise InputError(f"{where}: unknown site {site_id}")
        depot_start = parse_time(row[2], f"{where}: depot_start")
        site_start = parse_time(row[3], f"{where}: site_start")
        site_end = parse_time(row[4], f"{where}: site_end")
        try:
            cumulative = float(row[5])
        except ValueError as exc:
            raise InputError(f"{where}: delivery must be a number") from exc
        delivered = cumulative - previous_cumulative.get(site_id, 0.0)
        previous_cumulative[site_id] = cumulative
        entries.append(
            ScheduleEntry(
                trip=TripId(site_id, trip_index),
                depot_start=depot_start,
                site_arrival=site_start,
                site_departure=site_end,
                delivered=delivered,
                cumulative_delivered=cumulative,
            )
        )
    entries.sort(key=lambda e: e.trip)
    return Schedule(entries=tuple(entries), origin=str(path))

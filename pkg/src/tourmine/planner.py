"""Greedy nearest-neighbor trip planning over recommended places."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

from .data import PlaceCatalog
from .errors import EmptyRecommendations, InvalidCoordinate, TourmineError

EARTH_RADIUS_KM = 6371.0


def _check_coord(point) -> tuple[float, float]:
    lat, lon = float(point[0]), float(point[1])
    if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
        raise InvalidCoordinate(f"coordinates ({lat}, {lon}) out of range")
    return lat, lon


def haversine(a, b) -> float:
    """Great-circle distance in kilometers between two (lat, lon) pairs."""
    lat1, lon1 = _check_coord(a)
    lat2, lon2 = _check_coord(b)
    phi1, phi2 = math.radians(lat1), math.radians(lat2)
    dphi = math.radians(lat2 - lat1)
    dlam = math.radians(lon2 - lon1)
    h = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2) ** 2
    return 2 * EARTH_RADIUS_KM * math.asin(math.sqrt(h))


@dataclass(frozen=True)
class Itinerary:
    """Day-by-day visit order; legs are (day, stop_index, place_id, leg_km)."""

    days: tuple[tuple[int, ...], ...]
    total_distance_km: float
    legs: tuple[tuple[int, int, int, float], ...]

    def all_places(self) -> list[int]:
        return [pid for day in self.days for pid in day]


def plan_trip(
    recommendations,
    catalog: PlaceCatalog,
    start,
    days: int = 3,
    per_day: int = 4,
) -> Itinerary:
    """Schedule the top days*per_day recommendations greedily by distance.

    The route starts at `start`, always moves to the nearest unscheduled
    stop (ties -> lower place id), and carries the anchor across day
    boundaries (no return trips). Deterministic for identical inputs.
    """
    if days < 1 or per_day < 1:
        raise TourmineError(f"days and per_day must be >= 1, got {days}, {per_day}")
    if not recommendations:
        raise EmptyRecommendations("no recommendations to schedule")
    anchor = _check_coord(start)

    chosen = list(recommendations)[: days * per_day]
    remaining = {}
    for rec in chosen:
        place = catalog.place(catalog.ordinal_for(rec.place_id))
        remaining[place.id] = (place.lat, place.lon)

    day_plans: list[tuple[int, ...]] = []
    legs: list[tuple[int, int, int, float]] = []
    total = 0.0
    for day in range(1, days + 1):
        plan: list[int] = []
        for stop in range(1, per_day + 1):
            if not remaining:
                break
            pid = min(remaining, key=lambda p: (haversine(anchor, remaining[p]), p))
            leg = haversine(anchor, remaining[pid])
            total += leg
            legs.append((day, stop, pid, leg))
            plan.append(pid)
            anchor = remaining.pop(pid)
        if plan:
            day_plans.append(tuple(plan))
        if not remaining:
            break
    return Itinerary(tuple(day_plans), total, tuple(legs))


def itinerary_to_csv(itinerary: Itinerary, catalog: PlaceCatalog) -> str:
    buf = io.StringIO()
    buf.write("day,stop_index,place_id,name,leg_km\n")
    for day, stop, pid, leg in itinerary.legs:
        name = catalog.place(catalog.ordinal_for(pid)).name
        buf.write(f"{day},{stop},{pid},{name},{leg:.6f}\n")
    return buf.getvalue()

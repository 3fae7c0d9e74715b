"""The algebra of the three annotation kinds: time intervals, geographic
scopes, and entity references, plus the hierarchies and similarity functions
built on top of them.

All similarities are symmetric, bounded in [0, 1], and equal 1 on identical
non-empty inputs. Everything here is immutable and thread-safe.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path
from typing import IO, Iterable, Iterator, Mapping, Union

from .errors import BadParameterError, UnmappedMemberError

TIME_LEVELS = ("day", "month", "year", "decade", "ALL")
GEO_LEVELS = ("place", "country", "continent", "ALL")
ENTITY_LEVELS = ("entity", "type", "supertype", "ALL")

#: Bucket used for units and events without a usable geographic annotation.
GEO_UNKNOWN = "geo-unknown"

#: Default length scale of the point-distance kernel, in kilometres.
DEFAULT_KERNEL_KM = 500.0

EARTH_RADIUS_KM = 6371.0


# ---------------------------------------------------------------------------
# Time intervals
# ---------------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class TimeInterval:
    """Inclusive calendar-day interval. ``begin <= end`` always holds."""

    begin: date
    end: date

    def __post_init__(self) -> None:
        if self.begin > self.end:
            raise BadParameterError(f"interval begin {self.begin} after end {self.end}")

    @property
    def days(self) -> int:
        """Number of days covered, inclusive of both endpoints."""
        return (self.end - self.begin).days + 1

    def overlaps(self, other: "TimeInterval") -> bool:
        return self.begin <= other.end and other.begin <= self.end

    def intersect_days(self, other: "TimeInterval") -> int:
        lo = max(self.begin, other.begin)
        hi = min(self.end, other.end)
        return max(0, (hi - lo).days + 1)

    def midpoint(self) -> date:
        """The middle day; for even spans, the earlier of the two middles."""
        return self.begin + timedelta(days=(self.end - self.begin).days // 2)

    def hull(self, other: "TimeInterval") -> "TimeInterval":
        return TimeInterval(min(self.begin, other.begin), max(self.end, other.end))

    def isoformat(self) -> tuple[str, str]:
        return self.begin.isoformat(), self.end.isoformat()

    @classmethod
    def parse(cls, begin: str, end: str) -> "TimeInterval":
        return cls(date.fromisoformat(begin), date.fromisoformat(end))

    @classmethod
    def single_day(cls, day: date) -> "TimeInterval":
        return cls(day, day)


def time_sim(a: TimeInterval, b: TimeInterval) -> float:
    """Jaccard similarity on inclusive day sets: |a ∩ b| / |a ∪ b|.

    1 iff the intervals are equal, 0 iff they are disjoint.
    """
    inter = a.intersect_days(b)
    union = a.days + b.days - inter
    return inter / union


# ---------------------------------------------------------------------------
# Geographic scopes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GeoScope:
    """A point or an axis-aligned lat/lon minimum bounding rectangle.

    Points are stored as degenerate rectangles (min == max on both axes).
    No antimeridian wrap: ``min_lon <= max_lon`` is required.
    """

    min_lat: float
    min_lon: float
    max_lat: float
    max_lon: float

    def __post_init__(self) -> None:
        if not (-90.0 <= self.min_lat <= self.max_lat <= 90.0):
            raise BadParameterError(f"latitude out of range: {self}")
        if not (-180.0 <= self.min_lon <= self.max_lon <= 180.0):
            raise BadParameterError(f"longitude out of range: {self}")

    @classmethod
    def point(cls, lat: float, lon: float) -> "GeoScope":
        return cls(lat, lon, lat, lon)

    @classmethod
    def box(cls, min_lat: float, min_lon: float, max_lat: float, max_lon: float) -> "GeoScope":
        return cls(min_lat, min_lon, max_lat, max_lon)

    @property
    def is_point(self) -> bool:
        return self.min_lat == self.max_lat and self.min_lon == self.max_lon

    @property
    def area(self) -> float:
        """Rectangle area in squared degrees (0 for points and lines)."""
        return (self.max_lat - self.min_lat) * (self.max_lon - self.min_lon)

    def center(self) -> tuple[float, float]:
        return (self.min_lat + self.max_lat) / 2.0, (self.min_lon + self.max_lon) / 2.0

    def intersects(self, other: "GeoScope") -> bool:
        return (
            self.min_lat <= other.max_lat
            and other.min_lat <= self.max_lat
            and self.min_lon <= other.max_lon
            and other.min_lon <= self.max_lon
        )

    def hull(self, other: "GeoScope") -> "GeoScope":
        return GeoScope(
            min(self.min_lat, other.min_lat),
            min(self.min_lon, other.min_lon),
            max(self.max_lat, other.max_lat),
            max(self.max_lon, other.max_lon),
        )

    def to_payload(self) -> dict:
        if self.is_point:
            return {"lat": self.min_lat, "lon": self.min_lon}
        return {
            "min_lat": self.min_lat,
            "min_lon": self.min_lon,
            "max_lat": self.max_lat,
            "max_lon": self.max_lon,
        }

    @classmethod
    def from_payload(cls, payload: Mapping) -> "GeoScope":
        if "lat" in payload:
            return cls.point(float(payload["lat"]), float(payload["lon"]))
        return cls.box(
            float(payload["min_lat"]),
            float(payload["min_lon"]),
            float(payload["max_lat"]),
            float(payload["max_lon"]),
        )


def haversine_km(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    """Great-circle distance in kilometres on a sphere of radius 6371 km."""
    p1, p2 = math.radians(lat1), math.radians(lat2)
    dp = math.radians(lat2 - lat1)
    dl = math.radians(lon2 - lon1)
    h = math.sin(dp / 2.0) ** 2 + math.cos(p1) * math.cos(p2) * math.sin(dl / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


def geo_sim(a: GeoScope, b: GeoScope, lambda_km: float = DEFAULT_KERNEL_KM) -> float:
    """Similarity of two geographic scopes.

    Area-Jaccard for a pair of proper rectangles; distance kernel
    exp(-haversine_km / lambda_km) between the centers when either side is a
    point (or degenerate, zero-area rectangle). Identical scopes score 1.
    """
    if a == b:
        return 1.0
    if a.area == 0.0 or b.area == 0.0:
        d = haversine_km(*a.center(), *b.center())
        return math.exp(-d / lambda_km)
    if not a.intersects(b):
        return 0.0
    inter = max(0.0, min(a.max_lat, b.max_lat) - max(a.min_lat, b.min_lat)) * max(
        0.0, min(a.max_lon, b.max_lon) - max(a.min_lon, b.min_lon)
    )
    union = a.area + b.area - inter
    return inter / union if union > 0 else 0.0


def entity_sim(a: Iterable[int], b: Iterable[int]) -> float:
    """Jaccard similarity on entity-id sets; two empty sets score 0."""
    sa, sb = frozenset(a), frozenset(b)
    if not sa and not sb:
        return 0.0
    return len(sa & sb) / len(sa | sb)


# ---------------------------------------------------------------------------
# Entity catalog
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EntityEntry:
    """One catalog record: dense id, unique canonical name, and the type path
    entity -> type -> supertype -> ALL. Geographic entities carry coordinates.
    """

    id: int
    name: str
    type: str
    supertype: str
    lat: float | None = None
    lon: float | None = None

    @property
    def geo(self) -> GeoScope | None:
        if self.lat is None or self.lon is None:
            return None
        return GeoScope.point(self.lat, self.lon)


class EntityCatalog:
    """Immutable entity catalog with dense, stable ids.

    File format: UTF-8 newline-delimited JSON records with fields
    ``id``, ``name``, ``type``, ``supertype`` and optional ``lat``/``lon``.
    """

    def __init__(self, entries: Iterable[EntityEntry]):
        self.entries: tuple[EntityEntry, ...] = tuple(entries)
        ids = [e.id for e in self.entries]
        if sorted(ids) != list(range(len(ids))):
            raise BadParameterError("catalog ids must be dense 0..N-1")
        self._by_id = {e.id: e for e in self.entries}
        self._by_name: dict[str, EntityEntry] = {}
        for e in self.entries:
            if e.name in self._by_name:
                raise BadParameterError(f"duplicate canonical name: {e.name}")
            self._by_name[e.name] = e
        # type -> supertype must be a function for the hierarchy to be rooted
        self._super_of_type: dict[str, str] = {}
        for e in self.entries:
            prev = self._super_of_type.setdefault(e.type, e.supertype)
            if prev != e.supertype:
                raise BadParameterError(
                    f"type {e.type!r} maps to two supertypes: {prev!r}, {e.supertype!r}"
                )

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, entity_id: int) -> bool:
        return entity_id in self._by_id

    def get(self, entity_id: int) -> EntityEntry:
        try:
            return self._by_id[entity_id]
        except KeyError:
            raise UnmappedMemberError(f"unknown entity id: {entity_id}") from None

    def by_name(self, name: str) -> EntityEntry:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnmappedMemberError(f"unknown entity name: {name!r}") from None

    def resolve(self, ref: Union[int, str]) -> EntityEntry:
        """Accepts either a dense id or a canonical name."""
        if isinstance(ref, bool):
            raise UnmappedMemberError(f"bad entity ref: {ref!r}")
        if isinstance(ref, int):
            return self.get(ref)
        if isinstance(ref, str):
            return self.by_name(ref)
        raise UnmappedMemberError(f"bad entity ref: {ref!r}")

    def names(self, ids: Iterable[int]) -> list[str]:
        return sorted(self.get(i).name for i in ids)

    def type_names(self) -> frozenset[str]:
        return frozenset(e.type for e in self.entries)

    def supertype_names(self) -> frozenset[str]:
        return frozenset(e.supertype for e in self.entries)

    def roll(self, member: str, level: str) -> str:
        """Roll an entity-dimension member up to ``level``.

        ``member`` may sit at any level at or below the target; rolling a
        member already at the target level is the identity.
        """
        if level not in ENTITY_LEVELS:
            raise BadParameterError(f"unknown entity level: {level}")
        if level == "ALL":
            return "ALL"
        if member in self._by_name:
            entry = self._by_name[member]
            path = {"entity": member, "type": entry.type, "supertype": entry.supertype}
            return path[level]
        if member in self._super_of_type:
            if level == "entity":
                raise UnmappedMemberError(f"cannot roll type {member!r} down to entity")
            return member if level == "type" else self._super_of_type[member]
        if member in self.supertype_names():
            if level != "supertype":
                raise UnmappedMemberError(f"cannot roll supertype {member!r} down to {level}")
            return member
        raise UnmappedMemberError(f"unmapped member: {member!r} in entity hierarchy")

    def member_level(self, member: str) -> str:
        if member == "ALL":
            return "ALL"
        if member in self._by_name:
            return "entity"
        if member in self._super_of_type:
            return "type"
        if member in self.supertype_names():
            return "supertype"
        raise UnmappedMemberError(f"unmapped member: {member!r} in entity hierarchy")

    @classmethod
    def from_file(cls, path: Union[str, Path, IO[str]]) -> "EntityCatalog":
        return cls(
            EntityEntry(
                id=int(rec["id"]),
                name=str(rec["name"]),
                type=str(rec["type"]),
                supertype=str(rec["supertype"]),
                lat=None if rec.get("lat") is None else float(rec["lat"]),
                lon=None if rec.get("lon") is None else float(rec["lon"]),
            )
            for rec in _iter_ndjson(path)
        )


# ---------------------------------------------------------------------------
# Gazetteer (geo hierarchy)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Place:
    name: str
    country: str
    continent: str
    lat: float
    lon: float


class Gazetteer:
    """Place -> country -> continent lookup with coordinates per place.

    File format: UTF-8 newline-delimited JSON records with fields
    ``place``, ``country``, ``continent``, ``lat``, ``lon``.
    """

    def __init__(self, places: Iterable[Place], max_snap_km: float = DEFAULT_KERNEL_KM):
        self.places: tuple[Place, ...] = tuple(places)
        self.max_snap_km = max_snap_km
        self._by_name = {p.name: p for p in self.places}
        if len(self._by_name) != len(self.places):
            raise BadParameterError("duplicate place names in gazetteer")
        self._continent_of: dict[str, str] = {}
        for p in self.places:
            prev = self._continent_of.setdefault(p.country, p.continent)
            if prev != p.continent:
                raise BadParameterError(
                    f"country {p.country!r} maps to two continents: {prev!r}, {p.continent!r}"
                )

    def place(self, name: str) -> Place:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnmappedMemberError(f"unknown place: {name!r}") from None

    def place_names(self) -> frozenset[str]:
        return frozenset(self._by_name)

    def country_names(self) -> frozenset[str]:
        return frozenset(p.country for p in self.places)

    def continent_names(self) -> frozenset[str]:
        return frozenset(p.continent for p in self.places)

    def nearest_place(self, lat: float, lon: float, max_km: float | None = None) -> Place | None:
        """Nearest gazetteer place within ``max_km`` (None when out of range)."""
        limit = self.max_snap_km if max_km is None else max_km
        best: tuple[float, str] | None = None
        for p in self.places:
            d = haversine_km(lat, lon, p.lat, p.lon)
            if best is None or (d, p.name) < best:
                best = (d, p.name)
        if best is None or best[0] > limit:
            return None
        return self._by_name[best[1]]

    def place_for_scope(self, scope: GeoScope, max_km: float | None = None) -> Place | None:
        return self.nearest_place(*scope.center(), max_km=max_km)

    def roll(self, member: str, level: str) -> str:
        """Roll a geo-dimension member up to ``level``.

        The ``geo-unknown`` member rolls to itself below ALL. Rolling a
        member already at the target level is the identity.
        """
        if level not in GEO_LEVELS:
            raise BadParameterError(f"unknown geo level: {level}")
        if level == "ALL":
            return "ALL"
        if member == GEO_UNKNOWN:
            return GEO_UNKNOWN
        if member in self._by_name:
            p = self._by_name[member]
            return {"place": member, "country": p.country, "continent": p.continent}[level]
        if member in self._continent_of:
            if level == "place":
                raise UnmappedMemberError(f"cannot roll country {member!r} down to place")
            return member if level == "country" else self._continent_of[member]
        if member in self.continent_names():
            if level != "continent":
                raise UnmappedMemberError(f"cannot roll continent {member!r} down to {level}")
            return member
        raise UnmappedMemberError(f"unmapped member: {member!r} in geo hierarchy")

    def member_level(self, member: str) -> str:
        if member == "ALL":
            return "ALL"
        if member == GEO_UNKNOWN:
            return "place"  # lives at every level; treated as a leaf member
        if member in self._by_name:
            return "place"
        if member in self._continent_of:
            return "country"
        if member in self.continent_names():
            return "continent"
        raise UnmappedMemberError(f"unmapped member: {member!r} in geo hierarchy")

    @classmethod
    def from_file(
        cls, path: Union[str, Path, IO[str]], max_snap_km: float = DEFAULT_KERNEL_KM
    ) -> "Gazetteer":
        return cls(
            (
                Place(
                    name=str(rec["place"]),
                    country=str(rec["country"]),
                    continent=str(rec["continent"]),
                    lat=float(rec["lat"]),
                    lon=float(rec["lon"]),
                )
                for rec in _iter_ndjson(path)
            ),
            max_snap_km=max_snap_km,
        )


# ---------------------------------------------------------------------------
# Time hierarchy members
# ---------------------------------------------------------------------------

def time_member(day: date, level: str) -> str:
    """Calendar member containing ``day`` at ``level``.

    Members are strings: "2008-08-08" (day), "2008-08" (month), "2008"
    (year), "2000s" (decade), "ALL".
    """
    if level == "day":
        return day.isoformat()
    if level == "month":
        return f"{day.year:04d}-{day.month:02d}"
    if level == "year":
        return f"{day.year:04d}"
    if level == "decade":
        return f"{day.year // 10 * 10:04d}s"
    if level == "ALL":
        return "ALL"
    raise BadParameterError(f"unknown time level: {level}")


def time_member_level(member: str) -> str:
    """Detect the level a time member string lives at."""
    if member == "ALL":
        return "ALL"
    if member.endswith("s") and member[:-1].isdigit() and len(member) == 5:
        return "decade"
    parts = member.split("-")
    if len(parts) == 1 and len(parts[0]) == 4 and parts[0].isdigit():
        return "year"
    if len(parts) == 2:
        try:
            date.fromisoformat(f"{member}-01")
            return "month"
        except ValueError:
            pass
    if len(parts) == 3:
        try:
            date.fromisoformat(member)
            return "day"
        except ValueError:
            pass
    raise UnmappedMemberError(f"unmapped member: {member!r} in time hierarchy")


def roll_time(member: str, level: str) -> str:
    """Roll a time member string up to ``level`` (identity at its own level)."""
    if level not in TIME_LEVELS:
        raise BadParameterError(f"unknown time level: {level}")
    current = time_member_level(member)
    if TIME_LEVELS.index(level) < TIME_LEVELS.index(current):
        raise UnmappedMemberError(f"cannot roll {member!r} down to {level}")
    if level == "ALL":
        return "ALL"
    if current == "day":
        return time_member(date.fromisoformat(member), level)
    if current == "month":
        if level == "month":
            return member
        year = int(member[:4])
        return f"{year:04d}" if level == "year" else f"{year // 10 * 10:04d}s"
    if current == "year":
        year = int(member)
        return member if level == "year" else f"{year // 10 * 10:04d}s"
    return member  # decade at decade


# ---------------------------------------------------------------------------
# Shared ndjson reader
# ---------------------------------------------------------------------------

def _iter_ndjson(source: Union[str, Path, IO[str]]) -> Iterator[dict]:
    """Yield one JSON object per non-blank line."""
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            yield from _iter_ndjson(fh)
        return
    for line in source:
        line = line.strip()
        if line:
            yield json.loads(line)

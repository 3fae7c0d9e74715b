"""The event data cube: time x geo x entity aggregation of a mined event
set, with slice, dice, drill-up, drill-down, and roll (axis rotation).

A cube remembers its source events, its per-dimension levels, and the
filters accumulated by slice/dice ops; every op re-derives cells from the
source event list, so any pipeline's result is exactly a flat
filter-group-aggregate over the events. An event with n entities
contributes one cell incidence per entity; ``count`` therefore counts
(event, entity) incidences and ``score_mass`` sums the event score once per
incidence, while distinct events stay recoverable from ``event_ids``.

Pipelines are also accepted as text, one op per line or semicolon-separated:

    slice entity=Usain_Bolt
    dice geo=China,Brazil
    drillup time
    drilldown geo
    roll geo,time,entity
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

from .annotations import (
    ENTITY_LEVELS,
    GEO_LEVELS,
    GEO_UNKNOWN,
    TIME_LEVELS,
    EntityCatalog,
    Gazetteer,
    roll_time,
    time_member,
    time_member_level,
)
from .errors import (
    BadParameterError,
    EventscopeError,
    LevelBoundError,
    NoSuchMemberError,
    PipelineError,
    UnmappedMemberError,
)
from .miner import Event, EventSet

DIMENSIONS = ("time", "geo", "entity")

_LEVELS = {"time": TIME_LEVELS, "geo": GEO_LEVELS, "entity": ENTITY_LEVELS}


@dataclass(frozen=True)
class CubeLevelSpec:
    """One hierarchy level per dimension."""

    time: str = "year"
    geo: str = "country"
    entity: str = "entity"

    def __post_init__(self) -> None:
        for dim in DIMENSIONS:
            level = getattr(self, dim)
            if level not in _LEVELS[dim]:
                raise BadParameterError(f"bad {dim} level: {level}")

    def level(self, dim: str) -> str:
        return getattr(self, dim)

    def with_level(self, dim: str, level: str) -> "CubeLevelSpec":
        return replace(self, **{dim: level})

    def to_payload(self) -> dict:
        return {"time": self.time, "geo": self.geo, "entity": self.entity}


@dataclass(frozen=True)
class Measures:
    count: int
    score_mass: float
    event_ids: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.count < 1 or self.score_mass <= 0 or not self.event_ids:
            raise BadParameterError("cell measures must be positive and non-empty")


# --- ops -------------------------------------------------------------------

@dataclass(frozen=True)
class Slice:
    dim: str
    member: str


@dataclass(frozen=True)
class Dice:
    members: Mapping[str, frozenset[str]]  # dim -> allowed members, >= 1 dim


@dataclass(frozen=True)
class DrillUp:
    dim: str


@dataclass(frozen=True)
class DrillDown:
    dim: str


@dataclass(frozen=True)
class Roll:
    axis_order: tuple[str, str, str]


CubeOp = Slice | Dice | DrillUp | DrillDown | Roll


@dataclass(frozen=True)
class _Filter:
    """A slice/dice restriction recorded at the level it was applied."""

    dim: str
    level: str
    members: frozenset[str]


@dataclass(frozen=True)
class _Contribution:
    """One (event, entity) incidence at leaf granularity."""

    event_id: str
    score: float
    time_day: str  # leaf day member of the event interval midpoint
    geo_place: str  # leaf place member, or GEO_UNKNOWN
    entity_name: str


class EventCube:
    """Immutable cube over a mined event set. Ops return new cubes."""

    def __init__(
        self,
        contributions: Sequence[_Contribution],
        levels: CubeLevelSpec,
        catalog: EntityCatalog,
        gazetteer: Gazetteer,
        filters: tuple[_Filter, ...] = (),
        axis_order: tuple[str, str, str] = DIMENSIONS,
        skipped_events: int = 0,
        source_events: tuple[Event, ...] = (),
    ):
        if tuple(sorted(axis_order)) != tuple(sorted(DIMENSIONS)):
            raise BadParameterError(f"axis order must permute {DIMENSIONS}: {axis_order}")
        self._contributions = tuple(contributions)
        self.levels = levels
        self.catalog = catalog
        self.gazetteer = gazetteer
        self.filters = filters
        self.axis_order = axis_order
        self.skipped_events = skipped_events
        self.source_events = source_events
        self.cells: dict[tuple[str, str, str], Measures] = self._aggregate()

    # -- member mapping ----------------------------------------------------

    def _roll_leaf(self, contrib: _Contribution, dim: str, level: str) -> str:
        if dim == "time":
            return roll_time(contrib.time_day, level)
        if dim == "geo":
            return self.gazetteer.roll(contrib.geo_place, level)
        return self.catalog.roll(contrib.entity_name, level)

    def _passes(self, contrib: _Contribution) -> bool:
        return all(
            self._roll_leaf(contrib, f.dim, f.level) in f.members for f in self.filters
        )

    def _aggregate(self) -> dict[tuple[str, str, str], Measures]:
        grouped: dict[tuple[str, str, str], list[_Contribution]] = {}
        for contrib in self._contributions:
            if not self._passes(contrib):
                continue
            key = (
                self._roll_leaf(contrib, "time", self.levels.time),
                self._roll_leaf(contrib, "geo", self.levels.geo),
                self._roll_leaf(contrib, "entity", self.levels.entity),
            )
            grouped.setdefault(key, []).append(contrib)
        cells = {}
        for key, group in grouped.items():
            ids = tuple(sorted({c.event_id for c in group}))
            cells[key] = Measures(
                count=len(group),
                score_mass=sum(c.score for c in group),
                event_ids=ids,
            )
        return cells

    # -- totals and export ---------------------------------------------------

    @property
    def total_count(self) -> int:
        return sum(m.count for m in self.cells.values())

    @property
    def total_score_mass(self) -> float:
        return sum(m.score_mass for m in self.cells.values())

    def rows(self) -> list[dict]:
        """Cells as records ordered by the cube's presentation axis order."""
        order = {dim: i for i, dim in enumerate(DIMENSIONS)}
        perm = [order[dim] for dim in self.axis_order]
        out = []
        for key in sorted(self.cells, key=lambda k: tuple(k[i] for i in perm)):
            m = self.cells[key]
            out.append(
                {
                    "time": key[0],
                    "geo": key[1],
                    "entity": key[2],
                    "count": m.count,
                    "score_mass": m.score_mass,
                    "event_ids": list(m.event_ids),
                }
            )
        return out

    def to_payload(self) -> dict:
        return {
            "levels": self.levels.to_payload(),
            "axis_order": list(self.axis_order),
            "filters": [
                {"dim": f.dim, "level": f.level, "members": sorted(f.members)}
                for f in self.filters
            ],
            "skipped_events": self.skipped_events,
            "cells": self.rows(),
        }

    # -- member validation ---------------------------------------------------

    def _validate_member(self, dim: str, member: str) -> None:
        level = self.levels.level(dim)
        try:
            if dim == "time":
                if time_member_level(member) != level:
                    raise UnmappedMemberError(member)
            elif dim == "geo":
                if member == GEO_UNKNOWN:
                    if level == "ALL":
                        raise UnmappedMemberError(member)
                    return
                if self.gazetteer.member_level(member) != level:
                    raise UnmappedMemberError(member)
            else:
                if self.catalog.member_level(member) != level:
                    raise UnmappedMemberError(member)
        except UnmappedMemberError:
            raise NoSuchMemberError(f"no such member at level {level}: {member!r}") from None

    def _clone(self, **overrides) -> "EventCube":
        kwargs = dict(
            contributions=self._contributions,
            levels=self.levels,
            catalog=self.catalog,
            gazetteer=self.gazetteer,
            filters=self.filters,
            axis_order=self.axis_order,
            skipped_events=self.skipped_events,
            source_events=self.source_events,
        )
        kwargs.update(overrides)
        return EventCube(**kwargs)


def build_cube(
    events: EventSet | Iterable[Event],
    spec: CubeLevelSpec,
    catalog: EntityCatalog,
    gazetteer: Gazetteer,
) -> EventCube:
    """Map each event into cube cells at ``spec`` levels.

    Time member: the event interval midpoint's day, rolled up. Geo member:
    the event's representative scope snapped to the nearest gazetteer place,
    rolled up (events without a scope land in ``geo-unknown``). One
    contribution per entity. Events whose entity cannot be resolved are
    skipped and counted, not fatal.
    """
    event_list = list(events)
    if not event_list:
        raise BadParameterError("cannot build a cube from an empty event set")
    contributions: list[_Contribution] = []
    skipped = 0
    for event in event_list:
        day = time_member(event.time.midpoint(), "day")
        if event.geo_scope is None:
            place = GEO_UNKNOWN
        else:
            hit = gazetteer.place_for_scope(event.geo_scope)
            if hit is None:
                skipped += 1
                continue
            place = hit.name
        try:
            names = [catalog.get(eid).name for eid in sorted(event.entities)]
        except UnmappedMemberError:
            skipped += 1
            continue
        for name in names:
            contributions.append(
                _Contribution(
                    event_id=event.id,
                    score=event.score,
                    time_day=day,
                    geo_place=place,
                    entity_name=name,
                )
            )
    return EventCube(
        contributions,
        spec,
        catalog,
        gazetteer,
        skipped_events=skipped,
        source_events=tuple(event_list),
    )


def apply(cube: EventCube, op: CubeOp) -> EventCube:
    """Apply one op, returning a new cube; the input is never mutated."""
    if isinstance(op, Slice):
        if op.dim not in DIMENSIONS:
            raise BadParameterError(f"unknown dimension: {op.dim}")
        cube._validate_member(op.dim, op.member)
        new_filter = _Filter(op.dim, cube.levels.level(op.dim), frozenset((op.member,)))
        return cube._clone(filters=cube.filters + (new_filter,))

    if isinstance(op, Dice):
        if not op.members:
            raise BadParameterError("dice needs at least one dimension")
        new_filters = []
        for dim, members in sorted(op.members.items()):
            if dim not in DIMENSIONS:
                raise BadParameterError(f"unknown dimension: {dim}")
            if not members:
                raise BadParameterError(f"dice on {dim} needs at least one member")
            for member in members:
                cube._validate_member(dim, member)
            new_filters.append(_Filter(dim, cube.levels.level(dim), frozenset(members)))
        return cube._clone(filters=cube.filters + tuple(new_filters))

    if isinstance(op, DrillUp):
        levels = _LEVELS[op.dim] if op.dim in DIMENSIONS else None
        if levels is None:
            raise BadParameterError(f"unknown dimension: {op.dim}")
        current = cube.levels.level(op.dim)
        i = levels.index(current)
        if current == "ALL":
            raise LevelBoundError(f"already at coarsest level for {op.dim}")
        return cube._clone(levels=cube.levels.with_level(op.dim, levels[i + 1]))

    if isinstance(op, DrillDown):
        levels = _LEVELS[op.dim] if op.dim in DIMENSIONS else None
        if levels is None:
            raise BadParameterError(f"unknown dimension: {op.dim}")
        current = cube.levels.level(op.dim)
        i = levels.index(current)
        if i == 0:
            raise LevelBoundError(f"already at finest level for {op.dim}")
        return cube._clone(levels=cube.levels.with_level(op.dim, levels[i - 1]))

    if isinstance(op, Roll):
        if tuple(sorted(op.axis_order)) != tuple(sorted(DIMENSIONS)):
            raise BadParameterError(f"roll must permute {DIMENSIONS}: {op.axis_order}")
        return cube._clone(axis_order=op.axis_order)

    raise BadParameterError(f"unknown cube op: {op!r}")


def run_pipeline(cube: EventCube, ops: Sequence[CubeOp]) -> EventCube:
    """Fold :func:`apply` over ``ops``, failing fast with the 0-based index
    of the offending op."""
    current = cube
    for i, op in enumerate(ops):
        try:
            current = apply(current, op)
        except EventscopeError as exc:
            raise PipelineError(i, str(exc), cause=exc) from exc
    return current


# ---------------------------------------------------------------------------
# Text pipeline format
# ---------------------------------------------------------------------------

def parse_pipeline(text: str) -> list[CubeOp]:
    """Parse the one-op-per-line (or semicolon-separated) pipeline format."""
    ops: list[CubeOp] = []
    pieces: list[str] = []
    for line in text.splitlines():
        pieces.extend(part.strip() for part in line.split(";"))
    index = 0
    for piece in pieces:
        if not piece or piece.startswith("#"):
            continue
        try:
            ops.append(_parse_op(piece))
        except EventscopeError as exc:
            raise PipelineError(index, str(exc), cause=exc) from exc
        index += 1
    return ops


def _parse_op(piece: str) -> CubeOp:
    head, _, rest = piece.partition(" ")
    head = head.lower()
    rest = rest.strip()
    if head == "slice":
        dim, _, member = rest.partition("=")
        dim, member = dim.strip(), member.strip()
        if dim not in DIMENSIONS or not member:
            raise BadParameterError(f"bad slice syntax: {piece!r}")
        return Slice(dim, member)
    if head == "dice":
        dim, _, members = rest.partition("=")
        dim, members = dim.strip(), members.strip()
        member_set = frozenset(m.strip() for m in members.split(",") if m.strip())
        if dim not in DIMENSIONS or not member_set:
            raise BadParameterError(f"bad dice syntax: {piece!r}")
        return Dice({dim: member_set})
    if head in ("drillup", "drill-up"):
        if rest not in DIMENSIONS:
            raise BadParameterError(f"bad drillup syntax: {piece!r}")
        return DrillUp(rest)
    if head in ("drilldown", "drill-down"):
        if rest not in DIMENSIONS:
            raise BadParameterError(f"bad drilldown syntax: {piece!r}")
        return DrillDown(rest)
    if head == "roll":
        axes = tuple(a.strip() for a in rest.split(",") if a.strip())
        if tuple(sorted(axes)) != tuple(sorted(DIMENSIONS)):
            raise BadParameterError(f"bad roll syntax: {piece!r}")
        return Roll(axes)  # type: ignore[arg-type]
    raise BadParameterError(f"unknown op: {piece!r}")


def run_text_pipeline(cube: EventCube, text: str) -> EventCube:
    return run_pipeline(cube, parse_pipeline(text))

"""Event mining: frequent entity itemsets per (time, geo) bucket, scored by
support-proportional probability mass.

The pipeline is: filter units to those carrying at least one entity and a
time annotation; bucket each unit by its time interval's midpoint rolled to
``time_bucket_level`` and by its geographic scope snapped to the gazetteer
and rolled to ``geo_level`` (units without usable geo fall into the
``geo-unknown`` bucket); mine maximal frequent entity itemsets per bucket
with Apriori; then normalize supports into a probability mass that induces
a total order.

An event's reported time interval is the hull of its supporting units'
intervals, so a mined event surfaces the actual span of the evidence rather
than the bucket boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .annotations import (
    GEO_UNKNOWN,
    GeoScope,
    Gazetteer,
    TimeInterval,
    entity_sim,
    geo_sim,
    time_member,
    time_sim,
)
from .corpus import AnnotationUnit
from .errors import BadParameterError

Bucket = tuple[str, str]  # (time member, geo member)
UnitRef = tuple[str, int, int]


@dataclass(frozen=True)
class MinerParams:
    """Tunables of the mining run."""

    min_support: int = 1
    max_events: int = 50
    time_bucket_level: str = "year"
    geo_level: str = "country"
    context_term_count: int = 5
    max_itemset_size: int = 4

    def __post_init__(self) -> None:
        if self.min_support < 1:
            raise BadParameterError("min_support must be >= 1")
        if self.max_events < 1:
            raise BadParameterError("max_events must be >= 1")
        if self.context_term_count < 1:
            raise BadParameterError("context_term_count must be >= 1")
        if self.max_itemset_size < 1:
            raise BadParameterError("max_itemset_size must be >= 1")
        if self.time_bucket_level not in ("day", "month", "year", "decade"):
            raise BadParameterError(f"bad time_bucket_level: {self.time_bucket_level}")
        if self.geo_level not in ("place", "country", "continent"):
            raise BadParameterError(f"bad geo_level: {self.geo_level}")

    def to_payload(self) -> dict:
        return {
            "min_support": self.min_support,
            "max_events": self.max_events,
            "time_bucket_level": self.time_bucket_level,
            "geo_level": self.geo_level,
            "context_term_count": self.context_term_count,
            "max_itemset_size": self.max_itemset_size,
        }

    @classmethod
    def from_payload(cls, payload: Mapping) -> "MinerParams":
        known = {f: payload[f] for f in cls.__dataclass_fields__ if f in payload}
        return cls(**known)


@dataclass(frozen=True)
class Event:
    """One mined event: entity set, geo member, time hull, context terms."""

    id: str
    entities: frozenset[int]
    entity_names: tuple[str, ...]
    geo_member: str
    geo_scope: GeoScope | None
    time: TimeInterval
    terms: tuple[tuple[str, int], ...]
    score: float
    support: int
    supporting_units: tuple[UnitRef, ...]

    def __post_init__(self) -> None:
        if not self.entities:
            raise BadParameterError("event entities must be non-empty")
        if self.support < 1:
            raise BadParameterError("event support must be >= 1")
        if not (0.0 < self.score <= 1.0):
            raise BadParameterError(f"event score out of (0, 1]: {self.score}")

    def to_record(self) -> dict:
        begin, end = self.time.isoformat()
        return {
            "id": self.id,
            "entities": sorted(self.entities),
            "entity_names": list(self.entity_names),
            "geo_member": self.geo_member,
            "geo": self.geo_scope.to_payload() if self.geo_scope else None,
            "time": {"begin": begin, "end": end},
            "terms": [[t, c] for t, c in self.terms],
            "score": self.score,
            "support": self.support,
            "supporting_units": [list(ref) for ref in self.supporting_units],
        }

    @classmethod
    def from_record(cls, rec: Mapping) -> "Event":
        return cls(
            id=str(rec["id"]),
            entities=frozenset(int(e) for e in rec["entities"]),
            entity_names=tuple(rec.get("entity_names", ())),
            geo_member=str(rec["geo_member"]),
            geo_scope=GeoScope.from_payload(rec["geo"]) if rec.get("geo") else None,
            time=TimeInterval.parse(rec["time"]["begin"], rec["time"]["end"]),
            terms=tuple((t, int(c)) for t, c in rec.get("terms", ())),
            score=float(rec["score"]),
            support=int(rec["support"]),
            supporting_units=tuple(tuple(ref) for ref in rec.get("supporting_units", ())),
        )


@dataclass(frozen=True)
class EventSet:
    """Ordered events; scores sum to 1 (within 1e-9) when non-empty.

    Events are ordered by score descending, then earliest time ascending,
    then sorted entity-id tuple ascending, then geo member; the miner breaks
    any remaining tie by the originating bucket, so results are total-ordered
    and deterministic.
    """

    events: tuple[Event, ...]

    def __post_init__(self) -> None:
        if self.events:
            total = sum(e.score for e in self.events)
            if abs(total - 1.0) > 1e-9:
                raise BadParameterError(f"event scores sum to {total}, expected 1")
            keys = [_order_key(e) for e in self.events]
            if keys != sorted(keys):
                raise BadParameterError("events not in canonical order")

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def __getitem__(self, i: int) -> Event:
        return self.events[i]

    def to_records(self) -> list[dict]:
        return [e.to_record() for e in self.events]

    @classmethod
    def from_records(cls, records: Iterable[Mapping]) -> "EventSet":
        return cls(tuple(Event.from_record(r) for r in records))


def _order_key(event: Event) -> tuple:
    return (
        -event.score,
        event.time.begin,
        event.time.end,
        tuple(sorted(event.entities)),
        event.geo_member,
    )


# ---------------------------------------------------------------------------
# Apriori
# ---------------------------------------------------------------------------

def frequent_itemsets(
    transactions: Sequence[frozenset[int]],
    min_support: int,
    max_size: int,
) -> dict[frozenset[int], int]:
    """All frequent entity itemsets up to ``max_size`` with their supports.

    Level-wise Apriori: candidates of size k are joins of frequent (k-1)
    itemsets, pruned by the anti-monotone property before counting.
    """
    counts: dict[frozenset[int], int] = {}
    for txn in transactions:
        for item in txn:
            key = frozenset((item,))
            counts[key] = counts.get(key, 0) + 1
    frequent: dict[frozenset[int], int] = {
        iset: c for iset, c in counts.items() if c >= min_support
    }
    level = set(frequent)
    k = 2
    while level and k <= max_size:
        candidates: set[frozenset[int]] = set()
        for a, b in combinations(sorted(level, key=sorted), 2):
            joined = a | b
            if len(joined) == k and all(
                frozenset(sub) in level for sub in combinations(joined, k - 1)
            ):
                candidates.add(joined)
        counts = {c: 0 for c in candidates}
        for txn in transactions:
            for cand in candidates:
                if cand <= txn:
                    counts[cand] += 1
        next_level = {c for c, n in counts.items() if n >= min_support}
        for c in next_level:
            frequent[c] = counts[c]
        level = next_level
        k += 1

    if __debug__:  # anti-monotone property; compiled away under -O
        for iset, support in frequent.items():
            for r in range(1, len(iset)):
                for sub in combinations(iset, r):
                    assert frequent.get(frozenset(sub), 0) >= support, (
                        "anti-monotone property violated"
                    )
    return frequent


def maximal_itemsets(frequent: Mapping[frozenset[int], int]) -> list[frozenset[int]]:
    """Itemsets with no frequent strict superset, largest first."""
    by_size = sorted(frequent, key=lambda s: (-len(s), sorted(s)))
    maximal: list[frozenset[int]] = []
    for iset in by_size:
        if not any(iset < kept for kept in maximal):
            maximal.append(iset)
    return maximal


# ---------------------------------------------------------------------------
# Bucketing and detection
# ---------------------------------------------------------------------------

def bucket_of(
    unit: AnnotationUnit, params: MinerParams, gazetteer: Gazetteer | None
) -> Bucket | None:
    """The (time member, geo member) bucket of a unit, or None when the unit
    lacks the annotations mining requires (>=1 entity and a time)."""
    if not unit.entities or unit.time is None:
        return None
    tmember = time_member(unit.time.midpoint(), params.time_bucket_level)
    gmember = GEO_UNKNOWN
    if unit.geo is not None and gazetteer is not None:
        place = gazetteer.place_for_scope(unit.geo)
        if place is not None:
            gmember = gazetteer.roll(place.name, params.geo_level)
    return (tmember, gmember)


def mine_candidates(
    units: Iterable[AnnotationUnit],
    params: MinerParams,
    gazetteer: Gazetteer | None = None,
) -> dict[Bucket, dict[frozenset[int], int]]:
    """Frequent (itemset, bucket) candidates before maximality filtering.

    This is the stage the mining oracle compares against; raising
    ``min_support`` always yields a subset of these candidates.
    """
    grouped: dict[Bucket, list[AnnotationUnit]] = {}
    for unit in units:
        bucket = bucket_of(unit, params, gazetteer)
        if bucket is not None:
            grouped.setdefault(bucket, []).append(unit)
    return {
        bucket: frequent_itemsets(
            [u.entities for u in members], params.min_support, params.max_itemset_size
        )
        for bucket, members in grouped.items()
    }


def event_detect(
    units: Iterable[AnnotationUnit],
    params: MinerParams = MinerParams(),
    *,
    gazetteer: Gazetteer | None = None,
    stopwords: frozenset[str] = frozenset(),
    entity_names: Mapping[int, str] | None = None,
) -> EventSet:
    """Mine a ranked :class:`EventSet` from annotation units.

    Returns an empty set (not an error) when no unit survives filtering or
    no itemset reaches ``min_support``.
    """
    units = list(units)
    grouped: dict[Bucket, list[AnnotationUnit]] = {}
    for unit in units:
        bucket = bucket_of(unit, params, gazetteer)
        if bucket is not None:
            grouped.setdefault(bucket, []).append(unit)

    candidates: list[tuple[frozenset[int], Bucket, list[AnnotationUnit]]] = []
    for bucket in sorted(grouped):
        members = grouped[bucket]
        frequent = frequent_itemsets(
            [u.entities for u in members], params.min_support, params.max_itemset_size
        )
        for iset in maximal_itemsets(frequent):
            supporting = [u for u in members if iset <= u.entities]
            candidates.append((iset, bucket, supporting))

    if not candidates:
        return EventSet(())

    total_support = sum(len(supporting) for _, _, supporting in candidates)
    events = []
    for iset, (_tmember, gmember), supporting in candidates:
        hull = supporting[0].time
        for u in supporting[1:]:
            hull = hull.hull(u.time)  # type: ignore[arg-type]
        term_counts: dict[str, int] = {}
        for u in supporting:
            for term, tf in u.terms.items():
                if term not in stopwords:
                    term_counts[term] = term_counts.get(term, 0) + tf
        top_terms = tuple(
            sorted(term_counts.items(), key=lambda kv: (-kv[1], kv[0]))[: params.context_term_count]
        )
        scopes = [u.geo for u in supporting if u.geo is not None]
        geo_scope = None
        if scopes:
            geo_scope = scopes[0]
            for s in scopes[1:]:
                geo_scope = geo_scope.hull(s)
        names = (
            tuple(sorted(entity_names[e] for e in iset)) if entity_names is not None else ()
        )
        events.append(
            Event(
                id="",
                entities=iset,
                entity_names=names,
                geo_member=gmember,
                geo_scope=geo_scope,
                time=hull,
                terms=top_terms,
                score=len(supporting) / total_support,
                support=len(supporting),
                supporting_units=tuple(sorted(u.ref for u in supporting)),
            )
        )

    # Sort with the candidate bucket appended so the order stays total even
    # when two candidates share score, hull, entities, and geo member.
    order = sorted(
        range(len(events)), key=lambda i: _order_key(events[i]) + (candidates[i][1],)
    )
    events = [events[i] for i in order][: params.max_events]
    kept_mass = sum(e.score for e in events)
    events = [
        replace(e, id=f"e{i}", score=e.score / kept_mass) for i, e in enumerate(events, start=1)
    ]
    return EventSet(tuple(events))


# ---------------------------------------------------------------------------
# Event similarity
# ---------------------------------------------------------------------------

def event_sim(
    a: Event,
    b: Event,
    weights: tuple[float, float, float] = (1.0, 1.0, 1.0),
) -> float:
    """Weighted mean of entity, time, and geo similarity.

    ``weights`` orders as (entity, time, geo) and is normalized internally.
    Geo compares the events' representative scopes; two events both lacking
    a scope count as geographically identical.
    """
    w_ent, w_time, w_geo = weights
    total = w_ent + w_time + w_geo
    if total <= 0:
        raise BadParameterError("event_sim weights must have positive sum")
    if a.geo_scope is None and b.geo_scope is None:
        g = 1.0
    elif a.geo_scope is None or b.geo_scope is None:
        g = 0.0
    else:
        g = geo_sim(a.geo_scope, b.geo_scope)
    return (
        w_ent * entity_sim(a.entities, b.entities)
        + w_time * time_sim(a.time, b.time)
        + w_geo * g
    ) / total

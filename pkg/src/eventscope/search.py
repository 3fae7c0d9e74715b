"""Multidimensional retrieval plus event-driven diversification and
extractive summarization.

A document's score mixes four [0, 1] components: max-normalized BM25 for
the keyword part and the annotation similarities for time, geo, and entity
parts. Absent query components contribute nothing and their weight mass is
redistributed uniformly over the present ones, so rankings are invariant
under positive rescaling of the weight vector.

Query text syntax (CLI and API share it):

    summer olympics time:[2012-01-01,2012-12-31] geo:(39.55,116.23) entity:{Usain_Bolt}

with ``geo:[minlat,minlon,maxlat,maxlon]`` for rectangles and entity names
or dense ids inside the braces.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from datetime import date
from typing import Sequence

from .annotations import (
    DEFAULT_KERNEL_KM,
    EntityCatalog,
    GeoScope,
    TimeInterval,
    entity_sim,
    geo_sim,
    time_sim,
)
from .corpus import AnnotationUnit, Corpus, Document, tokenize
from .errors import BadParameterError, EmptyQueryError
from .index import InvertedIndex
from .miner import Event, EventSet

COMPONENTS = ("text", "time", "geo", "entity")


@dataclass(frozen=True)
class Query:
    """Multidimensional query; at least one component must be present."""

    keywords: tuple[str, ...] = ()
    time: TimeInterval | None = None
    geo: GeoScope | None = None
    entities: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        if not (self.keywords or self.time or self.geo or self.entities):
            raise EmptyQueryError("query has no present component")

    def present(self) -> tuple[str, ...]:
        out = []
        if self.keywords:
            out.append("text")
        if self.time is not None:
            out.append("time")
        if self.geo is not None:
            out.append("geo")
        if self.entities:
            out.append("entity")
        return tuple(out)

    def to_payload(self) -> dict:
        return {
            "keywords": list(self.keywords),
            "time": {"begin": self.time.begin.isoformat(), "end": self.time.end.isoformat()}
            if self.time
            else None,
            "geo": self.geo.to_payload() if self.geo else None,
            "entities": sorted(self.entities),
        }


_TIME_RE = re.compile(r"time:\[([0-9-]+)\s*,\s*([0-9-]+)\]")
_GEO_POINT_RE = re.compile(r"geo:\(([-0-9.]+)\s*,\s*([-0-9.]+)\)")
_GEO_BOX_RE = re.compile(
    r"geo:\[([-0-9.]+)\s*,\s*([-0-9.]+)\s*,\s*([-0-9.]+)\s*,\s*([-0-9.]+)\]"
)
_ENTITY_RE = re.compile(r"entity:\{([^}]*)\}")


def parse_query(text: str, catalog: EntityCatalog) -> Query:
    """Parse the query text syntax; leftover text becomes keywords."""
    remainder = text
    time = None
    geo = None
    entities: set[int] = set()

    m = _TIME_RE.search(remainder)
    if m:
        try:
            time = TimeInterval.parse(m.group(1), m.group(2))
        except ValueError as exc:
            raise BadParameterError(f"bad time filter: {m.group(0)!r} ({exc})") from exc
        remainder = remainder.replace(m.group(0), " ", 1)

    m = _GEO_POINT_RE.search(remainder)
    if m:
        geo = GeoScope.point(float(m.group(1)), float(m.group(2)))
        remainder = remainder.replace(m.group(0), " ", 1)
    else:
        m = _GEO_BOX_RE.search(remainder)
        if m:
            geo = GeoScope.box(*(float(m.group(i)) for i in range(1, 5)))
            remainder = remainder.replace(m.group(0), " ", 1)

    m = _ENTITY_RE.search(remainder)
    if m:
        for piece in m.group(1).split(","):
            piece = piece.strip()
            if not piece:
                continue
            ref: int | str = int(piece) if piece.isdigit() else piece
            entities.add(catalog.resolve(ref).id)
        remainder = remainder.replace(m.group(0), " ", 1)

    keywords = tuple(tokenize(remainder))
    return Query(keywords=keywords, time=time, geo=geo, entities=frozenset(entities))


@dataclass(frozen=True)
class SearchParams:
    top_n: int = 10
    weights: tuple[float, float, float, float] = (0.25, 0.25, 0.25, 0.25)  # text,time,geo,entity
    bm25_k1: float = 1.2
    bm25_b: float = 0.75
    kernel_km: float = DEFAULT_KERNEL_KM

    def __post_init__(self) -> None:
        if self.top_n < 1:
            raise BadParameterError("top_n must be >= 1")
        if any(w < 0 for w in self.weights) or sum(self.weights) <= 0:
            raise BadParameterError("weights must be non-negative with positive sum")


@dataclass(frozen=True)
class ScoredDoc:
    doc_id: str
    score: float
    components: dict[str, float]

    def to_payload(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "score": self.score,
            "components": {k: self.components[k] for k in COMPONENTS},
        }


@dataclass(frozen=True)
class ResultSet:
    docs: tuple[ScoredDoc, ...]
    weights_used: dict[str, float]

    def __len__(self) -> int:
        return len(self.docs)

    def __iter__(self):
        return iter(self.docs)

    def doc_ids(self) -> list[str]:
        return [d.doc_id for d in self.docs]

    def to_payload(self) -> dict:
        return {
            "weights": {k: self.weights_used[k] for k in COMPONENTS},
            "results": [d.to_payload() for d in self.docs],
        }


def effective_weights(query: Query, params: SearchParams) -> dict[str, float]:
    """Redistribute the weight mass of absent components uniformly over the
    present ones; weights over present components then sum to 1."""
    present = query.present()
    base = dict(zip(COMPONENTS, params.weights))
    total = sum(base.values())
    absent_mass = sum(base[c] for c in COMPONENTS if c not in present)
    out = {}
    for c in COMPONENTS:
        if c in present:
            out[c] = (base[c] + absent_mass / len(present)) / total
        else:
            out[c] = 0.0
    return out


def _bm25_scores(
    index: InvertedIndex, corpus: Corpus, terms: Sequence[str], k1: float, b: float
) -> dict[int, float]:
    """Raw BM25 per doc index over the query terms (document-level tf)."""
    scores: dict[int, float] = {}
    n_docs = index.doc_count
    avgdl = index.avg_doc_len or 1.0
    for term in terms:
        tid = corpus.vocabulary.id_of(term)
        if tid is None:
            continue
        doc_tfs = index.doc_term_freqs(tid)
        df = len(doc_tfs)
        if df == 0:
            continue
        idf = math.log(1.0 + (n_docs - df + 0.5) / (df + 0.5))
        for d, tf in doc_tfs.items():
            dl = index.doc_len[d] or 1
            denom = tf + k1 * (1.0 - b + b * dl / avgdl)
            scores[d] = scores.get(d, 0.0) + idf * tf * (k1 + 1.0) / denom
    return scores


def search(
    corpus: Corpus,
    index: InvertedIndex,
    query: Query,
    params: SearchParams = SearchParams(),
) -> ResultSet:
    """Rank documents by the weighted component mixture, top-n."""
    weights = effective_weights(query, params)
    docs_by_id = {d.id: d for d in corpus.documents}

    candidates: set[int] = set()
    bm25: dict[int, float] = {}
    if query.keywords:
        bm25 = _bm25_scores(index, corpus, query.keywords, params.bm25_k1, params.bm25_b)
        candidates.update(bm25)
    if query.time is not None:
        years = range(query.time.begin.year, query.time.end.year + 1)
        candidates.update(index.docs_with_time_in_years(years))
    if query.geo is not None:
        candidates.update(index.docs_with_geo())
    if query.entities:
        candidates.update(index.docs_with_any_entity(query.entities))

    max_bm25 = max(bm25.values()) if bm25 else 0.0
    scored = []
    for d in sorted(candidates):
        doc = docs_by_id[index.doc_ids[d]]
        comp = {c: 0.0 for c in COMPONENTS}
        if query.keywords and max_bm25 > 0:
            comp["text"] = bm25.get(d, 0.0) / max_bm25
        if query.time is not None:
            comp["time"] = max(
                (time_sim(query.time, u.time) for u in doc.units if u.time is not None),
                default=0.0,
            )
        if query.geo is not None:
            comp["geo"] = max(
                (
                    geo_sim(query.geo, u.geo, params.kernel_km)
                    for u in doc.units
                    if u.geo is not None
                ),
                default=0.0,
            )
        if query.entities:
            doc_entities: set[int] = set()
            for u in doc.units:
                doc_entities.update(u.entities)
            comp["entity"] = entity_sim(query.entities, doc_entities)
        total = sum(weights[c] * comp[c] for c in COMPONENTS)
        scored.append(ScoredDoc(doc_id=doc.id, score=total, components=comp))

    scored.sort(key=lambda s: (-s.score, s.doc_id))
    return ResultSet(docs=tuple(scored[: params.top_n]), weights_used=weights)


# ---------------------------------------------------------------------------
# Query-relevant unit selection (feeds the miner)
# ---------------------------------------------------------------------------

def unit_matches_query(
    unit: AnnotationUnit,
    query: Query,
    stopwords: frozenset[str],
    kernel_km: float = DEFAULT_KERNEL_KM,
) -> bool:
    """Whether a unit satisfies every present query component.

    Keywords: the unit contains at least one non-stopword query term (the
    component is waived when every query term is a stopword). Time: interval
    overlap. Geo: within the kernel length scale for points, rectangle
    intersection otherwise. Entity: non-empty intersection.
    """
    if query.keywords:
        content_terms = [t for t in query.keywords if t not in stopwords]
        if content_terms and not any(t in unit.terms for t in content_terms):
            return False
    if query.time is not None:
        if unit.time is None or not unit.time.overlaps(query.time):
            return False
    if query.geo is not None:
        if unit.geo is None:
            return False
        if query.geo.area > 0 and unit.geo.area > 0:
            if not query.geo.intersects(unit.geo):
                return False
        elif geo_sim(query.geo, unit.geo, kernel_km) < math.exp(-1.0):
            return False
    if query.entities:
        if not (query.entities & unit.entities):
            return False
    return True


def relevant_units(
    corpus: Corpus,
    index: InvertedIndex,
    query: Query,
    params: SearchParams = SearchParams(),
) -> list[AnnotationUnit]:
    """Units of the top retrieved documents that match the query themselves.

    This is the unit set handed to the miner when mining for a query.
    """
    results = search(corpus, index, query, params)
    stopwords = corpus.vocabulary.stopwords
    out: list[AnnotationUnit] = []
    for scored in results:
        doc = corpus.doc(scored.doc_id)
        out.extend(
            u for u in doc.units if unit_matches_query(u, query, stopwords, params.kernel_km)
        )
    return out


# ---------------------------------------------------------------------------
# Coverage predicate shared by diversification, summarization, evaluation
# ---------------------------------------------------------------------------

def unit_covers(unit: AnnotationUnit, entities: frozenset[int], time: TimeInterval) -> bool:
    """A unit covers an event/fact if it shares an entity and, when the unit
    is time-annotated, its interval overlaps the event's."""
    if not (unit.entities & entities):
        return False
    if unit.time is not None and not unit.time.overlaps(time):
        return False
    return True


def doc_covers(doc: Document, event: Event) -> bool:
    """Document-level coverage: some unit shares an entity with the event,
    and if the document carries any time annotation, some unit overlaps the
    event's interval."""
    if not any(unit.entities & event.entities for unit in doc.units):
        return False
    timed = [u for u in doc.units if u.time is not None]
    if timed and not any(u.time.overlaps(event.time) for u in timed):
        return False
    return True


# ---------------------------------------------------------------------------
# EventDiverse
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiverseSelection:
    doc_ids: tuple[str, ...]
    covered_at: tuple[tuple[str, ...], ...]  # event ids newly covered per position
    residual_mass: float

    def to_payload(self) -> dict:
        return {
            "doc_ids": list(self.doc_ids),
            "covered_at": [list(c) for c in self.covered_at],
            "residual_mass": self.residual_mass,
        }


def event_diverse(
    corpus: Corpus,
    results: ResultSet,
    events: EventSet,
    budget: int,
    gamma: float = 0.1,
) -> DiverseSelection:
    """Greedy selection maximizing covered event mass plus gamma-weighted
    normalized relevance (a monotone submodular objective).

    With no events the selection degrades to the top-``budget`` documents by
    relevance. Stops early only when the budget is not yet exhausted, every
    event is covered, and no remaining document has positive marginal gain.
    """
    if budget <= 0:
        raise BadParameterError("budget must be positive")
    if len(results) == 0:
        return DiverseSelection((), (), sum(e.score for e in events))

    if len(events) == 0:
        chosen = results.doc_ids()[:budget]
        return DiverseSelection(tuple(chosen), tuple(() for _ in chosen), 0.0)

    max_rel = max(s.score for s in results) or 1.0
    rel = {s.doc_id: s.score / max_rel for s in results}
    coverage = {
        s.doc_id: frozenset(
            e.id for e in events if doc_covers(corpus.doc(s.doc_id), e)
        )
        for s in results
    }
    score_of = {e.id: e.score for e in events}

    remaining = results.doc_ids()
    covered: set[str] = set()
    chosen: list[str] = []
    covered_at: list[tuple[str, ...]] = []
    while remaining and len(chosen) < budget:
        best_doc = None
        best_gain = -1.0
        for doc_id in remaining:
            gain = sum(score_of[c] for c in coverage[doc_id] - covered) + gamma * rel[doc_id]
            if gain > best_gain or (
                gain == best_gain
                and best_doc is not None
                and (-rel[doc_id], doc_id) < (-rel[best_doc], best_doc)
            ):
                best_doc, best_gain = doc_id, gain
        assert best_doc is not None
        if best_gain <= 0 and covered >= {e.id for e in events}:
            break
        newly = tuple(sorted(coverage[best_doc] - covered))
        chosen.append(best_doc)
        covered_at.append(newly)
        covered.update(coverage[best_doc])
        remaining.remove(best_doc)

    residual = sum(e.score for e in events if e.id not in covered)
    return DiverseSelection(tuple(chosen), tuple(covered_at), residual)


# ---------------------------------------------------------------------------
# EventSummary
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Summary:
    sentences: tuple[tuple[tuple[str, int, int], str], ...]  # (unit ref, verbatim text)
    word_count: int
    covered_event_ids: tuple[str, ...]
    warnings: tuple[str, ...] = ()

    def text(self) -> str:
        return " ".join(text for _, text in self.sentences)

    def to_payload(self) -> dict:
        return {
            "sentences": [{"unit": list(ref), "text": text} for ref, text in self.sentences],
            "word_count": self.word_count,
            "covered_event_ids": list(self.covered_event_ids),
            "warnings": list(self.warnings),
        }


def _term_overlap(a: AnnotationUnit, b: AnnotationUnit, stopwords: frozenset[str]) -> float:
    sa = {t for t in a.terms if t not in stopwords}
    sb = {t for t in b.terms if t not in stopwords}
    if not sa or not sb:
        return 0.0
    return len(sa & sb) / len(sa | sb)


def event_summary(
    units: Sequence[AnnotationUnit],
    events: EventSet,
    word_budget: int,
    rho: float = 0.5,
    stopwords: frozenset[str] = frozenset(),
) -> Summary:
    """Greedy budgeted sentence selection: maximize covered event mass minus
    ``rho`` times pairwise term overlap of the chosen sentences.

    Output sentences are verbatim units ordered by (earliest covered-event
    time, document order) so the summary reads as a timeline.
    """
    if not units:
        raise BadParameterError("candidate units must be non-empty")
    candidates = sorted(units, key=lambda u: u.ref)
    if all(u.word_count > word_budget for u in candidates):
        return Summary((), 0, (), warnings=("word budget below every sentence length",))

    unit_cov = {
        u.ref: frozenset(e.id for e in events if unit_covers(u, e.entities, e.time))
        for u in candidates
    }
    score_of = {e.id: e.score for e in events}

    chosen: list[AnnotationUnit] = []
    covered: set[str] = set()
    budget_left = word_budget
    remaining = list(candidates)
    while remaining:
        best = None
        best_gain = 0.0
        for u in remaining:
            if u.word_count > budget_left:
                continue
            gain = sum(score_of[c] for c in unit_cov[u.ref] - covered)
            gain -= rho * sum(_term_overlap(u, s, stopwords) for s in chosen)
            if best is None or gain > best_gain:
                best, best_gain = u, gain
        if best is None or best_gain <= 0.0:
            break
        chosen.append(best)
        covered.update(unit_cov[best.ref])
        budget_left -= best.word_count
        remaining.remove(best)

    def order_key(u: AnnotationUnit) -> tuple:
        times = [e.time.begin for e in events if e.id in unit_cov[u.ref]]
        return (min(times) if times else date.max, u.ref)

    chosen.sort(key=order_key)
    return Summary(
        sentences=tuple((u.ref, u.text) for u in chosen),
        word_count=sum(u.word_count for u in chosen),
        covered_event_ids=tuple(sorted(covered)),
    )

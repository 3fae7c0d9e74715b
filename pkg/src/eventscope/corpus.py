"""Corpus data model and ingestion of pre-annotated unit records.

Input is UTF-8 newline-delimited JSON, one record per annotation unit:

    {"doc_id": "d1", "position": 0, "text": "...",
     "entities": ["Usain_Bolt", 3],
     "geo": {"lat": 39.55, "lon": 116.23},            # or an MBR object, or a list
     "time": {"begin": "2008-01-01", "end": "2008-12-31"},   # or a list
     "doc_date": "2015-08-23"}                        # optional, document-level

``entities`` entries may be dense catalog ids or canonical names. ``geo`` and
``time`` may be lists; the first annotation stays on the record's unit and
each extra one spills into its own logical unit at the same position (the
``alt`` counter disambiguates). Invalid records are skipped and counted,
never fatal; a fatal :class:`IngestError` is raised only when the stream
itself is unreadable.

Corpus and all contained values are immutable after ingest.
"""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass, field
from datetime import date
from importlib import resources
from pathlib import Path
from typing import IO, Iterable, Iterator, Mapping, Union

from .annotations import EntityCatalog, GeoScope, TimeInterval
from .errors import BadParameterError, IngestError

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercased word tokens: split on whitespace/punctuation, keep digits
    and non-ASCII letters, drop underscores. NFC-normalized."""
    return _TOKEN_RE.findall(unicodedata.normalize("NFC", text).lower())


def load_stopwords() -> frozenset[str]:
    """The stopword list shipped with the package (flagged, not removed)."""
    text = resources.files("eventscope.data").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(
        line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#")
    )


@dataclass(frozen=True)
class IngestConfig:
    """Ingest options. ``granularity`` declares what one unit represents."""

    granularity: str = "sentence"

    def __post_init__(self) -> None:
        if self.granularity not in ("sentence", "paragraph"):
            raise BadParameterError(f"granularity must be sentence|paragraph: {self.granularity}")


@dataclass(frozen=True)
class AnnotationUnit:
    """One sentence/paragraph with its semantic annotations.

    ``alt`` distinguishes spilled logical units sharing a source position;
    the primary unit has ``alt == 0``. ``terms`` is the token bag of ``text``
    (stopwords included), and is never empty.
    """

    doc_id: str
    position: int
    alt: int
    text: str
    entities: frozenset[int]
    geo: GeoScope | None
    time: TimeInterval | None
    terms: Mapping[str, int]

    @property
    def ref(self) -> tuple[str, int, int]:
        return (self.doc_id, self.position, self.alt)

    @property
    def word_count(self) -> int:
        return len(self.text.split())

    @property
    def token_count(self) -> int:
        return sum(self.terms.values())


@dataclass(frozen=True)
class Document:
    id: str
    corpus_id: str
    publication_date: date | None
    units: tuple[AnnotationUnit, ...]

    def __post_init__(self) -> None:
        keys = [(u.position, u.alt) for u in self.units]
        if keys != sorted(set(keys)):
            raise BadParameterError(f"unit positions not strictly increasing in doc {self.id}")


class Vocabulary:
    """Term <-> dense id bijection with document frequencies and stopword
    flags. Ids are assigned in first-appearance order, which makes ingest
    deterministic for a fixed stream."""

    def __init__(self) -> None:
        self._id_of: dict[str, int] = {}
        self._terms: list[str] = []
        self._df: list[int] = []
        self._stop: list[bool] = []
        self._stopset = load_stopwords()

    def __len__(self) -> int:
        return len(self._terms)

    def __contains__(self, term: str) -> bool:
        return term in self._id_of

    def add(self, term: str) -> int:
        tid = self._id_of.get(term)
        if tid is None:
            tid = len(self._terms)
            self._id_of[term] = tid
            self._terms.append(term)
            self._df.append(0)
            self._stop.append(term in self._stopset)
        return tid

    def count_document(self, terms: Iterable[str]) -> None:
        for term in set(terms):
            self._df[self._id_of[term]] += 1

    def id_of(self, term: str) -> int | None:
        return self._id_of.get(term)

    def term(self, term_id: int) -> str:
        return self._terms[term_id]

    def df(self, term_id: int) -> int:
        return self._df[term_id]

    def is_stopword(self, term: str) -> bool:
        return term in self._stopset

    @property
    def stopwords(self) -> frozenset[str]:
        return self._stopset

    def terms(self) -> tuple[str, ...]:
        return tuple(self._terms)

    def to_payload(self) -> dict:
        return {"terms": self._terms, "df": self._df}

    @classmethod
    def from_payload(cls, payload: Mapping) -> "Vocabulary":
        vocab = cls()
        for term, df in zip(payload["terms"], payload["df"]):
            tid = vocab.add(term)
            vocab._df[tid] = int(df)
        return vocab


@dataclass(frozen=True)
class Corpus:
    id: str
    granularity: str
    documents: tuple[Document, ...]
    vocabulary: Vocabulary

    def __post_init__(self) -> None:
        ids = [d.id for d in self.documents]
        if len(ids) != len(set(ids)):
            raise BadParameterError("duplicate document ids in corpus")

    def doc(self, doc_id: str) -> Document:
        for d in self.documents:
            if d.id == doc_id:
                return d
        raise KeyError(doc_id)

    def units(self) -> Iterator[AnnotationUnit]:
        for d in self.documents:
            yield from d.units

    @property
    def unit_count(self) -> int:
        return sum(len(d.units) for d in self.documents)


@dataclass
class IngestReport:
    """Counts of what ingest kept and dropped."""

    records_read: int = 0
    units_loaded: int = 0
    records_skipped: int = 0
    entities_dropped: int = 0
    times_dropped: int = 0
    geos_dropped: int = 0
    warnings: list[str] = field(default_factory=list)

    def warn(self, message: str) -> None:
        self.warnings.append(message)


def _parse_geo(raw: object) -> GeoScope:
    if not isinstance(raw, Mapping):
        raise ValueError(f"geo must be an object: {raw!r}")
    return GeoScope.from_payload(raw)


def _parse_time(raw: object) -> TimeInterval:
    if not isinstance(raw, Mapping) or "begin" not in raw or "end" not in raw:
        raise ValueError(f"time must be an object with begin/end: {raw!r}")
    return TimeInterval.parse(str(raw["begin"]), str(raw["end"]))


def _as_list(raw: object) -> list:
    if raw is None:
        return []
    if isinstance(raw, list):
        return raw
    return [raw]


def ingest(
    source: Union[str, Path, IO[str]],
    catalog: EntityCatalog,
    config: IngestConfig = IngestConfig(),
    corpus_id: str = "corpus",
    report: IngestReport | None = None,
) -> Corpus:
    """Load a pre-annotated unit stream into an immutable :class:`Corpus`.

    Valid records are kept; anything malformed is skipped (whole record) or
    dropped (single bad annotation) and counted in ``report``. Terms are
    lowercased; stopwords are flagged in the vocabulary, not removed.
    """
    if report is None:
        report = IngestReport()

    if isinstance(source, (str, Path)):
        try:
            fh = open(source, "r", encoding="utf-8")
        except OSError as exc:
            raise IngestError(f"cannot read corpus stream {source}: {exc}") from exc
        with fh:
            return ingest(fh, catalog, config, corpus_id, report)

    raw_units: dict[str, list[AnnotationUnit]] = {}
    doc_dates: dict[str, date] = {}
    seen_positions: dict[str, set[int]] = {}

    try:
        lines = list(source)
    except (OSError, UnicodeDecodeError) as exc:
        raise IngestError(f"cannot read corpus stream: {exc}") from exc

    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        report.records_read += 1
        try:
            rec = json.loads(line)
            doc_id = str(rec["doc_id"])
            position = int(rec["position"])
            text = str(rec["text"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            report.records_skipped += 1
            report.warn(f"line {lineno}: skipped malformed record ({exc})")
            continue

        if position in seen_positions.setdefault(doc_id, set()):
            report.records_skipped += 1
            report.warn(f"line {lineno}: duplicate position {position} in doc {doc_id}")
            continue

        tokens = tokenize(text)
        if not tokens:
            report.records_skipped += 1
            report.warn(f"line {lineno}: unit has no terms after tokenization")
            continue

        entities: set[int] = set()
        for ref in _as_list(rec.get("entities")):
            try:
                entities.add(catalog.resolve(ref).id)
            except Exception:
                report.entities_dropped += 1
                report.warn(f"line {lineno}: dropped unresolvable entity {ref!r}")

        geos: list[GeoScope] = []
        for raw in _as_list(rec.get("geo")):
            try:
                geos.append(_parse_geo(raw))
            except Exception as exc:
                report.geos_dropped += 1
                report.warn(f"line {lineno}: dropped malformed geo ({exc})")

        times: list[TimeInterval] = []
        for raw in _as_list(rec.get("time")):
            try:
                times.append(_parse_time(raw))
            except Exception as exc:
                report.times_dropped += 1
                report.warn(f"line {lineno}: dropped malformed time ({exc})")

        if rec.get("doc_date") and doc_id not in doc_dates:
            try:
                doc_dates[doc_id] = date.fromisoformat(str(rec["doc_date"]))
            except ValueError:
                report.warn(f"line {lineno}: ignored malformed doc_date")

        terms: dict[str, int] = {}
        for tok in tokens:
            terms[tok] = terms.get(tok, 0) + 1

        # First geo/time stay on the primary unit; each extra annotation
        # spills into its own logical unit at the same position so
        # x = <E, g, t, W> stays single-valued.
        first_geo = geos[0] if geos else None
        first_time = times[0] if times else None
        pairs = [(first_geo, first_time)]
        pairs.extend((g, first_time) for g in geos[1:])
        pairs.extend((first_geo, t) for t in times[1:])
        for alt, (geo, time) in enumerate(pairs):
            raw_units.setdefault(doc_id, []).append(
                AnnotationUnit(
                    doc_id=doc_id,
                    position=position,
                    alt=alt,
                    text=text,
                    entities=frozenset(entities),
                    geo=geo,
                    time=time,
                    terms=terms,
                )
            )
            report.units_loaded += 1
        seen_positions[doc_id].add(position)

    vocabulary = Vocabulary()
    documents = []
    for doc_id in sorted(raw_units):
        units = sorted(raw_units[doc_id], key=lambda u: (u.position, u.alt))
        doc_terms: set[str] = set()
        for unit in units:
            for term in unit.terms:
                vocabulary.add(term)
                doc_terms.add(term)
        vocabulary.count_document(doc_terms)
        documents.append(
            Document(
                id=doc_id,
                corpus_id=corpus_id,
                publication_date=doc_dates.get(doc_id),
                units=tuple(units),
            )
        )

    return Corpus(
        id=corpus_id,
        granularity=config.granularity,
        documents=tuple(documents),
        vocabulary=vocabulary,
    )


# ---------------------------------------------------------------------------
# Corpus persistence (one JSON document; deterministic layout)
# ---------------------------------------------------------------------------

def corpus_to_payload(corpus: Corpus) -> dict:
    return {
        "id": corpus.id,
        "granularity": corpus.granularity,
        "documents": [
            {
                "id": d.id,
                "publication_date": d.publication_date.isoformat() if d.publication_date else None,
                "units": [
                    {
                        "position": u.position,
                        "alt": u.alt,
                        "text": u.text,
                        "entities": sorted(u.entities),
                        "geo": u.geo.to_payload() if u.geo else None,
                        "time": {"begin": u.time.begin.isoformat(), "end": u.time.end.isoformat()}
                        if u.time
                        else None,
                        "terms": {t: u.terms[t] for t in sorted(u.terms)},
                    }
                    for u in d.units
                ],
            }
            for d in corpus.documents
        ],
        "vocabulary": corpus.vocabulary.to_payload(),
    }


def corpus_from_payload(payload: Mapping) -> Corpus:
    documents = []
    for d in payload["documents"]:
        units = tuple(
            AnnotationUnit(
                doc_id=d["id"],
                position=int(u["position"]),
                alt=int(u["alt"]),
                text=u["text"],
                entities=frozenset(int(e) for e in u["entities"]),
                geo=GeoScope.from_payload(u["geo"]) if u["geo"] else None,
                time=TimeInterval.parse(u["time"]["begin"], u["time"]["end"]) if u["time"] else None,
                terms=dict(u["terms"]),
            )
            for u in d["units"]
        )
        documents.append(
            Document(
                id=d["id"],
                corpus_id=payload["id"],
                publication_date=date.fromisoformat(d["publication_date"])
                if d.get("publication_date")
                else None,
                units=units,
            )
        )
    return Corpus(
        id=payload["id"],
        granularity=payload["granularity"],
        documents=tuple(documents),
        vocabulary=Vocabulary.from_payload(payload["vocabulary"]),
    )

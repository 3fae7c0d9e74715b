"""Inverted index over terms and annotations, with directory persistence.

The index is a read-only snapshot built in one pass over a corpus; build
work is O(total tokens + total annotations), which keeps build time linear
in unit count. Unit references are ``(doc_index, position, alt)`` triples
where ``doc_index`` is the document's rank in lexicographic doc-id order.

On disk an index is a directory holding ``manifest.json`` (format version,
counts, config hash) and ``postings.json``; both files are dumped
deterministically so identical inputs produce byte-identical snapshots.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Union

from .corpus import Corpus, tokenize
from .errors import BadParameterError, SnapshotError
from .util import content_hash, dumps

INDEX_FORMAT_VERSION = 1

UnitKey = tuple[int, int, int]  # (doc_index, position, alt)


@dataclass(frozen=True)
class IndexConfig:
    """Index layout knobs. ``time_posting_level`` controls the coarseness of
    the temporal posting buckets (only ``year`` is supported in v1)."""

    time_posting_level: str = "year"

    def __post_init__(self) -> None:
        if self.time_posting_level != "year":
            raise BadParameterError("only year-level time postings are supported")

    def config_hash(self) -> str:
        return content_hash(dumps({"time_posting_level": self.time_posting_level}))


@dataclass
class InvertedIndex:
    """Immutable in-memory index.

    ``postings`` maps term id -> list of (doc_index, position, alt, tf),
    sorted by unit key. Annotation postings map entity ids and years to unit
    keys; ``geo_units`` lists every unit carrying a geographic scope.
    """

    config: IndexConfig
    doc_ids: tuple[str, ...]
    doc_len: tuple[int, ...]
    postings: dict[int, list[tuple[int, int, int, int]]]
    entity_postings: dict[int, list[UnitKey]]
    year_postings: dict[int, list[UnitKey]]
    geo_units: list[UnitKey]
    term_totals: dict[int, int] = field(default_factory=dict)

    @property
    def doc_count(self) -> int:
        return len(self.doc_ids)

    @property
    def avg_doc_len(self) -> float:
        return sum(self.doc_len) / len(self.doc_len) if self.doc_len else 0.0

    def doc_index(self, doc_id: str) -> int:
        lo, hi = 0, len(self.doc_ids)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.doc_ids[mid] < doc_id:
                lo = mid + 1
            else:
                hi = mid
        if lo == len(self.doc_ids) or self.doc_ids[lo] != doc_id:
            raise KeyError(doc_id)
        return lo

    def doc_freq(self, term_id: int) -> int:
        plist = self.postings.get(term_id)
        if not plist:
            return 0
        return len({entry[0] for entry in plist})

    def doc_term_freqs(self, term_id: int) -> dict[int, int]:
        """Aggregate unit-level postings to per-document term frequencies."""
        freqs: dict[int, int] = {}
        for doc_index, _pos, _alt, tf in self.postings.get(term_id, ()):
            freqs[doc_index] = freqs.get(doc_index, 0) + tf
        return freqs

    def docs_with_any_entity(self, entity_ids: Iterable[int]) -> set[int]:
        docs: set[int] = set()
        for eid in entity_ids:
            docs.update(key[0] for key in self.entity_postings.get(eid, ()))
        return docs

    def docs_with_time_in_years(self, years: Iterable[int]) -> set[int]:
        docs: set[int] = set()
        for year in years:
            docs.update(key[0] for key in self.year_postings.get(year, ()))
        return docs

    def docs_with_geo(self) -> set[int]:
        return {key[0] for key in self.geo_units}


def build_index(corpus: Corpus, config: IndexConfig = IndexConfig()) -> InvertedIndex:
    """Build the inverted index for a non-empty corpus in a single pass."""
    if not corpus.documents:
        raise BadParameterError("cannot index an empty corpus")

    doc_ids = tuple(sorted(d.id for d in corpus.documents))
    doc_rank = {doc_id: i for i, doc_id in enumerate(doc_ids)}

    postings: dict[int, list[tuple[int, int, int, int]]] = {}
    entity_postings: dict[int, list[UnitKey]] = {}
    year_postings: dict[int, list[UnitKey]] = {}
    geo_units: list[UnitKey] = []
    doc_len = [0] * len(doc_ids)
    term_totals: dict[int, int] = {}

    vocab = corpus.vocabulary
    for document in corpus.documents:
        d = doc_rank[document.id]
        for unit in document.units:
            key: UnitKey = (d, unit.position, unit.alt)
            if unit.alt == 0:
                doc_len[d] += unit.token_count
                for term, tf in unit.terms.items():
                    tid = vocab.id_of(term)
                    if tid is None:
                        raise BadParameterError(f"term {term!r} missing from vocabulary")
                    postings.setdefault(tid, []).append((d, unit.position, unit.alt, tf))
                    term_totals[tid] = term_totals.get(tid, 0) + tf
            for eid in unit.entities:
                entity_postings.setdefault(eid, []).append(key)
            if unit.time is not None:
                for year in range(unit.time.begin.year, unit.time.end.year + 1):
                    year_postings.setdefault(year, []).append(key)
            if unit.geo is not None:
                geo_units.append(key)

    for plist in postings.values():
        plist.sort()
    for elist in entity_postings.values():
        elist.sort()
    for ylist in year_postings.values():
        ylist.sort()
    geo_units.sort()

    return InvertedIndex(
        config=config,
        doc_ids=doc_ids,
        doc_len=tuple(doc_len),
        postings=postings,
        entity_postings=entity_postings,
        year_postings=year_postings,
        geo_units=geo_units,
        term_totals=term_totals,
    )


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

def _index_payload(index: InvertedIndex) -> dict:
    return {
        "doc_ids": list(index.doc_ids),
        "doc_len": list(index.doc_len),
        "postings": {str(tid): index.postings[tid] for tid in sorted(index.postings)},
        "entity_postings": {
            str(eid): index.entity_postings[eid] for eid in sorted(index.entity_postings)
        },
        "year_postings": {str(y): index.year_postings[y] for y in sorted(index.year_postings)},
        "geo_units": index.geo_units,
        "term_totals": {str(tid): index.term_totals[tid] for tid in sorted(index.term_totals)},
    }


def save_index(index: InvertedIndex, path: Union[str, Path]) -> None:
    """Write the index snapshot directory (manifest + postings)."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    postings_json = dumps(_index_payload(index))
    manifest = {
        "format_version": INDEX_FORMAT_VERSION,
        "config": {"time_posting_level": index.config.time_posting_level},
        "config_hash": index.config.config_hash(),
        "counts": {
            "documents": index.doc_count,
            "terms": len(index.postings),
            "postings": sum(len(p) for p in index.postings.values()),
        },
        "content_hash": content_hash(postings_json),
    }
    (root / "postings.json").write_text(postings_json, encoding="utf-8")
    (root / "manifest.json").write_text(dumps(manifest), encoding="utf-8")


def load_index(path: Union[str, Path]) -> InvertedIndex:
    """Load an index snapshot, refusing anything incompatible or corrupt."""
    import json

    root = Path(path)
    manifest_path = root / "manifest.json"
    postings_path = root / "postings.json"
    if not manifest_path.is_file() or not postings_path.is_file():
        raise SnapshotError(f"incompatible snapshot: missing files under {root}")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise SnapshotError(f"incompatible snapshot: unreadable manifest ({exc})") from exc
    if not isinstance(manifest, Mapping) or manifest.get("format_version") != INDEX_FORMAT_VERSION:
        raise SnapshotError(
            f"incompatible snapshot: format version {manifest.get('format_version')!r}, "
            f"expected {INDEX_FORMAT_VERSION}"
        )
    postings_json = postings_path.read_text(encoding="utf-8")
    if manifest.get("content_hash") != content_hash(postings_json):
        raise SnapshotError("incompatible snapshot: postings content hash mismatch")
    try:
        payload = json.loads(postings_json)
    except json.JSONDecodeError as exc:
        raise SnapshotError(f"incompatible snapshot: unreadable postings ({exc})") from exc

    return InvertedIndex(
        config=IndexConfig(**manifest["config"]),
        doc_ids=tuple(payload["doc_ids"]),
        doc_len=tuple(payload["doc_len"]),
        postings={int(t): [tuple(e) for e in v] for t, v in payload["postings"].items()},
        entity_postings={
            int(t): [tuple(e) for e in v] for t, v in payload["entity_postings"].items()
        },
        year_postings={int(t): [tuple(e) for e in v] for t, v in payload["year_postings"].items()},
        geo_units=[tuple(e) for e in payload["geo_units"]],
        term_totals={int(t): v for t, v in payload["term_totals"].items()},
    )


__all__ = [
    "IndexConfig",
    "InvertedIndex",
    "build_index",
    "save_index",
    "load_index",
    "tokenize",
]

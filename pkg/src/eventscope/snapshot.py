"""Versioned on-disk snapshot: corpus, index, entity catalog, gazetteer.

Layout of a snapshot directory:

    manifest.json      format version, counts, content version hash
    corpus.json        documents, units, vocabulary
    catalog.ndjson     entity catalog
    gazetteer.ndjson   geo hierarchy
    index/             inverted-index snapshot (own manifest + postings)
    testbeds/          optional evaluation testbeds (*.ndjson)

Snapshots are immutable once written; the service swaps whole snapshots
atomically. The version string is a content hash, so rebuilding identical
inputs yields the identical version.
"""

from __future__ import annotations

import json
import shutil
from dataclasses import dataclass
from pathlib import Path
from typing import Union

from .annotations import EntityCatalog, Gazetteer
from .corpus import Corpus, corpus_from_payload, corpus_to_payload
from .errors import SnapshotError
from .index import InvertedIndex, build_index, load_index, save_index
from .miner import EventSet, MinerParams, event_detect
from .search import Query, SearchParams, relevant_units
from .util import content_hash, dumps

SNAPSHOT_FORMAT_VERSION = 1


@dataclass(frozen=True)
class Snapshot:
    """One immutable, versioned view of a corpus and its companions."""

    corpus: Corpus
    index: InvertedIndex
    catalog: EntityCatalog
    gazetteer: Gazetteer
    version: str
    path: Path | None = None

    # -- orchestration shared by CLI and HTTP service -----------------------

    def entity_names(self) -> dict[int, str]:
        return {e.id: e.name for e in self.catalog.entries}

    def all_units(self):
        return list(self.corpus.units())

    def mine(
        self,
        query: Query | None,
        params: MinerParams = MinerParams(),
        search_params: SearchParams = SearchParams(),
    ) -> EventSet:
        """Mine events for a query (query-matching units of top documents)
        or over the whole corpus when ``query`` is None."""
        if query is None:
            units = self.all_units()
        else:
            units = relevant_units(self.corpus, self.index, query, search_params)
        return event_detect(
            units,
            params,
            gazetteer=self.gazetteer,
            stopwords=self.corpus.vocabulary.stopwords,
            entity_names=self.entity_names(),
        )

    def testbed_path(self, name: str) -> Path:
        if self.path is None:
            raise SnapshotError("snapshot has no directory; cannot resolve testbed ids")
        candidate = self.path / "testbeds" / f"{name}.ndjson"
        if not candidate.is_file():
            raise SnapshotError(f"unknown testbed: {name!r}")
        return candidate


def save_snapshot(
    path: Union[str, Path],
    corpus: Corpus,
    index: InvertedIndex,
    catalog_file: Union[str, Path],
    gazetteer_file: Union[str, Path],
    testbed_files: tuple[Union[str, Path], ...] = (),
) -> str:
    """Write a snapshot directory; returns the content version hash."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)

    corpus_json = dumps(corpus_to_payload(corpus))
    (root / "corpus.json").write_text(corpus_json, encoding="utf-8")
    shutil.copyfile(catalog_file, root / "catalog.ndjson")
    shutil.copyfile(gazetteer_file, root / "gazetteer.ndjson")
    save_index(index, root / "index")
    if testbed_files:
        (root / "testbeds").mkdir(exist_ok=True)
        for tb in testbed_files:
            shutil.copyfile(tb, root / "testbeds" / Path(tb).name)

    version = content_hash(
        corpus_json,
        (root / "catalog.ndjson").read_text(encoding="utf-8"),
        (root / "gazetteer.ndjson").read_text(encoding="utf-8"),
        (root / "index" / "postings.json").read_text(encoding="utf-8"),
    )
    manifest = {
        "format_version": SNAPSHOT_FORMAT_VERSION,
        "version": version,
        "counts": {
            "documents": len(corpus.documents),
            "units": corpus.unit_count,
            "vocabulary": len(corpus.vocabulary),
        },
    }
    (root / "manifest.json").write_text(dumps(manifest), encoding="utf-8")
    return version


def load_snapshot(path: Union[str, Path]) -> Snapshot:
    """Load and validate a snapshot directory."""
    root = Path(path)
    manifest_path = root / "manifest.json"
    if not root.is_dir() or not manifest_path.is_file():
        raise SnapshotError(f"incompatible snapshot: no manifest under {root}")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise SnapshotError(f"incompatible snapshot: unreadable manifest ({exc})") from exc
    if manifest.get("format_version") != SNAPSHOT_FORMAT_VERSION:
        raise SnapshotError(
            f"incompatible snapshot: format version {manifest.get('format_version')!r}"
        )
    try:
        corpus = corpus_from_payload(json.loads((root / "corpus.json").read_text("utf-8")))
        catalog = EntityCatalog.from_file(root / "catalog.ndjson")
        gazetteer = Gazetteer.from_file(root / "gazetteer.ndjson")
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        raise SnapshotError(f"incompatible snapshot: {exc}") from exc
    index = load_index(root / "index")
    return Snapshot(
        corpus=corpus,
        index=index,
        catalog=catalog,
        gazetteer=gazetteer,
        version=str(manifest["version"]),
        path=root,
    )


def build_snapshot(
    records_file: Union[str, Path],
    catalog_file: Union[str, Path],
    gazetteer_file: Union[str, Path],
    out_path: Union[str, Path],
    granularity: str = "sentence",
    corpus_id: str = "corpus",
    testbed_files: tuple[Union[str, Path], ...] = (),
):
    """Ingest + index + persist in one step. Returns (snapshot, report)."""
    from .corpus import IngestConfig, IngestReport, ingest

    catalog = EntityCatalog.from_file(catalog_file)
    report = IngestReport()
    corpus = ingest(
        records_file,
        catalog,
        IngestConfig(granularity=granularity),
        corpus_id=corpus_id,
        report=report,
    )
    index = build_index(corpus)
    save_snapshot(out_path, corpus, index, catalog_file, gazetteer_file, testbed_files)
    return load_snapshot(out_path), report

"""Shared fixtures: the olympics-mini snapshot and synthetic corpus builders."""

from __future__ import annotations

import random
from datetime import date, timedelta
from pathlib import Path

import pytest

from eventscope.annotations import EntityCatalog, Gazetteer, GeoScope, TimeInterval
from eventscope.corpus import AnnotationUnit, tokenize
from eventscope.snapshot import Snapshot, build_snapshot

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

RECORDS = FIXTURES / "olympics_mini.ndjson"
CATALOG = FIXTURES / "entity_catalog.ndjson"
GAZETTEER = FIXTURES / "gazetteer.ndjson"
TESTBED = FIXTURES / "testbed_olympics.ndjson"


@pytest.fixture(scope="session")
def fixture_paths() -> dict[str, Path]:
    return {"records": RECORDS, "catalog": CATALOG, "gazetteer": GAZETTEER, "testbed": TESTBED}


@pytest.fixture(scope="session")
def olympics_snapshot(tmp_path_factory) -> Snapshot:
    out = tmp_path_factory.mktemp("snapshots") / "olympics"
    snapshot, report = build_snapshot(
        RECORDS, CATALOG, GAZETTEER, out, corpus_id="olympics-mini", testbed_files=(TESTBED,)
    )
    assert report.records_skipped == 0
    return snapshot


@pytest.fixture(scope="session")
def catalog() -> EntityCatalog:
    return EntityCatalog.from_file(CATALOG)


@pytest.fixture(scope="session")
def gazetteer() -> Gazetteer:
    return Gazetteer.from_file(GAZETTEER)


# ---------------------------------------------------------------------------
# Synthetic unit builders
# ---------------------------------------------------------------------------


def make_unit(
    doc_id: str,
    position: int,
    entities: set[int],
    *,
    text: str = "",
    geo: GeoScope | None = None,
    begin: date | None = None,
    end: date | None = None,
    alt: int = 0,
) -> AnnotationUnit:
    if not text:
        text = f"synthetic unit {doc_id} {position}"
    time = None
    if begin is not None:
        time = TimeInterval(begin, end or begin)
    terms: dict[str, int] = {}
    for tok in tokenize(text):
        terms[tok] = terms.get(tok, 0) + 1
    return AnnotationUnit(
        doc_id=doc_id,
        position=position,
        alt=alt,
        text=text,
        entities=frozenset(entities),
        geo=geo,
        time=time,
        terms=terms,
    )


def random_units(
    rng: random.Random,
    n_units: int,
    n_entities: int = 10,
    year_span: tuple[int, int] = (2000, 2010),
    with_geo_places: list[tuple[str, float, float]] | None = None,
) -> list[AnnotationUnit]:
    """Random mining inputs: entity subsets, day intervals, optional geo."""
    units = []
    for i in range(n_units):
        k = rng.randint(1, min(4, n_entities))
        entities = set(rng.sample(range(n_entities), k))
        year = rng.randint(*year_span)
        start = date(year, 1, 1) + timedelta(days=rng.randint(0, 330))
        length = rng.randint(0, 30)
        geo = None
        if with_geo_places and rng.random() < 0.5:
            _, lat, lon = rng.choice(with_geo_places)
            geo = GeoScope.point(lat, lon)
        units.append(
            make_unit(
                f"d{i // 4}",
                i % 4,
                entities,
                text=f"unit {i} alpha beta gamma",
                geo=geo,
                begin=start,
                end=start + timedelta(days=length),
            )
        )
    return units

"""Ingest behavior: record handling, vocabulary, spill units, determinism."""

from __future__ import annotations

import io
import json

import pytest

from eventscope.corpus import (
    IngestConfig,
    IngestReport,
    corpus_from_payload,
    corpus_to_payload,
    ingest,
    load_stopwords,
    tokenize,
)
from eventscope.errors import BadParameterError, IngestError
from eventscope.util import dumps


def stream(*records: dict) -> io.StringIO:
    return io.StringIO("\n".join(json.dumps(r) for r in records))


BOLT_RECORD = {
    "doc_id": "d1",
    "position": 0,
    "text": "Bolt announced himself to the world with two Olympic golds in 2008.",
    "entities": ["Usain_Bolt"],
    "geo": {"lat": 39.55, "lon": 116.23},
    "time": {"begin": "2008-01-01", "end": "2008-12-31"},
}


class TestTokenize:
    def test_lowercase_and_punctuation(self):
        assert tokenize("Bolt announced himself!") == ["bolt", "announced", "himself"]

    def test_unicode_preserved(self):
        assert tokenize("the Maracanã stadium") == ["the", "maracanã", "stadium"]

    def test_digits_kept_underscores_split(self):
        assert tokenize("records in 2008, Usain_Bolt") == ["records", "in", "2008", "usain", "bolt"]


class TestIngest:
    def test_single_bolt_record(self, catalog):
        corpus = ingest(stream(BOLT_RECORD), catalog)
        assert len(corpus.documents) == 1
        doc = corpus.documents[0]
        assert len(doc.units) == 1
        unit = doc.units[0]
        assert unit.entities == {catalog.by_name("Usain_Bolt").id}
        assert unit.geo is not None and unit.geo.center() == (39.55, 116.23)
        assert unit.time is not None and unit.time.begin.isoformat() == "2008-01-01"

    def test_empty_stream(self, catalog):
        corpus = ingest(io.StringIO(""), catalog)
        assert corpus.documents == ()
        assert len(corpus.vocabulary) == 0

    def test_fixture_vocabulary(self, catalog, fixture_paths):
        corpus = ingest(fixture_paths["records"], catalog)
        assert len(corpus.documents) == 3
        for term in ("micheal", "phelps", "bejing", "maracanã", "badminton", "copacabana"):
            assert term in corpus.vocabulary, term

    def test_unresolvable_entity_dropped_with_warning(self, catalog):
        rec = dict(BOLT_RECORD, entities=["Usain_Bolt", "Nobody_Knows"])
        report = IngestReport()
        corpus = ingest(stream(rec), catalog, report=report)
        assert report.entities_dropped == 1
        (unit,) = corpus.documents[0].units
        assert unit.entities == {catalog.by_name("Usain_Bolt").id}

    def test_malformed_interval_dropped_with_warning(self, catalog):
        rec = dict(BOLT_RECORD, time={"begin": "2008-13-77", "end": "2008-12-31"})
        report = IngestReport()
        corpus = ingest(stream(rec), catalog, report=report)
        assert report.times_dropped == 1
        assert corpus.documents[0].units[0].time is None

    def test_empty_unit_rejected(self, catalog):
        rec = dict(BOLT_RECORD, text="!!! ...")
        report = IngestReport()
        corpus = ingest(stream(rec), catalog, report=report)
        assert report.records_skipped == 1
        assert corpus.documents == ()

    def test_malformed_json_skipped(self, catalog):
        report = IngestReport()
        corpus = ingest(io.StringIO("{not json}\n" + json.dumps(BOLT_RECORD)), catalog, report=report)
        assert report.records_skipped == 1
        assert len(corpus.documents) == 1

    def test_unreadable_stream_is_fatal(self, catalog):
        with pytest.raises(IngestError):
            ingest("/nonexistent/path/records.ndjson", catalog)

    def test_multiple_annotations_spill(self, catalog):
        rec = dict(
            BOLT_RECORD,
            geo=[{"lat": 39.55, "lon": 116.23}, {"lat": 51.5, "lon": -0.12}],
            time=[
                {"begin": "2008-01-01", "end": "2008-12-31"},
                {"begin": "2012-07-27", "end": "2012-08-12"},
            ],
        )
        corpus = ingest(stream(rec), catalog)
        units = corpus.documents[0].units
        assert [u.alt for u in units] == [0, 1, 2]
        assert units[0].geo.center() == (39.55, 116.23)
        assert units[0].time.begin.isoformat() == "2008-01-01"
        # extra geo pairs with the first time; extra time with the first geo
        assert units[1].geo.center() == (51.5, -0.12)
        assert units[1].time.begin.isoformat() == "2008-01-01"
        assert units[2].geo.center() == (39.55, 116.23)
        assert units[2].time.begin.isoformat() == "2012-07-27"

    def test_duplicate_position_skipped(self, catalog):
        report = IngestReport()
        corpus = ingest(stream(BOLT_RECORD, BOLT_RECORD), catalog, report=report)
        assert report.records_skipped == 1
        assert len(corpus.documents[0].units) == 1

    def test_publication_date_optional(self, catalog):
        rec = dict(BOLT_RECORD, doc_date="2015-08-23")
        corpus = ingest(stream(rec), catalog)
        assert corpus.documents[0].publication_date.isoformat() == "2015-08-23"
        corpus = ingest(stream(BOLT_RECORD), catalog)
        assert corpus.documents[0].publication_date is None

    def test_granularity_recorded(self, catalog):
        corpus = ingest(stream(BOLT_RECORD), catalog, IngestConfig(granularity="paragraph"))
        assert corpus.granularity == "paragraph"
        with pytest.raises(BadParameterError):
            IngestConfig(granularity="chapter")

    def test_document_frequencies(self, catalog, fixture_paths):
        corpus = ingest(fixture_paths["records"], catalog)
        vocab = corpus.vocabulary
        # "olympics" appears in all three documents, "maracanã" in one
        assert vocab.df(vocab.id_of("olympics")) == 3
        assert vocab.df(vocab.id_of("maracanã")) == 1
        for term in vocab.terms():
            assert vocab.df(vocab.id_of(term)) >= 1

    def test_stopwords_flagged_not_removed(self, catalog):
        corpus = ingest(stream(BOLT_RECORD), catalog)
        unit = corpus.documents[0].units[0]
        assert "the" in unit.terms  # kept in the term bag
        assert corpus.vocabulary.is_stopword("the")
        assert not corpus.vocabulary.is_stopword("bolt")
        assert "the" in load_stopwords()

    def test_roundtrip_payload(self, catalog, fixture_paths):
        corpus = ingest(fixture_paths["records"], catalog, corpus_id="olympics-mini")
        payload = corpus_to_payload(corpus)
        clone = corpus_from_payload(json.loads(dumps(payload)))
        assert corpus_to_payload(clone) == payload

    def test_ingest_deterministic(self, catalog, fixture_paths):
        a = ingest(fixture_paths["records"], catalog)
        b = ingest(fixture_paths["records"], catalog)
        assert dumps(corpus_to_payload(a)) == dumps(corpus_to_payload(b))

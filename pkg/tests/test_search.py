"""Retrieval mixture, diversification greedy + bound, summarization."""

from __future__ import annotations

import random
from datetime import date
from itertools import combinations

import pytest

from eventscope.annotations import GeoScope, TimeInterval
from eventscope.corpus import ingest
from eventscope.errors import BadParameterError, EmptyQueryError
from eventscope.index import build_index
from eventscope.miner import Event, EventSet, MinerParams
from eventscope.search import (
    Query,
    SearchParams,
    doc_covers,
    effective_weights,
    event_diverse,
    event_summary,
    parse_query,
    relevant_units,
    search,
    unit_covers,
)

from conftest import make_unit


def normalized(scores):
    total = sum(scores)
    return [s / total for s in scores]


def make_events(specs) -> EventSet:
    """specs: list of (entities, begin, end, score)."""
    events = []
    order = sorted(range(len(specs)), key=lambda i: (-specs[i][3], specs[i][1]))
    for rank, i in enumerate(order):
        entities, begin, end, score = specs[i]
        events.append(
            Event(
                id=f"e{rank + 1}",
                entities=frozenset(entities),
                entity_names=(),
                geo_member="-",
                geo_scope=None,
                time=TimeInterval(begin, end),
                terms=(),
                score=score,
                support=1,
                supporting_units=(),
            )
        )
    return EventSet(tuple(events))


class TestQueryParsing:
    def test_keywords_and_filters(self, catalog):
        q = parse_query(
            "summer olympics time:[2012-01-01,2012-12-31] geo:(39.55,116.23) entity:{Usain_Bolt,China}",
            catalog,
        )
        assert q.keywords == ("summer", "olympics")
        assert q.time == TimeInterval(date(2012, 1, 1), date(2012, 12, 31))
        assert q.geo == GeoScope.point(39.55, 116.23)
        assert q.entities == {catalog.by_name("Usain_Bolt").id, catalog.by_name("China").id}

    def test_geo_box_filter(self, catalog):
        q = parse_query("geo:[30.0,100.0,45.0,120.0]", catalog)
        assert q.geo == GeoScope.box(30.0, 100.0, 45.0, 120.0)

    def test_empty_query_rejected(self, catalog):
        with pytest.raises(EmptyQueryError):
            parse_query("", catalog)
        with pytest.raises(EmptyQueryError):
            Query()

    def test_bad_time_filter(self, catalog):
        with pytest.raises(BadParameterError):
            parse_query("x time:[2012-40-01,2012-12-31]", catalog)


class TestSearch:
    def test_keyword_query_returns_all_three(self, olympics_snapshot):
        q = parse_query("summer olympics", olympics_snapshot.catalog)
        results = search(olympics_snapshot.corpus, olympics_snapshot.index, q)
        assert sorted(results.doc_ids()) == ["beijing-2008", "london-2012", "rio-2016"]
        assert all(d.components["text"] > 0 for d in results)

    def test_entity_only_query_finds_london(self, olympics_snapshot):
        q = parse_query("entity:{Usain_Bolt}", olympics_snapshot.catalog)
        results = search(olympics_snapshot.corpus, olympics_snapshot.index, q)
        assert results.doc_ids() == ["london-2012"]

    def test_time_only_query_ranks_london_first(self, olympics_snapshot):
        q = parse_query("time:[2012-01-01,2012-12-31]", olympics_snapshot.catalog)
        results = search(olympics_snapshot.corpus, olympics_snapshot.index, q)
        assert results.doc_ids()[0] == "london-2012"

    def test_geo_query_prefers_beijing(self, olympics_snapshot):
        q = parse_query("geo:(39.55,116.23)", olympics_snapshot.catalog)
        results = search(olympics_snapshot.corpus, olympics_snapshot.index, q)
        # both beijing-2008 and london-2012 contain a Beijing-located unit
        assert results.docs[0].components["geo"] == pytest.approx(1.0)
        assert set(results.doc_ids()[:2]) == {"beijing-2008", "london-2012"}

    def test_ranking_invariant_under_weight_rescaling(self, olympics_snapshot):
        q = parse_query("summer olympics entity:{China}", olympics_snapshot.catalog)
        base = SearchParams(weights=(0.25, 0.25, 0.25, 0.25))
        scaled = SearchParams(weights=(1.0, 1.0, 1.0, 1.0))
        a = search(olympics_snapshot.corpus, olympics_snapshot.index, q, base)
        b = search(olympics_snapshot.corpus, olympics_snapshot.index, q, scaled)
        assert a.doc_ids() == b.doc_ids()

    def test_weight_redistribution(self, catalog):
        q = parse_query("summer olympics", catalog)
        weights = effective_weights(q, SearchParams(weights=(0.25, 0.25, 0.25, 0.25)))
        assert weights == {"text": 1.0, "time": 0.0, "geo": 0.0, "entity": 0.0}
        q2 = parse_query("summer time:[2008-01-01,2008-12-31]", catalog)
        weights2 = effective_weights(q2, SearchParams(weights=(0.4, 0.2, 0.2, 0.2)))
        assert weights2["text"] == pytest.approx(0.6)
        assert weights2["time"] == pytest.approx(0.4)

    def test_relevant_units_exclude_non_matching(self, olympics_snapshot):
        q = parse_query("summer olympics", olympics_snapshot.catalog)
        units = relevant_units(olympics_snapshot.corpus, olympics_snapshot.index, q)
        refs = {u.ref for u in units}
        assert ("london-2012", 2, 0) not in refs  # the Bolt unit has neither term
        assert len(refs) == 6


class TestCoverage:
    def test_unit_covers_requires_entity_overlap(self):
        unit = make_unit("d", 0, {1, 2}, begin=date(2008, 8, 10))
        assert unit_covers(unit, frozenset({2}), TimeInterval(date(2008, 8, 1), date(2008, 8, 31)))
        assert not unit_covers(unit, frozenset({9}), TimeInterval(date(2008, 8, 1), date(2008, 8, 31)))

    def test_unit_time_must_overlap_when_present(self):
        unit = make_unit("d", 0, {1}, begin=date(2001, 1, 1))
        assert not unit_covers(unit, frozenset({1}), TimeInterval(date(2002, 1, 1), date(2002, 2, 1)))
        undated = make_unit("d", 1, {1})
        assert unit_covers(undated, frozenset({1}), TimeInterval(date(2002, 1, 1), date(2002, 2, 1)))


class TestEventDiverse:
    def _corpus(self, catalog, docs: dict[str, list]):
        import io
        import json

        records = []
        for doc_id, units in docs.items():
            for position, (text, entities, begin, end) in enumerate(units):
                rec = {"doc_id": doc_id, "position": position, "text": text, "entities": entities}
                if begin:
                    rec["time"] = {"begin": begin, "end": end}
                records.append(rec)
        return ingest(io.StringIO("\n".join(json.dumps(r) for r in records)), catalog)

    def test_fixture_budget_three_covers_all(self, olympics_snapshot):
        q = parse_query("summer olympics", olympics_snapshot.catalog)
        results = search(olympics_snapshot.corpus, olympics_snapshot.index, q)
        events = olympics_snapshot.mine(q, MinerParams(min_support=1))
        selection = event_diverse(olympics_snapshot.corpus, results, events, budget=3)
        assert sorted(selection.doc_ids) == ["beijing-2008", "london-2012", "rio-2016"]
        assert selection.residual_mass == pytest.approx(0.0)
        # brute force: full coverage is attainable with three documents
        covered = set()
        for doc_id in selection.doc_ids:
            covered.update(
                e.id for e in events if doc_covers(olympics_snapshot.corpus.doc(doc_id), e)
            )
        assert covered == {e.id for e in events}

    def test_budget_one_picks_heavier_event_doc(self, catalog):
        corpus = self._corpus(
            catalog,
            {
                "heavy": [("big story alpha", ["China"], "2008-01-01", "2008-12-31")],
                "light": [
                    ("two smaller stories", ["England"], "2012-01-01", "2012-12-31"),
                    ("second part", ["Brazil"], "2016-01-01", "2016-12-31"),
                ],
            },
        )
        index = build_index(corpus)
        events = make_events(
            [
                ({catalog.by_name("China").id}, date(2008, 6, 1), date(2008, 6, 2), 0.6),
                ({catalog.by_name("England").id}, date(2012, 6, 1), date(2012, 6, 2), 0.3),
                ({catalog.by_name("Brazil").id}, date(2016, 6, 1), date(2016, 6, 2), 0.1),
            ]
        )
        results = search(corpus, index, Query(keywords=("stories", "story", "alpha")), SearchParams())
        selection = event_diverse(corpus, results, events, budget=1, gamma=0.0)
        assert selection.doc_ids == ("heavy",)
        assert selection.residual_mass == pytest.approx(0.4)

    def test_no_events_falls_back_to_ranking(self, olympics_snapshot):
        q = parse_query("summer olympics", olympics_snapshot.catalog)
        results = search(olympics_snapshot.corpus, olympics_snapshot.index, q)
        selection = event_diverse(olympics_snapshot.corpus, results, EventSet(()), budget=2)
        assert selection.doc_ids == tuple(results.doc_ids()[:2])

    def test_budget_must_be_positive(self, olympics_snapshot):
        q = parse_query("summer olympics", olympics_snapshot.catalog)
        results = search(olympics_snapshot.corpus, olympics_snapshot.index, q)
        with pytest.raises(BadParameterError):
            event_diverse(olympics_snapshot.corpus, results, EventSet(()), budget=0)

    def _random_instance(self, rng: random.Random, catalog):
        """Random docs x events coverage instance over catalog entities."""
        n_docs = rng.randint(2, 10)
        n_events = rng.randint(1, 6)
        event_entities = [
            {rng.randrange(len(catalog))} for _ in range(n_events)
        ]
        year = 2000
        docs = {}
        for d in range(n_docs):
            covered = [i for i in range(n_events) if rng.random() < 0.45]
            units = []
            if not covered:
                units.append((f"filler text {d}", [], None, None))
            for i in covered:
                name = catalog.get(next(iter(event_entities[i]))).name
                units.append(
                    (f"text {d} {i}", [name], f"{year + i}-01-01", f"{year + i}-12-31")
                )
            docs[f"doc{d:02d}"] = units
        corpus = self._corpus(catalog, docs)
        specs = [
            (event_entities[i], date(year + i, 3, 1), date(year + i, 3, 2), 0.0)
            for i in range(n_events)
        ]
        raw = [rng.random() + 0.01 for _ in range(n_events)]
        total = sum(raw)
        specs = [(s[0], s[1], s[2], raw[i] / total) for i, s in enumerate(specs)]
        return corpus, make_events(specs)

    def test_greedy_vs_exhaustive_bound(self, catalog):
        """(1 - 1/e) coverage bound against the exhaustive subset oracle."""
        rng = random.Random(777)
        bound = 1.0 - 1.0 / 2.718281828459045
        for _ in range(30):
            corpus, events = self._random_instance(rng, catalog)
            index = build_index(corpus)
            all_ids = sorted(d.id for d in corpus.documents)
            results = search(
                corpus, index, Query(keywords=("text", "filler")), SearchParams(top_n=10)
            )
            budget = rng.randint(1, max(1, len(results) - 1))
            selection = event_diverse(corpus, results, events, budget=budget, gamma=0.0)
            greedy_cov = sum(e.score for e in events) - selection.residual_mass

            doc_cov = {
                s.doc_id: frozenset(
                    e.id for e in events if doc_covers(corpus.doc(s.doc_id), e)
                )
                for s in results
            }
            score_of = {e.id: e.score for e in events}
            best = 0.0
            pool = [s.doc_id for s in results]
            for size in range(1, budget + 1):
                for subset in combinations(pool, size):
                    covered = set().union(*(doc_cov[d] for d in subset)) if subset else set()
                    best = max(best, sum(score_of[c] for c in covered))
            assert greedy_cov >= bound * best - 1e-12

    def test_marginal_gains_non_increasing(self, catalog):
        rng = random.Random(31337)
        for _ in range(20):
            corpus, events = self._random_instance(rng, catalog)
            index = build_index(corpus)
            results = search(
                corpus, index, Query(keywords=("text", "filler")), SearchParams(top_n=10)
            )
            for gamma in (0.0, 0.1):
                selection = event_diverse(corpus, results, events, budget=len(results), gamma=gamma)
                max_rel = max(s.score for s in results) or 1.0
                rel = {s.doc_id: s.score / max_rel for s in results}
                doc_cov = {
                    s.doc_id: frozenset(
                        e.id for e in events if doc_covers(corpus.doc(s.doc_id), e)
                    )
                    for s in results
                }
                score_of = {e.id: e.score for e in events}
                covered: set[str] = set()
                gains = []
                for doc_id in selection.doc_ids:
                    gain = sum(score_of[c] for c in doc_cov[doc_id] - covered) + gamma * rel[doc_id]
                    gains.append(gain)
                    covered.update(doc_cov[doc_id])
                assert all(gains[i] >= gains[i + 1] - 1e-12 for i in range(len(gains) - 1))


class TestEventSummary:
    def test_single_forced_sentence(self):
        unit = make_unit("d", 0, {1}, text="china wins the gold medal", begin=date(2008, 8, 10))
        events = make_events([({1}, date(2008, 8, 1), date(2008, 8, 31), 1.0)])
        summary = event_summary([unit], events, word_budget=100)
        assert [text for _, text in summary.sentences] == ["china wins the gold medal"]
        assert summary.covered_event_ids == ("e1",)

    def test_fixture_timeline_order(self, olympics_snapshot):
        q = parse_query("summer olympics", olympics_snapshot.catalog)
        results = search(olympics_snapshot.corpus, olympics_snapshot.index, q)
        events = olympics_snapshot.mine(q, MinerParams(min_support=1))
        units = [u for s in results for u in olympics_snapshot.corpus.doc(s.doc_id).units]
        summary = event_summary(
            units, events, word_budget=60, stopwords=olympics_snapshot.corpus.vocabulary.stopwords
        )
        docs = [ref[0] for ref, _ in summary.sentences]
        assert docs == ["beijing-2008", "london-2012", "rio-2016"]
        assert summary.word_count <= 60
        assert set(summary.covered_event_ids) == {"e1", "e2", "e3"}
        # brute force within budget: no subset beats full coverage
        corpus_texts = {u.text for u in units}
        for _, text in summary.sentences:
            assert text in corpus_texts  # verbatim extractive

    def test_duplicate_sentences_suppressed_under_large_rho(self):
        a = make_unit("d", 0, {1}, text="china wins gold again", begin=date(2008, 8, 10))
        b = make_unit("d", 1, {1}, text="china wins gold again", begin=date(2008, 8, 10))
        events = make_events([({1}, date(2008, 8, 1), date(2008, 8, 31), 1.0)])
        summary = event_summary([a, b], events, word_budget=100, rho=100.0)
        assert len(summary.sentences) == 1

    def test_budget_below_every_sentence(self):
        unit = make_unit("d", 0, {1}, text="six words are in this sentence", begin=date(2008, 1, 1))
        events = make_events([({1}, date(2008, 1, 1), date(2008, 1, 31), 1.0)])
        summary = event_summary([unit], events, word_budget=2)
        assert summary.sentences == ()
        assert summary.warnings

    def test_budget_never_exceeded(self, olympics_snapshot):
        rng = random.Random(5)
        q = parse_query("summer olympics", olympics_snapshot.catalog)
        events = olympics_snapshot.mine(q, MinerParams(min_support=1))
        units = list(olympics_snapshot.corpus.units())
        for _ in range(10):
            budget = rng.randint(5, 80)
            summary = event_summary(units, events, word_budget=budget)
            assert summary.word_count <= budget

    def test_brute_force_budget_60(self, olympics_snapshot):
        """Exhaustive subset oracle: greedy reaches the best coverage."""
        q = parse_query("summer olympics", olympics_snapshot.catalog)
        events = olympics_snapshot.mine(q, MinerParams(min_support=1))
        units = sorted(olympics_snapshot.corpus.units(), key=lambda u: u.ref)
        score_of = {e.id: e.score for e in events}
        best = 0.0
        for size in range(0, len(units) + 1):
            for subset in combinations(units, size):
                if sum(u.word_count for u in subset) > 60:
                    continue
                covered = set()
                for u in subset:
                    covered.update(
                        e.id for e in events if unit_covers(u, e.entities, e.time)
                    )
                best = max(best, sum(score_of[c] for c in covered))
        summary = event_summary(units, events, word_budget=60)
        got = sum(score_of[c] for c in summary.covered_event_ids)
        assert got == pytest.approx(best)

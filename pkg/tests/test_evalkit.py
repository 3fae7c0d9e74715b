"""Metrics: matching, P/R/F1, alpha-nDCG vs brute force, ROUGE hand counts."""

from __future__ import annotations

import math
import random
from datetime import date
from itertools import permutations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eventscope.annotations import GeoScope, TimeInterval
from eventscope.errors import BadParameterError
from eventscope.evalkit import (
    Fact,
    MatchCriterion,
    Testbed as FactTestbed,
    alpha_ndcg,
    load_testbed,
    match_events,
    prf1,
    rouge_n,
    run_eval,
)
from eventscope.miner import Event, EventSet


def make_fact(fid, entities, begin, end, lat=0.0, lon=0.0, q=("query",), terms=()):
    return Fact(
        id=fid,
        q=tuple(q),
        entities=frozenset(entities),
        geo=GeoScope.point(lat, lon),
        time=TimeInterval(begin, end),
        terms=tuple(terms),
    )


def make_event(eid, entities, begin, end, score, lat=None, lon=None):
    return Event(
        id=eid,
        entities=frozenset(entities),
        entity_names=(),
        geo_member="-",
        geo_scope=GeoScope.point(lat, lon) if lat is not None else None,
        time=TimeInterval(begin, end),
        terms=(),
        score=score,
        support=1,
        supporting_units=(),
    )


def event_set(*events):
    total = sum(e.score for e in events)
    from dataclasses import replace

    scaled = sorted(
        (replace(e, score=e.score / total) for e in events),
        key=lambda e: (-e.score, e.time.begin, e.time.end, tuple(sorted(e.entities))),
    )
    return EventSet(tuple(scaled))


class TestMatchEvents:
    def test_identical_event_matches_at_one(self):
        fact = make_fact("f1", {1, 2}, date(2008, 8, 8), date(2008, 8, 24), 39.55, 116.23)
        pred = event_set(make_event("e1", {1, 2}, date(2008, 8, 8), date(2008, 8, 24), 1.0, 39.55, 116.23))
        (match,) = match_events(pred, [fact])
        assert (match.event_id, match.fact_id) == ("e1", "f1")
        assert match.similarity == pytest.approx(1.0)

    def test_half_jaccard_still_matches_at_default_tau(self):
        fact = make_fact("f1", {1, 2}, date(2008, 1, 1), date(2008, 12, 31))
        pred = event_set(make_event("e1", {1}, date(2008, 5, 1), date(2008, 6, 1), 1.0))
        matches = match_events(pred, [fact], MatchCriterion(tau_entity=0.5))
        assert len(matches) == 1

    def test_disjoint_time_blocks_match(self):
        fact = make_fact("f1", {1}, date(2008, 1, 1), date(2008, 12, 31))
        pred = event_set(make_event("e1", {1}, date(2010, 1, 1), date(2010, 2, 1), 1.0))
        assert match_events(pred, [fact]) == []
        relaxed = MatchCriterion(require_time_overlap=False)
        assert len(match_events(pred, [fact], relaxed)) == 1

    def test_one_to_one_greedy_prefers_best(self):
        f1 = make_fact("f1", {1, 2}, date(2008, 1, 1), date(2008, 12, 31))
        f2 = make_fact("f2", {1}, date(2008, 1, 1), date(2008, 12, 31))
        exact = make_event("e1", {1, 2}, date(2008, 1, 1), date(2008, 12, 31), 0.5)
        partial = make_event("e2", {1}, date(2008, 3, 1), date(2008, 4, 1), 0.5)
        matches = match_events(event_set(exact, partial), [f1, f2])
        by_event = {m.event_id: m.fact_id for m in matches}
        assert by_event == {"e1": "f1", "e2": "f2"}

    def test_require_geo(self):
        fact = make_fact("f1", {1}, date(2008, 1, 1), date(2008, 12, 31), 39.55, 116.23)
        no_geo = make_event("e1", {1}, date(2008, 2, 1), date(2008, 3, 1), 1.0)
        crit = MatchCriterion(require_geo=True, geo_threshold=0.5)
        assert match_events(event_set(no_geo), [fact], crit) == []
        near = make_event("e2", {1}, date(2008, 2, 1), date(2008, 3, 1), 1.0, 39.6, 116.3)
        assert len(match_events(event_set(near), [fact], crit)) == 1


class TestPrf1:
    def test_perfect(self):
        assert prf1(3, 3, 3) == (1.0, 1.0, 1.0)

    def test_arithmetic_oracle(self):
        p, r, f1 = prf1(2, 4, 3)
        assert p == pytest.approx(0.5)
        assert r == pytest.approx(2 / 3)
        assert f1 == pytest.approx(4 / 7)

    def test_nothing_predicted(self):
        assert prf1(0, 0, 3) == (0.0, 0.0, 0.0)

    def test_both_empty(self):
        assert prf1(0, 0, 0) == (1.0, 1.0, 1.0)

    def test_inconsistent_counts_rejected(self):
        with pytest.raises(BadParameterError):
            prf1(5, 3, 3)

    @given(st.integers(0, 50), st.integers(0, 50), st.integers(0, 50))
    def test_bounds_and_f1_identities(self, m, p_extra, f_extra):
        n_pred = m + p_extra
        n_facts = m + f_extra
        p, r, f1 = prf1(m, n_pred, n_facts)
        assert 0.0 <= p <= 1.0 and 0.0 <= r <= 1.0 and 0.0 <= f1 <= 1.0
        assert f1 <= min(2 * p, 2 * r) + 1e-12
        assert (f1 == 0.0) == (p * r == 0.0)


class TestAlphaNdcg:
    def brute_force_ideal(self, judgments, alpha, depth):
        pool = sorted(judgments)
        best = 0.0
        for perm in permutations(pool, min(depth, len(pool))):
            seen: dict[str, int] = {}
            dcg = 0.0
            for rank, doc in enumerate(perm, start=1):
                gain = 0.0
                for intent in judgments.get(doc, frozenset()):
                    gain += (1 - alpha) ** seen.get(intent, 0)
                    seen[intent] = seen.get(intent, 0) + 1
                dcg += gain / math.log2(rank + 1)
            best = max(best, dcg)
        return best

    def test_single_relevant_doc_first(self):
        assert alpha_ndcg(["d1"], {"d1": {"c1"}}, alpha=0.5, depth=1) == 1.0

    def test_two_docs_same_event_hand_expansion(self):
        # DCG = 1 + 0.5/log2(3); the same ordering is ideal
        score = alpha_ndcg(["d1", "d2"], {"d1": {"c"}, "d2": {"c"}}, alpha=0.5, depth=2)
        assert score == pytest.approx(1.0)
        raw = 1.0 + 0.5 / math.log2(3)
        ideal = self.brute_force_ideal({"d1": frozenset("c"), "d2": frozenset("c")}, 0.5, 2)
        assert ideal == pytest.approx(raw)

    def test_zero_ideal_returns_zero(self):
        assert alpha_ndcg(["d1"], {}, alpha=0.5, depth=3) == 0.0

    def test_alpha_zero_single_event_equals_binary_ndcg(self):
        """Independent plain-nDCG implementation as the oracle."""
        rng = random.Random(17)
        for _ in range(40):
            docs = [f"d{i}" for i in range(rng.randint(1, 8))]
            judgments = {d: ({"c"} if rng.random() < 0.6 else set()) for d in docs}
            ranking = docs[:]
            rng.shuffle(ranking)
            rels = [1 if judgments[d] else 0 for d in ranking]
            dcg = sum(r / math.log2(i + 2) for i, r in enumerate(rels))
            ideal_rels = sorted(rels, reverse=True)
            idcg = sum(r / math.log2(i + 2) for i, r in enumerate(ideal_rels))
            expected = dcg / idcg if idcg > 0 else 0.0
            got = alpha_ndcg(ranking, judgments, alpha=0.0, depth=len(docs))
            assert got == pytest.approx(expected, abs=1e-9)

    def test_ideal_ordering_scores_one(self):
        rng = random.Random(23)
        for _ in range(40):
            n_docs = rng.randint(1, 8)
            docs = [f"d{i}" for i in range(n_docs)]
            judgments = {
                d: frozenset(c for c in "abcd" if rng.random() < 0.4) for d in docs
            }
            if not any(judgments.values()):
                continue
            alpha = rng.choice([0.1, 0.5, 0.9])
            # the greedy ideal ranking itself must score exactly 1
            seen: dict[str, int] = {}
            remaining = sorted(docs)
            ideal_order = []
            while remaining:
                best = max(
                    remaining,
                    key=lambda d: (
                        sum((1 - alpha) ** seen.get(c, 0) for c in judgments[d]),
                        [-ord(ch) for ch in d],
                    ),
                )
                ideal_order.append(best)
                for c in judgments[best]:
                    seen[c] = seen.get(c, 0) + 1
                remaining.remove(best)
            assert alpha_ndcg(ideal_order, judgments, alpha=alpha, depth=n_docs) == pytest.approx(
                1.0, abs=1e-9
            )

    def test_greedy_ideal_equals_brute_force_on_random_instances(self):
        rng = random.Random(4242)
        for _ in range(30):
            n_docs = rng.randint(2, 7)
            docs = [f"d{i}" for i in range(n_docs)]
            judgments = {
                d: frozenset(c for c in "abc" if rng.random() < 0.5) for d in docs
            }
            if not any(judgments.values()):
                continue
            alpha = rng.choice([0.0, 0.3, 0.5, 0.8])
            depth = n_docs
            ideal_brute = self.brute_force_ideal(judgments, alpha, depth)
            ranking = docs[:]
            rng.shuffle(ranking)
            got = alpha_ndcg(ranking, judgments, alpha=alpha, depth=depth)
            seen: dict[str, int] = {}
            dcg = 0.0
            for rank, doc in enumerate(ranking, start=1):
                gain = sum((1 - alpha) ** seen.get(c, 0) for c in judgments[doc])
                for c in judgments[doc]:
                    seen[c] = seen.get(c, 0) + 1
                dcg += gain / math.log2(rank + 1)
            assert got == pytest.approx(dcg / ideal_brute, abs=1e-9)

    def test_alpha_range_validated(self):
        with pytest.raises(BadParameterError):
            alpha_ndcg(["d"], {"d": {"c"}}, alpha=1.0)


class TestRouge:
    def test_identity(self):
        assert rouge_n("usain bolt won gold", ["usain bolt won gold"], 1) == 1.0
        assert rouge_n("usain bolt won gold", ["usain bolt won gold"], 2) == 1.0

    def test_hand_counted_unigrams(self):
        score = rouge_n("usain bolt won gold", ["usain bolt won the gold"], 1)
        assert score == pytest.approx(4 / 5)

    def test_hand_counted_bigrams(self):
        score = rouge_n("usain bolt won gold", ["usain bolt won the gold"], 2)
        assert score == pytest.approx(0.5)

    def test_clipping(self):
        # candidate repeats "gold" but the reference has it once
        assert rouge_n("gold gold gold", ["gold medal"], 1) == pytest.approx(0.5)

    def test_multiple_references_max(self):
        score = rouge_n("alpha beta", ["gamma delta", "alpha zeta"], 1)
        assert score == pytest.approx(0.5)

    def test_short_reference_skipped(self):
        assert rouge_n("alpha beta", ["x", "alpha beta"], 2) == 1.0
        with pytest.raises(BadParameterError):
            rouge_n("alpha beta", ["x"], 2)

    def test_candidate_permutation_invariance_for_unigrams(self):
        a = rouge_n("alpha beta gamma", ["alpha gamma delta"], 1)
        b = rouge_n("gamma beta alpha", ["alpha gamma delta"], 1)
        assert a == b

    @given(st.lists(st.sampled_from("abcdef"), min_size=1, max_size=12))
    @settings(max_examples=60)
    def test_self_rouge_is_one(self, tokens):
        text = " ".join(tokens)
        assert rouge_n(text, [text], 1) == 1.0
        if len(tokens) >= 2:
            assert rouge_n(text, [text], 2) == 1.0


class TestTestbedAndRunEval:
    def test_load_fixture_testbed(self, catalog, fixture_paths):
        bed = load_testbed(fixture_paths["testbed"], catalog)
        assert len(bed.facts) == 3
        assert {f.id for f in bed.facts} == {"beijing-games", "london-games", "rio-games"}
        assert all(f.q == ("summer", "olympics") for f in bed.facts)

    def test_duplicate_fact_ids_rejected(self):
        f = make_fact("f1", {1}, date(2008, 1, 1), date(2008, 1, 2))
        with pytest.raises(BadParameterError):
            FactTestbed(name="x", facts=(f, f))

    def test_run_eval_on_fixture_is_perfect(self, olympics_snapshot, catalog, fixture_paths):
        bed = load_testbed(fixture_paths["testbed"], catalog)
        rows = run_eval(olympics_snapshot, bed)
        assert len(rows) == 1
        row = rows[0]
        assert row.query == "summer olympics"
        assert (row.precision, row.recall, row.f1) == (1.0, 1.0, 1.0)
        assert row.alpha_ndcg == pytest.approx(1.0)
        assert 0.0 < row.rouge_1 <= 1.0
        assert 0.0 <= row.rouge_2 <= 1.0

    def test_run_eval_query_matching_nothing(self, olympics_snapshot, catalog):
        import io
        import json

        record = {
            "id": "ghost",
            "q": ["zeppelin", "regatta"],
            "entities": ["China"],
            "geo": {"lat": 0.0, "lon": 0.0},
            "time": {"begin": "1900-01-01", "end": "1900-12-31"},
            "terms": ["zeppelin"],
        }
        bed = load_testbed(io.StringIO(json.dumps(record)), catalog, name="ghost-bed")
        (row,) = run_eval(olympics_snapshot, bed)
        assert (row.precision, row.recall, row.f1) == (0.0, 0.0, 0.0)
        assert row.alpha_ndcg == 0.0
        assert row.rouge_1 == 0.0 and row.rouge_2 == 0.0

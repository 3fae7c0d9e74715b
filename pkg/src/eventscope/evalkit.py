"""Evaluation testbed and metrics: fact matching, precision/recall/F1,
alpha-nDCG for diversified rankings, and ROUGE-N recall for summaries.

A testbed is a newline-delimited JSON file of fact records:

    {"id": "f1", "q": ["summer", "olympics"],
     "entities": ["China", "Micheal_Phelps"],
     "geo": {"lat": 39.55, "lon": 116.23},
     "time": {"begin": "2008-08-08", "end": "2008-08-24"},
     "terms": ["micheal", "phelps", "bejing", "china", "tibet"],
     "source": "manual"}

``entities`` may be catalog ids or canonical names.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Mapping, Sequence, Union

from .annotations import (
    EntityCatalog,
    GeoScope,
    TimeInterval,
    _iter_ndjson,
    entity_sim,
    geo_sim,
    time_sim,
)
from .errors import BadParameterError
from .miner import EventSet

# ---------------------------------------------------------------------------
# Facts and testbeds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Fact:
    """Ground-truth record: query, participants, place, time, and terms."""

    id: str
    q: tuple[str, ...]
    entities: frozenset[int]
    geo: GeoScope
    time: TimeInterval
    terms: tuple[str, ...]
    source: str = ""

    def __post_init__(self) -> None:
        if not self.q:
            raise BadParameterError(f"fact {self.id}: query must be non-empty")
        if not self.entities:
            raise BadParameterError(f"fact {self.id}: entities must be non-empty")


@dataclass(frozen=True)
class Testbed:
    name: str
    facts: tuple[Fact, ...]

    def __post_init__(self) -> None:
        ids = [f.id for f in self.facts]
        if len(ids) != len(set(ids)):
            raise BadParameterError("duplicate fact ids in testbed")

    def by_query(self) -> dict[tuple[str, ...], list[Fact]]:
        grouped: dict[tuple[str, ...], list[Fact]] = {}
        for fact in self.facts:
            grouped.setdefault(fact.q, []).append(fact)
        return grouped


def load_testbed(
    path: Union[str, Path, IO[str]], catalog: EntityCatalog, name: str | None = None
) -> Testbed:
    facts = []
    for rec in _iter_ndjson(path):
        facts.append(
            Fact(
                id=str(rec["id"]),
                q=tuple(str(t) for t in rec["q"]),
                entities=frozenset(catalog.resolve(e).id for e in rec["entities"]),
                geo=GeoScope.from_payload(rec["geo"]),
                time=TimeInterval.parse(rec["time"]["begin"], rec["time"]["end"]),
                terms=tuple(str(t) for t in rec.get("terms", ())),
                source=str(rec.get("source", "")),
            )
        )
    if name is None:
        name = Path(path).stem if isinstance(path, (str, Path)) else "testbed"
    return Testbed(name=name, facts=tuple(facts))


# ---------------------------------------------------------------------------
# Event <-> fact matching
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MatchCriterion:
    """Eligibility rule for pairing a predicted event with a fact."""

    tau_entity: float = 0.5
    require_time_overlap: bool = True
    require_geo: bool = False
    geo_threshold: float = 0.5

    def __post_init__(self) -> None:
        if not (0.0 < self.tau_entity <= 1.0):
            raise BadParameterError("tau_entity must be in (0, 1]")


@dataclass(frozen=True)
class Match:
    event_id: str
    fact_id: str
    similarity: float


def match_events(
    predicted: EventSet, facts: Sequence[Fact], criterion: MatchCriterion = MatchCriterion()
) -> list[Match]:
    """Greedy best-first one-to-one matching by descending combined
    similarity (mean of entity, time, and geo-when-both-sides-have-it)."""
    pairs = []
    for i, event in enumerate(predicted):
        for fact in facts:
            ent = entity_sim(event.entities, fact.entities)
            if ent < criterion.tau_entity:
                continue
            if criterion.require_time_overlap and not event.time.overlaps(fact.time):
                continue
            g = geo_sim(event.geo_scope, fact.geo) if event.geo_scope is not None else None
            if criterion.require_geo and (g is None or g < criterion.geo_threshold):
                continue
            parts = [ent, time_sim(event.time, fact.time)]
            if g is not None:
                parts.append(g)
            sim = sum(parts) / len(parts)
            pairs.append((-sim, i, fact.id, event.id))
    pairs.sort()
    matched_events: set[str] = set()
    matched_facts: set[str] = set()
    out: list[Match] = []
    for neg_sim, _i, fact_id, event_id in pairs:
        if event_id in matched_events or fact_id in matched_facts:
            continue
        matched_events.add(event_id)
        matched_facts.add(fact_id)
        out.append(Match(event_id=event_id, fact_id=fact_id, similarity=-neg_sim))
    return out


def prf1(matches: int, n_predicted: int, n_facts: int) -> tuple[float, float, float]:
    """Precision, recall, F1.

    Degenerate inputs: with nothing predicted and no facts, all three are 1;
    with only one side empty, all three are 0.
    """
    if matches < 0 or n_predicted < 0 or n_facts < 0 or matches > min(n_predicted, n_facts):
        raise BadParameterError("inconsistent match counts")
    if n_predicted == 0 and n_facts == 0:
        return (1.0, 1.0, 1.0)
    if n_predicted == 0 or n_facts == 0:
        return (0.0, 0.0, 0.0)
    precision = matches / n_predicted
    recall = matches / n_facts
    if precision + recall == 0.0:
        return (precision, recall, 0.0)
    return (precision, recall, 2.0 * precision * recall / (precision + recall))


# ---------------------------------------------------------------------------
# alpha-nDCG
# ---------------------------------------------------------------------------


def _alpha_dcg(
    ranking: Sequence[str],
    judgments: Mapping[str, frozenset[str]],
    alpha: float,
    depth: int,
) -> float:
    seen: dict[str, int] = {}
    dcg = 0.0
    for rank, doc in enumerate(ranking[:depth], start=1):
        gain = 0.0
        for intent in judgments.get(doc, frozenset()):
            gain += (1.0 - alpha) ** seen.get(intent, 0)
            seen[intent] = seen.get(intent, 0) + 1
        dcg += gain / math.log2(rank + 1)
    return dcg


def alpha_ndcg(
    ranking: Sequence[str],
    judgments: Mapping[str, Iterable[str]],
    alpha: float = 0.5,
    depth: int = 10,
) -> float:
    """Diversity-aware nDCG: a document's gain for an intent decays by
    (1 - alpha) per earlier-ranked document covering the same intent.

    The ideal ranking is computed greedily over the union of the ranking and
    all judged documents. Returns 0 when the ideal DCG is 0.
    """
    if not (0.0 <= alpha < 1.0):
        raise BadParameterError("alpha must be in [0, 1)")
    if depth < 1:
        raise BadParameterError("depth must be >= 1")
    judged = {doc: frozenset(intents) for doc, intents in judgments.items()}
    pool = sorted(set(ranking) | set(judged))

    # Greedy ideal: pick the doc with the largest marginal gain each rank.
    seen: dict[str, int] = {}
    remaining = list(pool)
    ideal = 0.0
    for rank in range(1, min(depth, len(pool)) + 1):
        best_doc, best_gain = None, -1.0
        for doc in remaining:
            gain = sum(
                (1.0 - alpha) ** seen.get(intent, 0) for intent in judged.get(doc, frozenset())
            )
            if gain > best_gain:
                best_doc, best_gain = doc, gain
        assert best_doc is not None
        remaining.remove(best_doc)
        for intent in judged.get(best_doc, frozenset()):
            seen[intent] = seen.get(intent, 0) + 1
        ideal += best_gain / math.log2(rank + 1)

    if ideal == 0.0:
        return 0.0
    return _alpha_dcg(ranking, judged, alpha, depth) / ideal


# ---------------------------------------------------------------------------
# ROUGE-N
# ---------------------------------------------------------------------------


def _ngrams(tokens: Sequence[str], n: int) -> dict[tuple[str, ...], int]:
    out: dict[tuple[str, ...], int] = {}
    for i in range(len(tokens) - n + 1):
        gram = tuple(tokens[i : i + n])
        out[gram] = out.get(gram, 0) + 1
    return out


def rouge_n(candidate: str, references: Sequence[str], n: int) -> float:
    """Recall-oriented ROUGE-N with clipping; max over references.

    References shorter than ``n`` tokens are skipped; if every reference is
    skipped the call is an error.
    """
    from .corpus import tokenize

    if n not in (1, 2):
        raise BadParameterError("rouge_n supports n in {1, 2}")
    if not references:
        raise BadParameterError("at least one reference is required")
    cand_grams = _ngrams(tokenize(candidate), n)
    best = None
    for reference in references:
        ref_tokens = tokenize(reference)
        if len(ref_tokens) < n:
            continue
        ref_grams = _ngrams(ref_tokens, n)
        total = sum(ref_grams.values())
        matched = sum(min(c, cand_grams.get(g, 0)) for g, c in ref_grams.items())
        score = matched / total
        best = score if best is None else max(best, score)
    if best is None:
        raise BadParameterError(f"every reference is shorter than {n} tokens")
    return best


# ---------------------------------------------------------------------------
# End-to-end evaluation over a snapshot
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EvalRow:
    """One report row: metrics for one testbed query."""

    testbed: str
    query: str
    n_facts: int
    n_predicted: int
    precision: float
    recall: float
    f1: float
    alpha_ndcg: float
    rouge_1: float
    rouge_2: float

    def to_payload(self) -> dict:
        return {
            "testbed": self.testbed,
            "query": self.query,
            "n_facts": self.n_facts,
            "n_predicted": self.n_predicted,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "alpha_ndcg": self.alpha_ndcg,
            "rouge_1": self.rouge_1,
            "rouge_2": self.rouge_2,
        }


EVAL_COLUMNS = (
    "testbed",
    "query",
    "n_facts",
    "n_predicted",
    "precision",
    "recall",
    "f1",
    "alpha_ndcg",
    "rouge_1",
    "rouge_2",
)


def run_eval(
    snapshot,
    testbed: Testbed,
    criterion: MatchCriterion = MatchCriterion(),
    miner_params=None,
    alpha: float = 0.5,
    depth: int = 10,
    word_budget: int = 100,
) -> list[EvalRow]:
    """Evaluate mining, diversification, and summarization per testbed query.

    Mining is scored by P/R/F1 against the query's facts; the diversified
    document ranking by alpha-nDCG using fact coverage as intent judgments;
    the extractive summary by ROUGE-1/2 against a reference built from the
    facts' terms in time order.
    """
    from .miner import MinerParams
    from .search import (
        Query,
        SearchParams,
        event_diverse,
        event_summary,
        search as run_search,
        unit_covers,
    )

    if miner_params is None:
        miner_params = MinerParams()
    search_params = SearchParams(top_n=max(depth, 10))
    rows = []
    for q_terms, facts in sorted(testbed.by_query().items()):
        query = Query(keywords=q_terms)
        predicted = snapshot.mine(query, miner_params, search_params)
        matches = match_events(predicted, facts, criterion)
        precision, recall, f1 = prf1(len(matches), len(predicted), len(facts))

        results = run_search(snapshot.corpus, snapshot.index, query, search_params)
        judgments = {
            s.doc_id: frozenset(
                f.id
                for f in facts
                if any(
                    unit_covers(u, f.entities, f.time)
                    for u in snapshot.corpus.doc(s.doc_id).units
                )
            )
            for s in results
        }
        selection = event_diverse(snapshot.corpus, results, predicted, budget=depth)
        ndcg = alpha_ndcg(list(selection.doc_ids), judgments, alpha=alpha, depth=depth)

        candidate_units = [
            u for s in results for u in snapshot.corpus.doc(s.doc_id).units
        ]
        summary_text = ""
        if candidate_units:
            summary = event_summary(
                candidate_units,
                predicted,
                word_budget=word_budget,
                stopwords=snapshot.corpus.vocabulary.stopwords,
            )
            summary_text = summary.text()
        reference = " ".join(
            " ".join(f.terms) for f in sorted(facts, key=lambda f: (f.time.begin, f.id))
        )

        def rouge_or_zero(n: int) -> float:
            # a reference shorter than n grams scores the row 0, not an error
            from .corpus import tokenize

            if len(tokenize(reference)) < n:
                return 0.0
            return rouge_n(summary_text, [reference], n)

        r1 = rouge_or_zero(1)
        r2 = rouge_or_zero(2)

        rows.append(
            EvalRow(
                testbed=testbed.name,
                query=" ".join(q_terms),
                n_facts=len(facts),
                n_predicted=len(predicted),
                precision=precision,
                recall=recall,
                f1=f1,
                alpha_ndcg=ndcg,
                rouge_1=r1,
                rouge_2=r2,
            )
        )
    return rows

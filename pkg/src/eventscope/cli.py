"""Command-line interface.

Typical run against the in-tree fixtures:

    eventscope index --records fixtures/olympics_mini.ndjson \\
        --catalog fixtures/entity_catalog.ndjson \\
        --gazetteer fixtures/gazetteer.ndjson \\
        --testbed fixtures/testbed_olympics.ndjson \\
        --out /tmp/snap
    eventscope mine --snapshot /tmp/snap --query "summer olympics" --report /tmp/mine
    eventscope cube --snapshot /tmp/snap \\
        --levels time=month,geo=country,entity=entity \\
        --pipeline "slice entity=Usain_Bolt; dice geo=China; drillup time"
    eventscope serve --snapshot /tmp/snap --port 8080

Report directories hold the delimited tables next to the rendered figures.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .corpus import IngestConfig, IngestReport, ingest
from .cube import CubeLevelSpec, build_cube, parse_pipeline, run_pipeline
from .annotations import EntityCatalog
from .errors import EventscopeError
from .evalkit import MatchCriterion, load_testbed, run_eval
from .miner import EventSet, MinerParams
from .search import SearchParams, event_diverse, event_summary, parse_query, search
from .snapshot import build_snapshot, load_snapshot
from .util import dumps


@click.group()
def main() -> None:
    """Event mining, search, and analytics over annotated corpora."""


def _fail(exc: Exception) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(1)


def _load(snapshot_path: str):
    try:
        return load_snapshot(snapshot_path)
    except EventscopeError as exc:
        _fail(exc)


def _miner_params(min_support, max_events, time_level, geo_level, terms, max_itemset) -> MinerParams:
    return MinerParams(
        min_support=min_support,
        max_events=max_events,
        time_bucket_level=time_level,
        geo_level=geo_level,
        context_term_count=terms,
        max_itemset_size=max_itemset,
    )


@main.command("ingest")
@click.option("--records", required=True, type=click.Path(exists=True), help="unit records (ndjson)")
@click.option("--catalog", required=True, type=click.Path(exists=True), help="entity catalog (ndjson)")
@click.option("--granularity", default="sentence", type=click.Choice(["sentence", "paragraph"]))
@click.option("--corpus-id", default="corpus")
def ingest_cmd(records: str, catalog: str, granularity: str, corpus_id: str) -> None:
    """Validate a record stream and report what ingest would load."""
    try:
        report = IngestReport()
        corpus = ingest(
            records,
            EntityCatalog.from_file(catalog),
            IngestConfig(granularity=granularity),
            corpus_id=corpus_id,
            report=report,
        )
    except EventscopeError as exc:
        _fail(exc)
    click.echo(f"documents\t{len(corpus.documents)}")
    click.echo(f"units\t{corpus.unit_count}")
    click.echo(f"vocabulary\t{len(corpus.vocabulary)}")
    click.echo(f"records_read\t{report.records_read}")
    click.echo(f"records_skipped\t{report.records_skipped}")
    click.echo(f"entities_dropped\t{report.entities_dropped}")
    click.echo(f"times_dropped\t{report.times_dropped}")
    click.echo(f"geos_dropped\t{report.geos_dropped}")
    for warning in report.warnings:
        click.echo(f"warning\t{warning}", err=True)


@main.command("index")
@click.option("--records", required=True, type=click.Path(exists=True))
@click.option("--catalog", required=True, type=click.Path(exists=True))
@click.option("--gazetteer", required=True, type=click.Path(exists=True))
@click.option("--testbed", "testbeds", multiple=True, type=click.Path(exists=True))
@click.option("--granularity", default="sentence", type=click.Choice(["sentence", "paragraph"]))
@click.option("--corpus-id", default="corpus")
@click.option("--out", required=True, type=click.Path(), help="snapshot directory to write")
def index_cmd(records, catalog, gazetteer, testbeds, granularity, corpus_id, out) -> None:
    """Ingest, build the inverted index, and persist a snapshot."""
    try:
        snapshot, report = build_snapshot(
            records, catalog, gazetteer, out,
            granularity=granularity, corpus_id=corpus_id, testbed_files=tuple(testbeds),
        )
    except EventscopeError as exc:
        _fail(exc)
    click.echo(f"snapshot\t{out}")
    click.echo(f"version\t{snapshot.version}")
    click.echo(f"documents\t{len(snapshot.corpus.documents)}")
    click.echo(f"units\t{snapshot.corpus.unit_count}")
    if report.records_skipped:
        click.echo(f"records_skipped\t{report.records_skipped}", err=True)


_mine_options = [
    click.option("--min-support", default=1, show_default=True),
    click.option("--max-events", default=50, show_default=True),
    click.option("--time-level", default="year", type=click.Choice(["day", "month", "year", "decade"]), show_default=True),
    click.option("--geo-level", default="country", type=click.Choice(["place", "country", "continent"]), show_default=True),
    click.option("--terms", default=5, show_default=True, help="context terms per event"),
    click.option("--max-itemset", default=4, show_default=True),
]


def _with_mine_options(fn):
    for option in reversed(_mine_options):
        fn = option(fn)
    return fn


@main.command("mine")
@click.option("--snapshot", "snapshot_path", required=True, type=click.Path(exists=True))
@click.option("--query", default=None, help="query text; omit to mine the whole corpus")
@click.option("--top-n", default=10, show_default=True, help="documents retrieved before mining")
@_with_mine_options
@click.option("--out", type=click.Path(), default=None, help="write event records (ndjson)")
@click.option("--report", "report_dir", type=click.Path(), default=None, help="write events.tsv + figures here")
def mine_cmd(snapshot_path, query, top_n, min_support, max_events, time_level, geo_level,
             terms, max_itemset, out, report_dir) -> None:
    """Mine ranked events for a query (or the whole corpus)."""
    snapshot = _load(snapshot_path)
    params = _miner_params(min_support, max_events, time_level, geo_level, terms, max_itemset)
    try:
        parsed = parse_query(query, snapshot.catalog) if query else None
        events = snapshot.mine(parsed, params, SearchParams(top_n=top_n))
    except EventscopeError as exc:
        _fail(exc)
    for record in events.to_records():
        click.echo(dumps(record))
    if out:
        Path(out).write_text("\n".join(dumps(r) for r in events.to_records()) + "\n", "utf-8")
    if report_dir:
        from .report import render_event_report

        for path in render_event_report(events, report_dir):
            click.echo(f"wrote\t{path}", err=True)


@main.command("search")
@click.option("--snapshot", "snapshot_path", required=True, type=click.Path(exists=True))
@click.option("--query", required=True)
@click.option("--top-n", "-n", default=10, show_default=True)
@click.option("--report", "report_dir", type=click.Path(), default=None)
def search_cmd(snapshot_path, query, top_n, report_dir) -> None:
    """Multidimensional search; prints a TSV ranking."""
    snapshot = _load(snapshot_path)
    try:
        parsed = parse_query(query, snapshot.catalog)
        results = search(snapshot.corpus, snapshot.index, parsed, SearchParams(top_n=top_n))
    except EventscopeError as exc:
        _fail(exc)
    click.echo("doc_id\tscore\ttext\ttime\tgeo\tentity")
    for d in results:
        c = d.components
        click.echo(
            f"{d.doc_id}\t{d.score:.6f}\t{c['text']:.6f}\t{c['time']:.6f}\t{c['geo']:.6f}\t{c['entity']:.6f}"
        )
    if report_dir:
        from .report import write_results_tsv

        Path(report_dir).mkdir(parents=True, exist_ok=True)
        write_results_tsv(results, Path(report_dir) / "results.tsv")


@main.command("cube")
@click.option("--snapshot", "snapshot_path", required=True, type=click.Path(exists=True))
@click.option("--query", default=None, help="mine events for this query; omit for whole corpus")
@click.option("--events", "events_file", type=click.Path(exists=True), default=None,
              help="use mined event records instead of mining")
@click.option("--levels", default="time=year,geo=country,entity=entity", show_default=True)
@click.option("--pipeline", default="", help="ops, semicolon-separated or @file")
@_with_mine_options
@click.option("--top-n", default=10, show_default=True)
@click.option("--report", "report_dir", type=click.Path(), default=None)
def cube_cmd(snapshot_path, query, events_file, levels, pipeline, min_support, max_events,
             time_level, geo_level, terms, max_itemset, top_n, report_dir) -> None:
    """Build the event cube and run a pipeline; prints the cell table."""
    snapshot = _load(snapshot_path)
    try:
        spec_kwargs = {}
        for piece in levels.split(","):
            dim, _, level = piece.partition("=")
            spec_kwargs[dim.strip()] = level.strip()
        spec = CubeLevelSpec(**spec_kwargs)
        if events_file:
            import json as _json

            records = [
                _json.loads(line)
                for line in Path(events_file).read_text("utf-8").splitlines()
                if line.strip()
            ]
            events = EventSet.from_records(records)
        else:
            params = _miner_params(min_support, max_events, time_level, geo_level, terms, max_itemset)
            parsed = parse_query(query, snapshot.catalog) if query else None
            events = snapshot.mine(parsed, params, SearchParams(top_n=top_n))
        cube = build_cube(events, spec, snapshot.catalog, snapshot.gazetteer)
        if pipeline.startswith("@"):
            pipeline = Path(pipeline[1:]).read_text("utf-8")
        result = run_pipeline(cube, parse_pipeline(pipeline)) if pipeline.strip() else cube
    except (EventscopeError, TypeError) as exc:
        _fail(exc)
    click.echo("time\tgeo\tentity\tcount\tscore_mass\tevent_ids")
    for row in result.rows():
        click.echo(
            f"{row['time']}\t{row['geo']}\t{row['entity']}\t{row['count']}"
            f"\t{row['score_mass']:.6f}\t{','.join(row['event_ids'])}"
        )
    if report_dir:
        from .report import render_cube_report

        for path in render_cube_report(result, report_dir):
            click.echo(f"wrote\t{path}", err=True)


@main.command("diversify")
@click.option("--snapshot", "snapshot_path", required=True, type=click.Path(exists=True))
@click.option("--query", required=True)
@click.option("--budget", default=5, show_default=True)
@click.option("--gamma", default=0.1, show_default=True)
@_with_mine_options
@click.option("--top-n", default=10, show_default=True)
def diversify_cmd(snapshot_path, query, budget, gamma, min_support, max_events, time_level,
                  geo_level, terms, max_itemset, top_n) -> None:
    """Select documents covering the mined events."""
    snapshot = _load(snapshot_path)
    try:
        parsed = parse_query(query, snapshot.catalog)
        search_params = SearchParams(top_n=top_n)
        results = search(snapshot.corpus, snapshot.index, parsed, search_params)
        params = _miner_params(min_support, max_events, time_level, geo_level, terms, max_itemset)
        events = snapshot.mine(parsed, params, search_params)
        selection = event_diverse(snapshot.corpus, results, events, budget, gamma)
    except EventscopeError as exc:
        _fail(exc)
    click.echo("rank\tdoc_id\tnewly_covered")
    for rank, (doc_id, covered) in enumerate(zip(selection.doc_ids, selection.covered_at), 1):
        click.echo(f"{rank}\t{doc_id}\t{','.join(covered)}")
    click.echo(f"# residual uncovered mass: {selection.residual_mass:.6f}", err=True)


@main.command("summarize")
@click.option("--snapshot", "snapshot_path", required=True, type=click.Path(exists=True))
@click.option("--query", required=True)
@click.option("--word-budget", default=100, show_default=True)
@click.option("--rho", default=0.5, show_default=True)
@_with_mine_options
@click.option("--top-n", default=10, show_default=True)
def summarize_cmd(snapshot_path, query, word_budget, rho, min_support, max_events, time_level,
                  geo_level, terms, max_itemset, top_n) -> None:
    """Extractive, event-covering summary ordered as a timeline."""
    snapshot = _load(snapshot_path)
    try:
        parsed = parse_query(query, snapshot.catalog)
        search_params = SearchParams(top_n=top_n)
        results = search(snapshot.corpus, snapshot.index, parsed, search_params)
        params = _miner_params(min_support, max_events, time_level, geo_level, terms, max_itemset)
        events = snapshot.mine(parsed, params, search_params)
        units = [u for s in results for u in snapshot.corpus.doc(s.doc_id).units]
        summary = event_summary(units, events, word_budget, rho, snapshot.corpus.vocabulary.stopwords)
    except EventscopeError as exc:
        _fail(exc)
    for (doc_id, position, alt), text in summary.sentences:
        click.echo(f"{doc_id}:{position}.{alt}\t{text}")
    click.echo(
        f"# {summary.word_count} words; covered events: {','.join(summary.covered_event_ids) or '-'}",
        err=True,
    )
    for warning in summary.warnings:
        click.echo(f"# warning: {warning}", err=True)


@main.command("eval")
@click.option("--snapshot", "snapshot_path", required=True, type=click.Path(exists=True))
@click.option("--testbed", required=True, help="testbed id in the snapshot, or a file path")
@click.option("--tau-entity", default=0.5, show_default=True)
@click.option("--report", "report_dir", type=click.Path(), default=None)
def eval_cmd(snapshot_path, testbed, tau_entity, report_dir) -> None:
    """Run the evaluation kit; prints the metric table."""
    snapshot = _load(snapshot_path)
    try:
        if Path(testbed).is_file():
            bed = load_testbed(testbed, snapshot.catalog)
        else:
            bed = load_testbed(snapshot.testbed_path(testbed), snapshot.catalog, name=testbed)
        rows = run_eval(snapshot, bed, MatchCriterion(tau_entity=tau_entity))
    except EventscopeError as exc:
        _fail(exc)
    click.echo("testbed\tquery\tn_facts\tn_predicted\tprecision\trecall\tf1\talpha_ndcg\trouge_1\trouge_2")
    for r in rows:
        click.echo(
            f"{r.testbed}\t{r.query}\t{r.n_facts}\t{r.n_predicted}\t{r.precision:.6f}"
            f"\t{r.recall:.6f}\t{r.f1:.6f}\t{r.alpha_ndcg:.6f}\t{r.rouge_1:.6f}\t{r.rouge_2:.6f}"
        )
    if report_dir:
        from .report import render_eval_report

        for path in render_eval_report(rows, report_dir):
            click.echo(f"wrote\t{path}", err=True)


@main.command("serve")
@click.option("--snapshot", "snapshot_path", type=click.Path(), default=None)
@click.option("--config", "config_file", type=click.Path(exists=True), default=None)
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
def serve_cmd(snapshot_path, config_file, host, port) -> None:
    """Serve the HTTP API over a snapshot (read-only)."""
    from .service import ServiceConfig, serve

    try:
        config = ServiceConfig.load(
            config_file, snapshot_path=snapshot_path, host=host, port=port
        )
        serve(config)
    except EventscopeError as exc:
        _fail(exc)


if __name__ == "__main__":
    main()

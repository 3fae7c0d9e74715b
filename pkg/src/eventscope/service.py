"""Read-only HTTP service over a persisted snapshot.

The service loads one snapshot and answers search/mine/cube/diversify/
summarize/eval requests against it; ingestion and indexing happen offline
via the CLI. A reload swaps the whole snapshot atomically: each request
captures the snapshot reference once on entry, so in-flight requests finish
on the version they started with and every response carries that version.

Responses are rendered with a deterministic JSON writer, which makes a
service response byte-comparable with the corresponding library call.
"""

from __future__ import annotations

import json
import os
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Union

from fastapi import FastAPI, Request, Response

from .cube import CubeLevelSpec, build_cube, parse_pipeline, run_pipeline
from .errors import (
    BadParameterError,
    EventscopeError,
    PipelineError,
    SnapshotError,
)
from .evalkit import MatchCriterion, load_testbed, run_eval
from .miner import EventSet, MinerParams
from .search import (
    Query,
    SearchParams,
    event_diverse,
    event_summary,
    parse_query,
    search,
)
from .snapshot import Snapshot, load_snapshot
from .util import dumps


@dataclass(frozen=True)
class ServiceConfig:
    """Service settings; a JSON config file plus env-var overrides
    (EVENTSCOPE_SNAPSHOT, EVENTSCOPE_PORT)."""

    snapshot_path: str
    host: str = "127.0.0.1"
    port: int = 8080
    max_results: int = 100
    max_cells: int = 500

    @classmethod
    def load(cls, config_file: Union[str, Path, None] = None, **overrides) -> "ServiceConfig":
        data: dict = {}
        if config_file is not None:
            data.update(json.loads(Path(config_file).read_text(encoding="utf-8")))
        data.update({k: v for k, v in overrides.items() if v is not None})
        if os.environ.get("EVENTSCOPE_SNAPSHOT"):
            data["snapshot_path"] = os.environ["EVENTSCOPE_SNAPSHOT"]
        if os.environ.get("EVENTSCOPE_PORT"):
            data["port"] = int(os.environ["EVENTSCOPE_PORT"])
        if "snapshot_path" not in data:
            raise BadParameterError("snapshot_path is required (config file or EVENTSCOPE_SNAPSHOT)")
        return cls(**data)


class SnapshotHolder:
    """Holds the current snapshot; swap is a single reference assignment,
    which is atomic under the interpreter, so readers never see a torn
    state. Requests must read ``current`` exactly once."""

    def __init__(self, snapshot: Snapshot):
        self._current = snapshot

    @property
    def current(self) -> Snapshot:
        return self._current

    def reload(self, path: Union[str, Path]) -> Snapshot:
        """Load and validate the new snapshot, then swap. On any failure the
        old snapshot stays in place."""
        fresh = load_snapshot(path)
        self._current = fresh
        return fresh


_STATUS_BY_CODE = {
    "empty_query": 400,
    "bad_parameter": 400,
    "no_such_member": 400,
    "level_bound": 400,
    "unmapped_member": 400,
    "pipeline_failed": 400,
    "snapshot_invalid": 400,
    "ingest_failed": 400,
    "internal": 500,
}


def _json_response(payload: Mapping, status_code: int = 200) -> Response:
    return Response(content=dumps(payload), media_type="application/json", status_code=status_code)


def _error_response(exc: EventscopeError, op_index: int | None = None) -> Response:
    body: dict = {"code": exc.code, "message": str(exc)}
    if isinstance(exc, PipelineError):
        body["op_index"] = exc.op_index
    elif op_index is not None:
        body["op_index"] = op_index
    return _json_response({"error": body}, status_code=_STATUS_BY_CODE.get(exc.code, 500))


def _parse_optional_query(snapshot: Snapshot, text: str | None) -> Query | None:
    if text is None or not str(text).strip():
        return None
    return parse_query(str(text), snapshot.catalog)


def _miner_params(data: Mapping) -> MinerParams:
    return MinerParams.from_payload(data.get("params") or {})


def _search_params(data: Mapping, max_results: int) -> SearchParams:
    top_n = int(data.get("top_n") or 10)
    return SearchParams(top_n=max(1, min(top_n, max_results)))


def _events_for_request(snapshot: Snapshot, data: Mapping) -> tuple[EventSet, Query | None]:
    """Events from inline records, or mined for the request's query/params."""
    if data.get("events") is not None:
        return EventSet.from_records(data["events"]), None
    query = _parse_optional_query(snapshot, data.get("query"))
    params = _miner_params(data)
    return snapshot.mine(query, params, _search_params(data, 100)), query


def mine_payload(snapshot: Snapshot, query: Query | None, events: EventSet, params: MinerParams) -> dict:
    return {
        "version": snapshot.version,
        "query": query.to_payload() if query else None,
        "params": params.to_payload(),
        "events": events.to_records(),
    }


def create_app(holder: SnapshotHolder, config: ServiceConfig | None = None) -> FastAPI:
    """Build the FastAPI app over a snapshot holder."""
    caps = config or ServiceConfig(snapshot_path="", max_results=100, max_cells=500)
    app = FastAPI(title="eventscope", docs_url=None, redoc_url=None)
    mine_cache: OrderedDict[str, str] = OrderedDict()

    @app.exception_handler(EventscopeError)
    async def _handle_engine_error(_request: Request, exc: EventscopeError) -> Response:
        return _error_response(exc)

    @app.get("/health")
    def health() -> Response:
        snapshot = holder.current
        return _json_response({"status": "ok", "version": snapshot.version})

    @app.get("/search")
    def do_search(
        q: str | None = None,
        time: str | None = None,
        geo: str | None = None,
        entity: str | None = None,
        n: int = 10,
    ) -> Response:
        snapshot = holder.current
        text = " ".join(
            part
            for part in (
                q or "",
                f"time:{time}" if time else "",
                f"geo:{geo}" if geo else "",
                f"entity:{entity}" if entity else "",
            )
            if part
        )
        query = parse_query(text, snapshot.catalog)
        params = SearchParams(top_n=max(1, min(int(n), caps.max_results)))
        results = search(snapshot.corpus, snapshot.index, query, params)
        return _json_response(
            {
                "version": snapshot.version,
                "query": query.to_payload(),
                **results.to_payload(),
            }
        )

    @app.post("/events/mine")
    async def mine(request: Request) -> Response:
        snapshot = holder.current
        data = await request.json()
        cache_key = snapshot.version + "\x00" + dumps(data)
        if cache_key not in mine_cache:
            query = _parse_optional_query(snapshot, data.get("query"))
            params = _miner_params(data)
            events = snapshot.mine(query, params, _search_params(data, caps.max_results))
            body = dumps(mine_payload(snapshot, query, events, params))
            mine_cache[cache_key] = body
            if len(mine_cache) > 64:
                mine_cache.popitem(last=False)
        mine_cache["_latest"] = mine_cache[cache_key]
        return Response(content=mine_cache[cache_key], media_type="application/json")

    @app.get("/events")
    def last_events() -> Response:
        body = mine_cache.get("_latest")
        if body is None:
            return _json_response(
                {"error": {"code": "no_events", "message": "no mine call has run yet"}},
                status_code=404,
            )
        return Response(content=body, media_type="application/json")

    @app.post("/cube/build")
    async def cube_build(request: Request) -> Response:
        snapshot = holder.current
        data = await request.json()
        events, _query = _events_for_request(snapshot, data)
        spec = CubeLevelSpec(**(data.get("levels") or {}))
        cube = build_cube(events, spec, snapshot.catalog, snapshot.gazetteer)
        return _json_response(
            {"version": snapshot.version, "cube": _capped_cube_payload(cube, caps.max_cells)}
        )

    @app.post("/cube/pipeline")
    async def cube_pipeline(request: Request) -> Response:
        snapshot = holder.current
        data = await request.json()
        events, _query = _events_for_request(snapshot, data)
        spec = CubeLevelSpec(**(data.get("levels") or {}))
        cube = build_cube(events, spec, snapshot.catalog, snapshot.gazetteer)
        ops = parse_pipeline(str(data.get("pipeline") or ""))
        result = run_pipeline(cube, ops)
        return _json_response(
            {
                "version": snapshot.version,
                "ops_applied": len(ops),
                "cube": _capped_cube_payload(result, caps.max_cells),
            }
        )

    @app.post("/diversify")
    async def diversify(request: Request) -> Response:
        snapshot = holder.current
        data = await request.json()
        query = _parse_optional_query(snapshot, data.get("query"))
        if query is None:
            raise BadParameterError("diversify requires a query")
        budget = int(data.get("budget") or 10)
        gamma = float(data.get("gamma", 0.1))
        params = _search_params(data, caps.max_results)
        results = search(snapshot.corpus, snapshot.index, query, params)
        events = snapshot.mine(query, _miner_params(data), params)
        selection = event_diverse(snapshot.corpus, results, events, budget, gamma)
        return _json_response(
            {
                "version": snapshot.version,
                "query": query.to_payload(),
                "selection": selection.to_payload(),
            }
        )

    @app.post("/summarize")
    async def summarize(request: Request) -> Response:
        snapshot = holder.current
        data = await request.json()
        query = _parse_optional_query(snapshot, data.get("query"))
        if query is None:
            raise BadParameterError("summarize requires a query")
        word_budget = int(data.get("word_budget") or 100)
        rho = float(data.get("rho", 0.5))
        params = _search_params(data, caps.max_results)
        results = search(snapshot.corpus, snapshot.index, query, params)
        events = snapshot.mine(query, _miner_params(data), params)
        units = [u for s in results for u in snapshot.corpus.doc(s.doc_id).units]
        summary = event_summary(
            units, events, word_budget, rho, snapshot.corpus.vocabulary.stopwords
        )
        return _json_response(
            {
                "version": snapshot.version,
                "query": query.to_payload(),
                "summary": summary.to_payload(),
            }
        )

    @app.post("/eval/run")
    async def eval_run(request: Request) -> Response:
        snapshot = holder.current
        data = await request.json()
        name = str(data.get("testbed") or "")
        if not name:
            raise BadParameterError("testbed id is required")
        try:
            path = snapshot.testbed_path(name)
        except SnapshotError as exc:
            return _json_response(
                {"error": {"code": "unknown_testbed", "message": str(exc)}}, status_code=404
            )
        testbed = load_testbed(path, snapshot.catalog, name=name)
        rows = run_eval(snapshot, testbed, MatchCriterion(), _miner_params(data))
        return _json_response(
            {"version": snapshot.version, "rows": [r.to_payload() for r in rows]}
        )

    @app.post("/reload")
    async def reload(request: Request) -> Response:
        raw = await request.body()
        data = json.loads(raw) if raw.strip() else {}
        current = holder.current
        path = data.get("path") or (str(current.path) if current.path else None)
        if path is None:
            raise SnapshotError("no snapshot path to reload from")
        fresh = holder.reload(path)
        return _json_response({"status": "ok", "version": fresh.version})

    return app


def _capped_cube_payload(cube, max_cells: int) -> dict:
    payload = cube.to_payload()
    if len(payload["cells"]) > max_cells:
        payload["cells"] = payload["cells"][:max_cells]
        payload["truncated"] = True
    return payload


def serve(config: ServiceConfig) -> None:
    """Load the snapshot and run the service; refuses to start when the
    snapshot is missing or corrupt."""
    import uvicorn

    snapshot = load_snapshot(config.snapshot_path)
    app = create_app(SnapshotHolder(snapshot), config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")

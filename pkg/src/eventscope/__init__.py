"""eventscope: event mining, search, and analytics over semantically
annotated corpora."""

from .annotations import (
    EntityCatalog,
    Gazetteer,
    GeoScope,
    TimeInterval,
    entity_sim,
    geo_sim,
    haversine_km,
    time_sim,
)
from .corpus import AnnotationUnit, Corpus, Document, IngestConfig, IngestReport, ingest
from .cube import CubeLevelSpec, EventCube, build_cube, parse_pipeline, run_pipeline
from .evalkit import Fact, MatchCriterion, Testbed, alpha_ndcg, match_events, prf1, rouge_n
from .index import IndexConfig, InvertedIndex, build_index, load_index, save_index
from .miner import Event, EventSet, MinerParams, event_detect, event_sim
from .search import (
    DiverseSelection,
    Query,
    ResultSet,
    SearchParams,
    Summary,
    event_diverse,
    event_summary,
    parse_query,
    search,
)
from .snapshot import Snapshot, build_snapshot, load_snapshot, save_snapshot

__version__ = "0.1.0"

__all__ = [
    "AnnotationUnit",
    "Corpus",
    "CubeLevelSpec",
    "DiverseSelection",
    "Document",
    "EntityCatalog",
    "Event",
    "EventCube",
    "EventSet",
    "Fact",
    "Gazetteer",
    "GeoScope",
    "IndexConfig",
    "IngestConfig",
    "IngestReport",
    "InvertedIndex",
    "MatchCriterion",
    "MinerParams",
    "Query",
    "ResultSet",
    "SearchParams",
    "Snapshot",
    "Summary",
    "Testbed",
    "TimeInterval",
    "alpha_ndcg",
    "build_cube",
    "build_index",
    "build_snapshot",
    "entity_sim",
    "event_detect",
    "event_diverse",
    "event_sim",
    "event_summary",
    "geo_sim",
    "haversine_km",
    "ingest",
    "load_index",
    "load_snapshot",
    "match_events",
    "parse_pipeline",
    "parse_query",
    "prf1",
    "rouge_n",
    "run_pipeline",
    "save_index",
    "save_snapshot",
    "search",
    "time_sim",
]

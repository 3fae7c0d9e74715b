"""Report rendering: tab-delimited tables plus matplotlib figures.

Every report path writes the delimited output and the figures side by side
in one directory, so a report is self-contained and diffable. Figures use
the Agg backend; no display or tile service is required.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Sequence, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .cube import EventCube
from .evalkit import EVAL_COLUMNS, EvalRow
from .miner import EventSet
from .search import ResultSet

EVENT_COLUMNS = (
    "id",
    "entities",
    "geo_member",
    "time_begin",
    "time_end",
    "score",
    "support",
    "terms",
)


def _write_tsv(path: Path, columns: Sequence[str], rows: Iterable[Sequence]) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(columns)
        writer.writerows(rows)


def write_events_tsv(events: EventSet, path: Union[str, Path]) -> None:
    rows = []
    for e in events:
        rows.append(
            (
                e.id,
                ",".join(e.entity_names) if e.entity_names else ",".join(map(str, sorted(e.entities))),
                e.geo_member,
                e.time.begin.isoformat(),
                e.time.end.isoformat(),
                f"{e.score:.6f}",
                e.support,
                ",".join(t for t, _ in e.terms),
            )
        )
    _write_tsv(Path(path), EVENT_COLUMNS, rows)


def write_results_tsv(results: ResultSet, path: Union[str, Path]) -> None:
    rows = [
        (
            d.doc_id,
            f"{d.score:.6f}",
            f"{d.components['text']:.6f}",
            f"{d.components['time']:.6f}",
            f"{d.components['geo']:.6f}",
            f"{d.components['entity']:.6f}",
        )
        for d in results
    ]
    _write_tsv(Path(path), ("doc_id", "score", "text", "time", "geo", "entity"), rows)


def write_cube_tsv(cube: EventCube, path: Union[str, Path]) -> None:
    rows = [
        (
            r["time"],
            r["geo"],
            r["entity"],
            r["count"],
            f"{r['score_mass']:.6f}",
            ",".join(r["event_ids"]),
        )
        for r in cube.rows()
    ]
    _write_tsv(Path(path), ("time", "geo", "entity", "count", "score_mass", "event_ids"), rows)


def write_eval_tsv(rows: Sequence[EvalRow], path: Union[str, Path]) -> None:
    table = [
        (
            r.testbed,
            r.query,
            r.n_facts,
            r.n_predicted,
            f"{r.precision:.6f}",
            f"{r.recall:.6f}",
            f"{r.f1:.6f}",
            f"{r.alpha_ndcg:.6f}",
            f"{r.rouge_1:.6f}",
            f"{r.rouge_2:.6f}",
        )
        for r in rows
    ]
    _write_tsv(Path(path), EVAL_COLUMNS, table)


# ---------------------------------------------------------------------------
# Figures
# ---------------------------------------------------------------------------


def plot_event_timeline(events: EventSet, path: Union[str, Path]) -> None:
    """Horizontal interval bars, one per event, ordered by start date."""
    fig, ax = plt.subplots(figsize=(8, max(2.0, 0.5 * len(events) + 1)))
    ordered = sorted(events, key=lambda e: (e.time.begin, e.id))
    for row, e in enumerate(ordered):
        width = max((e.time.end - e.time.begin).days, 1)
        ax.barh(row, width, left=e.time.begin, height=0.6, alpha=0.8)
        label = ", ".join(e.entity_names) if e.entity_names else e.id
        ax.text(e.time.begin, row + 0.38, f"{label} ({e.geo_member})", fontsize=8)
    ax.set_yticks(range(len(ordered)))
    ax.set_yticklabels([e.id for e in ordered])
    ax.set_xlabel("time")
    ax.set_title("mined events")
    fig.autofmt_xdate()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_event_map(events: EventSet, path: Union[str, Path]) -> None:
    """Lat/lon scatter of event scopes on a plain world frame (no tiles)."""
    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.set_xlim(-180, 180)
    ax.set_ylim(-90, 90)
    ax.axhline(0, color="0.85", linewidth=0.8)
    ax.axvline(0, color="0.85", linewidth=0.8)
    ax.grid(True, color="0.92", linewidth=0.6)
    placed = 0
    for e in events:
        if e.geo_scope is None:
            continue
        lat, lon = e.geo_scope.center()
        ax.scatter(lon, lat, s=200 * e.score + 20, alpha=0.7)
        label = ", ".join(e.entity_names) if e.entity_names else e.id
        ax.annotate(label, (lon, lat), fontsize=7, xytext=(4, 4), textcoords="offset points")
        placed += 1
    ax.set_xlabel("longitude")
    ax.set_ylabel("latitude")
    ax.set_title(f"event locations ({placed} of {len(events)} events located)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_cube_heatmap(cube: EventCube, path: Union[str, Path]) -> None:
    """Counts pivoted on (time, geo); entity dimension summed out."""
    totals: dict[tuple[str, str], int] = {}
    for r in cube.rows():
        key = (r["time"], r["geo"])
        totals[key] = totals.get(key, 0) + r["count"]
    times = sorted({t for t, _ in totals})
    geos = sorted({g for _, g in totals})
    grid = [[totals.get((t, g), 0) for t in times] for g in geos]
    fig, ax = plt.subplots(figsize=(max(4, 0.8 * len(times) + 2), max(3, 0.5 * len(geos) + 1.5)))
    im = ax.imshow(grid, aspect="auto", cmap="viridis")
    ax.set_xticks(range(len(times)))
    ax.set_xticklabels(times, rotation=45, ha="right", fontsize=8)
    ax.set_yticks(range(len(geos)))
    ax.set_yticklabels(geos, fontsize=8)
    for i in range(len(geos)):
        for j in range(len(times)):
            if grid[i][j]:
                ax.text(j, i, str(grid[i][j]), ha="center", va="center", fontsize=8, color="w")
    fig.colorbar(im, ax=ax, label="count")
    ax.set_title(f"event cube ({cube.levels.time} x {cube.levels.geo})")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_eval_metrics(rows: Sequence[EvalRow], path: Union[str, Path]) -> None:
    """Grouped bars: one group per query, one bar per metric."""
    metrics = ("precision", "recall", "f1", "alpha_ndcg", "rouge_1", "rouge_2")
    fig, ax = plt.subplots(figsize=(max(6, 1.8 * len(rows) + 2), 4))
    width = 1.0 / (len(metrics) + 1)
    for m_i, metric in enumerate(metrics):
        xs = [r_i + m_i * width for r_i in range(len(rows))]
        ax.bar(xs, [getattr(r, metric) for r in rows], width=width, label=metric)
    ax.set_xticks([r_i + width * (len(metrics) - 1) / 2 for r_i in range(len(rows))])
    ax.set_xticklabels([r.query for r in rows], fontsize=8)
    ax.set_ylim(0, 1.05)
    ax.legend(fontsize=7, ncol=3)
    ax.set_title("evaluation metrics per query")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


# ---------------------------------------------------------------------------
# Bundles: delimited output + figures in one directory
# ---------------------------------------------------------------------------


def render_event_report(events: EventSet, outdir: Union[str, Path]) -> list[Path]:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "events.tsv", out / "timeline.png", out / "map.png"]
    write_events_tsv(events, paths[0])
    plot_event_timeline(events, paths[1])
    plot_event_map(events, paths[2])
    return paths


def render_cube_report(cube: EventCube, outdir: Union[str, Path]) -> list[Path]:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "cells.tsv", out / "heatmap.png"]
    write_cube_tsv(cube, paths[0])
    plot_cube_heatmap(cube, paths[1])
    return paths


def render_eval_report(rows: Sequence[EvalRow], outdir: Union[str, Path]) -> list[Path]:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "eval.tsv", out / "metrics.png"]
    write_eval_tsv(rows, paths[0])
    plot_eval_metrics(rows, paths[1])
    return paths

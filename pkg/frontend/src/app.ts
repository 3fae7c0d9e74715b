/** Browser wiring: binds the exploration store to the DOM panels. Served
 * statically (tsc output); configuration is limited to the service URL,
 * taken from ?service=... or defaulting to same-origin port 8080. */

import { ServiceClient } from "./api.js";
import { entityFacets, entityFilterSnippet, mapPins, timeHistogram } from "./facets.js";
import type { CubeOp } from "./pipeline.js";
import { boardRows, cubeControls, membersOf } from "./render/cubeBoard.js";
import { mapSvg } from "./render/map.js";
import { timelineMarks, timelineSvg } from "./render/timeline.js";
import { ExplorationStore } from "./state.js";
import type { Dim } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function serviceUrl(): string {
  const fromQuery = new URLSearchParams(location.search).get("service");
  return fromQuery ?? `${location.protocol}//${location.hostname}:8080`;
}

const store = new ExplorationStore(new ServiceClient(serviceUrl()));

function renderBanner(): void {
  const banner = el<HTMLDivElement>("banner");
  banner.textContent = store.banner ?? "";
  banner.style.display = store.banner ? "block" : "none";
}

function renderResults(): void {
  const list = el<HTMLUListElement>("results");
  list.innerHTML = "";
  for (const doc of store.results ?? []) {
    const item = document.createElement("li");
    item.textContent = `${doc.doc_id} (${doc.score.toFixed(3)})`;
    list.appendChild(item);
  }
}

function renderFacets(): void {
  const events = store.events ?? [];
  const facetList = el<HTMLUListElement>("entity-facets");
  facetList.innerHTML = "";
  for (const facet of entityFacets(events)) {
    const item = document.createElement("li");
    const link = document.createElement("a");
    link.href = "#";
    link.textContent = `${facet.value} (${facet.count})`;
    link.onclick = (ev) => {
      ev.preventDefault();
      void store.refineWithFilter(entityFilterSnippet(facet.value)).then(renderAll);
    };
    item.appendChild(link);
    facetList.appendChild(item);
  }
  const level = store.currentLevels().time;
  el<HTMLDivElement>("timeline").innerHTML = timelineSvg(timelineMarks(events, level));
  el<HTMLDivElement>("map").innerHTML = mapSvg(mapPins(events));
  el<HTMLDivElement>("histogram").textContent = timeHistogram(events, level)
    .map((b) => `${b.value}: ${b.count}`)
    .join("   ");
}

function renderCube(): void {
  const table = el<HTMLTableElement>("cube-table");
  table.innerHTML = "";
  if (!store.cube) return;
  const { header, rows } = boardRows(store.cube);
  const head = table.insertRow();
  for (const column of header) {
    const cell = document.createElement("th");
    cell.textContent = String(column);
    head.appendChild(cell);
  }
  for (const row of rows) {
    const tr = table.insertRow();
    for (const value of row.cells) {
      tr.insertCell().textContent = String(value);
    }
    tr.onclick = () => store.select({ kind: "cell", id: row.cells.join("|") });
  }
  el<HTMLDivElement>("op-stack").textContent = store.snapshot().opStack.join("  >  ") || "(base cube)";
  el<HTMLDivElement>("op-error").textContent = store.opError ?? "";
}

function renderControls(): void {
  const controls = cubeControls(store.currentLevels(), store.canUndo(), store.canRedo());
  for (const dim of ["time", "geo", "entity"] as Dim[]) {
    for (const direction of ["drillup", "drilldown"] as const) {
      const button = el<HTMLButtonElement>(`${direction}-${dim}`);
      const state = controls[direction][dim];
      button.disabled = !state.enabled;
      button.title = state.tooltip ?? "";
    }
  }
  el<HTMLButtonElement>("undo").disabled = !controls.undo.enabled;
  el<HTMLButtonElement>("redo").disabled = !controls.redo.enabled;
}

function renderAll(): void {
  renderBanner();
  renderResults();
  renderFacets();
  renderCube();
  renderControls();
  el<HTMLDivElement>("input-error").textContent = store.inputError ?? "";
}

async function applyAndRender(op: CubeOp): Promise<void> {
  await store.applyOp(op);
  renderAll();
}

export function bootstrap(): void {
  el<HTMLButtonElement>("go").onclick = async () => {
    const text = el<HTMLInputElement>("query").value;
    if (await store.runQuery(text)) await store.buildBaseCube();
    renderAll();
  };
  for (const dim of ["time", "geo", "entity"] as Dim[]) {
    el<HTMLButtonElement>(`drillup-${dim}`).onclick = () => void applyAndRender({ kind: "drillup", dim });
    el<HTMLButtonElement>(`drilldown-${dim}`).onclick = () =>
      void applyAndRender({ kind: "drilldown", dim });
  }
  el<HTMLButtonElement>("slice").onclick = () => {
    if (!store.cube) return;
    const dim = el<HTMLSelectElement>("slice-dim").value as Dim;
    const member = el<HTMLInputElement>("slice-member").value.trim();
    if (member) void applyAndRender({ kind: "slice", dim, member });
  };
  el<HTMLButtonElement>("dice").onclick = () => {
    if (!store.cube) return;
    const dim = el<HTMLSelectElement>("slice-dim").value as Dim;
    const members = el<HTMLInputElement>("slice-member").value
      .split(",")
      .map((m) => m.trim())
      .filter(Boolean);
    if (members.length) void applyAndRender({ kind: "dice", dim, members });
  };
  el<HTMLButtonElement>("roll").onclick = () => {
    const order = el<HTMLInputElement>("roll-order").value
      .split(",")
      .map((d) => d.trim()) as [Dim, Dim, Dim];
    void applyAndRender({ kind: "roll", order });
  };
  el<HTMLButtonElement>("undo").onclick = async () => {
    await store.undo();
    renderAll();
  };
  el<HTMLButtonElement>("redo").onclick = async () => {
    await store.redo();
    renderAll();
  };
  el<HTMLDivElement>("members-hint").onclick = () => {
    if (store.cube) {
      const dim = el<HTMLSelectElement>("slice-dim").value as Dim;
      el<HTMLDivElement>("members-hint").textContent = membersOf(store.cube, dim).join(", ");
    }
  };
  renderAll();
}

if (typeof document !== "undefined" && document.readyState !== "loading") {
  bootstrap();
} else if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", bootstrap);
}

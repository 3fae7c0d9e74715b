/** Cube op model and its serialization to the service's text pipeline
 * format (one op per line). The text form is the wire contract: replaying
 * an op stack means re-sending exactly this serialization. */

import type { Dim, LevelSpec } from "./types.js";

export type CubeOp =
  | { kind: "slice"; dim: Dim; member: string }
  | { kind: "dice"; dim: Dim; members: string[] }
  | { kind: "drillup"; dim: Dim }
  | { kind: "drilldown"; dim: Dim }
  | { kind: "roll"; order: [Dim, Dim, Dim] };

export const LEVELS: Record<Dim, string[]> = {
  time: ["day", "month", "year", "decade", "ALL"],
  geo: ["place", "country", "continent", "ALL"],
  entity: ["entity", "type", "supertype", "ALL"],
};

export function opToText(op: CubeOp): string {
  switch (op.kind) {
    case "slice":
      return `slice ${op.dim}=${op.member}`;
    case "dice":
      return `dice ${op.dim}=${op.members.join(",")}`;
    case "drillup":
      return `drillup ${op.dim}`;
    case "drilldown":
      return `drilldown ${op.dim}`;
    case "roll":
      return `roll ${op.order.join(",")}`;
  }
}

export function pipelineText(ops: readonly CubeOp[]): string {
  return ops.map(opToText).join("\n");
}

/** Levels after applying the stack's drill ops to the base spec; slices,
 * dices, and rolls leave levels untouched. Returns null when an op walks
 * off either end of a hierarchy (such a stack is invalid). */
export function levelsAfter(base: LevelSpec, ops: readonly CubeOp[]): LevelSpec | null {
  const current: LevelSpec = { ...base };
  for (const op of ops) {
    if (op.kind !== "drillup" && op.kind !== "drilldown") continue;
    const ladder = LEVELS[op.dim];
    const index = ladder.indexOf(current[op.dim]);
    const next = op.kind === "drillup" ? index + 1 : index - 1;
    if (next < 0 || next >= ladder.length) return null;
    current[op.dim] = ladder[next]!;
  }
  return current;
}

export function canDrillUp(levels: LevelSpec, dim: Dim): boolean {
  return levels[dim] !== "ALL";
}

export function canDrillDown(levels: LevelSpec, dim: Dim): boolean {
  return LEVELS[dim].indexOf(levels[dim]) > 0;
}

/** View model for the interactive cube board: the cell table in the cube's
 * presentation axis order and the availability of each op control. */

import { canDrillDown, canDrillUp } from "../pipeline.js";
import type { CubePayload, Dim, LevelSpec } from "../types.js";

export interface ControlState {
  enabled: boolean;
  tooltip: string | null;
}

export interface CubeControls {
  drillup: Record<Dim, ControlState>;
  drilldown: Record<Dim, ControlState>;
  undo: ControlState;
  redo: ControlState;
}

const DIMS: Dim[] = ["time", "geo", "entity"];

export function cubeControls(
  levels: LevelSpec,
  canUndoNow: boolean,
  canRedoNow: boolean,
): CubeControls {
  const drillup = {} as Record<Dim, ControlState>;
  const drilldown = {} as Record<Dim, ControlState>;
  for (const dim of DIMS) {
    drillup[dim] = canDrillUp(levels, dim)
      ? { enabled: true, tooltip: null }
      : { enabled: false, tooltip: `${dim} is already at the coarsest level` };
    drilldown[dim] = canDrillDown(levels, dim)
      ? { enabled: true, tooltip: null }
      : { enabled: false, tooltip: `${dim} is already at the finest level` };
  }
  return {
    drillup,
    drilldown,
    undo: canUndoNow
      ? { enabled: true, tooltip: null }
      : { enabled: false, tooltip: "nothing to undo" },
    redo: canRedoNow
      ? { enabled: true, tooltip: null }
      : { enabled: false, tooltip: "nothing to redo" },
  };
}

export interface BoardRow {
  cells: (string | number)[];
  eventIds: string[];
}

/** Rows in the cube's presentation axis order (Roll changes this order). */
export function boardRows(cube: CubePayload): { header: string[]; rows: BoardRow[] } {
  const header = [...cube.axis_order, "count", "score_mass"];
  const rows = cube.cells.map((cell) => ({
    cells: [
      ...cube.axis_order.map((dim) => cell[dim]),
      cell.count,
      Number(cell.score_mass.toFixed(6)),
    ],
    eventIds: cell.event_ids,
  }));
  return { header, rows };
}

/** Members present in the displayed cube for a dimension, for slice/dice
 * pickers. */
export function membersOf(cube: CubePayload, dim: Dim): string[] {
  return [...new Set(cube.cells.map((cell) => cell[dim]))].sort();
}

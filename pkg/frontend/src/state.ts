/** Exploration state: query, mined events, cube level spec, and an undoable
 * op stack. The store never computes analytics locally; the displayed cube
 * is always the raw body of a POST /cube/pipeline response, and replaying
 * the recorded op stack reproduces it byte for byte.
 *
 * Each panel allows one in-flight request; responses superseded by a newer
 * request (by per-panel sequence number) are discarded.
 */

import { ServiceClient, ServiceDownError, ServiceError } from "./api.js";
import type { CubeOp } from "./pipeline.js";
import { levelsAfter, opToText, pipelineText } from "./pipeline.js";
import type {
  CubePayload,
  EventRecord,
  LevelSpec,
  ScoredDocPayload,
} from "./types.js";

export interface MinerSettings {
  min_support: number;
  max_events?: number;
  [key: string]: unknown;
}

export interface StoreOptions {
  baseLevels?: LevelSpec;
  miner?: MinerSettings;
  topN?: number;
}

export interface Selection {
  kind: "event" | "cell";
  id: string;
}

const DEFAULT_LEVELS: LevelSpec = { time: "month", geo: "country", entity: "entity" };

export class ExplorationStore {
  queryText = "";
  results: ScoredDocPayload[] | null = null;
  events: EventRecord[] | null = null;
  eventsRaw: string | null = null;
  version: string | null = null;

  readonly baseLevels: LevelSpec;
  readonly miner: MinerSettings;
  readonly topN: number;

  opStack: CubeOp[] = [];
  private redoStack: CubeOp[] = [];
  cube: CubePayload | null = null;
  cubeRaw: string | null = null;

  selection: Selection | null = null;
  /** Inline op error (op rejected by the service); cleared on next success. */
  opError: string | null = null;
  /** Input validation message for the query box. */
  inputError: string | null = null;
  /** Service-down banner text; null when healthy. */
  banner: string | null = null;

  private searchSeq = 0;
  private mineSeq = 0;
  private cubeSeq = 0;

  constructor(
    private readonly client: ServiceClient,
    options: StoreOptions = {},
  ) {
    this.baseLevels = options.baseLevels ?? { ...DEFAULT_LEVELS };
    this.miner = options.miner ?? { min_support: 1 };
    this.topN = options.topN ?? 10;
  }

  /** Current cube levels implied by the base spec plus the op stack. */
  currentLevels(): LevelSpec {
    return levelsAfter(this.baseLevels, this.opStack) ?? { ...this.baseLevels };
  }

  /** Issue search + mine for the query box content. An empty box is an
   * input validation error and sends nothing. */
  async runQuery(text: string): Promise<boolean> {
    if (!text.trim()) {
      this.inputError = "enter a query first";
      return false;
    }
    this.inputError = null;
    this.queryText = text.trim();
    const searchTicket = ++this.searchSeq;
    const mineTicket = ++this.mineSeq;
    try {
      const [search, mine] = await Promise.all([
        this.client.search(this.queryText, this.topN),
        this.client.mine({ query: this.queryText, params: this.miner, top_n: this.topN }),
      ]);
      if (searchTicket === this.searchSeq) {
        this.results = search.payload.results;
        this.version = search.payload.version;
      }
      if (mineTicket === this.mineSeq) {
        this.events = mine.payload.events;
        this.eventsRaw = mine.raw;
        this.opStack = [];
        this.redoStack = [];
        this.cube = null;
        this.cubeRaw = null;
      }
      this.banner = null;
      return searchTicket === this.searchSeq && mineTicket === this.mineSeq;
    } catch (err) {
      this.noteFailure(err);
      return false;
    }
  }

  /** Append a facet filter to the query and re-run. */
  async refineWithFilter(snippet: string): Promise<boolean> {
    return this.runQuery(`${this.queryText} ${snippet}`.trim());
  }

  /** POST the pipeline consisting of the current stack plus `op`. On
   * success the op is pushed; on rejection the state is unchanged and the
   * error names the op. */
  async applyOp(op: CubeOp): Promise<boolean> {
    const attempt = [...this.opStack, op];
    const ticket = ++this.cubeSeq;
    try {
      const response = await this.issuePipeline(attempt);
      if (ticket !== this.cubeSeq) return false; // superseded; discard
      this.opStack = attempt;
      this.redoStack = [];
      this.cube = response.payload.cube;
      this.cubeRaw = response.raw;
      this.opError = null;
      this.banner = null;
      return true;
    } catch (err) {
      if (err instanceof ServiceError) {
        this.opError = `${opToText(op)}: ${err.message}`;
        return false;
      }
      this.noteFailure(err);
      return false;
    }
  }

  /** Build the cube with an empty pipeline (used to show the base cube). */
  async buildBaseCube(): Promise<boolean> {
    const ticket = ++this.cubeSeq;
    try {
      const response = await this.issuePipeline([]);
      if (ticket !== this.cubeSeq) return false;
      this.opStack = [];
      this.redoStack = [];
      this.cube = response.payload.cube;
      this.cubeRaw = response.raw;
      this.opError = null;
      this.banner = null;
      return true;
    } catch (err) {
      this.noteFailure(err);
      return false;
    }
  }

  canUndo(): boolean {
    return this.opStack.length > 0;
  }

  canRedo(): boolean {
    return this.redoStack.length > 0;
  }

  /** Pop the op stack and re-issue the shortened pipeline. */
  async undo(): Promise<boolean> {
    if (!this.canUndo()) return false;
    const shorter = this.opStack.slice(0, -1);
    const popped = this.opStack[this.opStack.length - 1]!;
    const ticket = ++this.cubeSeq;
    try {
      const response = await this.issuePipeline(shorter);
      if (ticket !== this.cubeSeq) return false;
      this.opStack = shorter;
      this.redoStack = [...this.redoStack, popped];
      this.cube = response.payload.cube;
      this.cubeRaw = response.raw;
      this.opError = null;
      return true;
    } catch (err) {
      this.noteFailure(err);
      return false;
    }
  }

  async redo(): Promise<boolean> {
    if (!this.canRedo()) return false;
    const op = this.redoStack[this.redoStack.length - 1]!;
    const longer = [...this.opStack, op];
    const ticket = ++this.cubeSeq;
    try {
      const response = await this.issuePipeline(longer);
      if (ticket !== this.cubeSeq) return false;
      this.opStack = longer;
      this.redoStack = this.redoStack.slice(0, -1);
      this.cube = response.payload.cube;
      this.cubeRaw = response.raw;
      this.opError = null;
      return true;
    } catch (err) {
      this.noteFailure(err);
      return false;
    }
  }

  /** Re-issue a recorded op stack; returns the raw response body. The
   * invariant under test: replay(opStack) === cubeRaw, byte for byte. */
  async replay(ops: readonly CubeOp[] = this.opStack): Promise<string> {
    const response = await this.issuePipeline(ops);
    return response.raw;
  }

  select(selection: Selection | null): void {
    this.selection = selection;
  }

  /** A plain serializable snapshot of the exploration state. */
  snapshot() {
    return {
      queryText: this.queryText,
      opStack: this.opStack.map(opToText),
      levels: this.currentLevels(),
      cubeRaw: this.cubeRaw,
      selection: this.selection,
    };
  }

  private issuePipeline(ops: readonly CubeOp[]) {
    return this.client.cubePipeline({
      query: this.queryText || null,
      params: this.miner,
      top_n: this.topN,
      levels: this.baseLevels,
      pipeline: pipelineText(ops),
    });
  }

  private noteFailure(err: unknown): void {
    if (err instanceof ServiceDownError) {
      this.banner = `${err.message} — retry`;
    } else if (err instanceof ServiceError) {
      this.banner = `service error: ${err.message} — retry`;
    } else {
      throw err;
    }
  }
}

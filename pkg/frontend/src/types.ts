/** Payload shapes of the service API. These mirror the JSON the service
 * emits; the UI never derives analytics beyond reshaping these payloads. */

export type Dim = "time" | "geo" | "entity";

export type GeoPayload =
  | { lat: number; lon: number }
  | { min_lat: number; min_lon: number; max_lat: number; max_lon: number };

export interface TimePayload {
  begin: string;
  end: string;
}

export interface EventRecord {
  id: string;
  entities: number[];
  entity_names: string[];
  geo_member: string;
  geo: GeoPayload | null;
  time: TimePayload;
  terms: [string, number][];
  score: number;
  support: number;
  supporting_units: [string, number, number][];
}

export interface QueryEcho {
  keywords: string[];
  time: TimePayload | null;
  geo: GeoPayload | null;
  entities: number[];
}

export interface ScoredDocPayload {
  doc_id: string;
  score: number;
  components: { text: number; time: number; geo: number; entity: number };
}

export interface SearchResponse {
  version: string;
  query: QueryEcho;
  weights: { text: number; time: number; geo: number; entity: number };
  results: ScoredDocPayload[];
}

export interface MineResponse {
  version: string;
  query: QueryEcho | null;
  params: Record<string, unknown>;
  events: EventRecord[];
}

export interface LevelSpec {
  time: string;
  geo: string;
  entity: string;
}

export interface CellPayload {
  time: string;
  geo: string;
  entity: string;
  count: number;
  score_mass: number;
  event_ids: string[];
}

export interface CubePayload {
  levels: LevelSpec;
  axis_order: Dim[];
  filters: { dim: Dim; level: string; members: string[] }[];
  skipped_events: number;
  cells: CellPayload[];
  truncated?: boolean;
}

export interface CubeResponse {
  version: string;
  ops_applied: number;
  cube: CubePayload;
}

export interface HealthResponse {
  status: string;
  version: string;
}

export interface ApiErrorBody {
  error: { code: string; message: string; op_index?: number };
}

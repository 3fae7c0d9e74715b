/** Facet panels computed from service responses. Reshaping only: every
 * number here is a count over payload the service already returned. */

import type { EventRecord } from "./types.js";

export interface FacetCount {
  value: string;
  count: number;
}

export function entityFacets(events: readonly EventRecord[]): FacetCount[] {
  const counts = new Map<string, number>();
  for (const event of events) {
    for (const name of event.entity_names) {
      counts.set(name, (counts.get(name) ?? 0) + 1);
    }
  }
  return [...counts.entries()]
    .map(([value, count]) => ({ value, count }))
    .sort((a, b) => b.count - a.count || a.value.localeCompare(b.value));
}

/** Truncate an ISO day to a calendar bin at the given level. */
export function timeBin(isoDay: string, level: string): string {
  if (level === "day") return isoDay;
  if (level === "month") return isoDay.slice(0, 7);
  if (level === "year") return isoDay.slice(0, 4);
  if (level === "decade") {
    const year = Number(isoDay.slice(0, 4));
    return `${String(Math.floor(year / 10) * 10).padStart(4, "0")}s`;
  }
  return "ALL";
}

/** Histogram of event midpoints, binned to the cube's current time level. */
export function timeHistogram(events: readonly EventRecord[], level: string): FacetCount[] {
  const counts = new Map<string, number>();
  for (const event of events) {
    const mid = midpointDay(event.time.begin, event.time.end);
    const bin = timeBin(mid, level);
    counts.set(bin, (counts.get(bin) ?? 0) + 1);
  }
  return [...counts.entries()]
    .map(([value, count]) => ({ value, count }))
    .sort((a, b) => a.value.localeCompare(b.value));
}

export function midpointDay(begin: string, end: string): string {
  const b = Date.parse(`${begin}T00:00:00Z`);
  const e = Date.parse(`${end}T00:00:00Z`);
  const days = Math.round((e - b) / 86_400_000);
  const mid = new Date(b + Math.floor(days / 2) * 86_400_000);
  return mid.toISOString().slice(0, 10);
}

export interface MapPin {
  lat: number;
  lon: number;
  label: string;
  score: number;
}

export function mapPins(events: readonly EventRecord[]): MapPin[] {
  const pins: MapPin[] = [];
  for (const event of events) {
    if (!event.geo) continue;
    const center =
      "lat" in event.geo
        ? { lat: event.geo.lat, lon: event.geo.lon }
        : {
            lat: (event.geo.min_lat + event.geo.max_lat) / 2,
            lon: (event.geo.min_lon + event.geo.max_lon) / 2,
          };
    pins.push({
      lat: center.lat,
      lon: center.lon,
      label: event.entity_names.join(", ") || event.id,
      score: event.score,
    });
  }
  return pins;
}

/** The filter snippet appended to the query box when a facet is clicked. */
export function entityFilterSnippet(name: string): string {
  return `entity:{${name}}`;
}

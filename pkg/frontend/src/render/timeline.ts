/** Timeline marks and a dependency-free SVG rendering. Bins adapt to the
 * cube's current time level. */

import { timeBin, midpointDay } from "../facets.js";
import type { EventRecord } from "../types.js";

export interface TimelineMark {
  bin: string;
  count: number;
  eventIds: string[];
}

export function timelineMarks(events: readonly EventRecord[], level: string): TimelineMark[] {
  const bins = new Map<string, string[]>();
  for (const event of events) {
    const bin = timeBin(midpointDay(event.time.begin, event.time.end), level);
    const ids = bins.get(bin) ?? [];
    ids.push(event.id);
    bins.set(bin, ids);
  }
  return [...bins.entries()]
    .map(([bin, eventIds]) => ({ bin, count: eventIds.length, eventIds }))
    .sort((a, b) => a.bin.localeCompare(b.bin));
}

export function timelineSvg(marks: readonly TimelineMark[], width = 640, height = 120): string {
  if (marks.length === 0) {
    return `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}"></svg>`;
  }
  const maxCount = Math.max(...marks.map((m) => m.count));
  const slot = width / marks.length;
  const bars = marks
    .map((mark, i) => {
      const barHeight = (mark.count / maxCount) * (height - 30);
      const x = i * slot + slot * 0.15;
      const y = height - 20 - barHeight;
      return (
        `<rect x="${x.toFixed(1)}" y="${y.toFixed(1)}" width="${(slot * 0.7).toFixed(1)}"` +
        ` height="${barHeight.toFixed(1)}" fill="#4477aa"><title>${mark.bin}: ${mark.count}</title></rect>` +
        `<text x="${(i * slot + slot / 2).toFixed(1)}" y="${height - 6}" font-size="9"` +
        ` text-anchor="middle">${mark.bin}</text>`
      );
    })
    .join("");
  return `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}">${bars}</svg>`;
}

/** Plain lat/lon scatter over a static frame: equirectangular projection,
 * no external tile service, so the map works offline against fixtures. */

import type { MapPin } from "../facets.js";

export function project(
  lat: number,
  lon: number,
  width: number,
  height: number,
): { x: number; y: number } {
  return {
    x: ((lon + 180) / 360) * width,
    y: ((90 - lat) / 180) * height,
  };
}

export function mapSvg(pins: readonly MapPin[], width = 640, height = 320): string {
  const frame =
    `<rect x="0" y="0" width="${width}" height="${height}" fill="#f4f8fb" stroke="#99aabb"/>` +
    `<line x1="0" y1="${height / 2}" x2="${width}" y2="${height / 2}" stroke="#dde5ec"/>` +
    `<line x1="${width / 2}" y1="0" x2="${width / 2}" y2="${height}" stroke="#dde5ec"/>`;
  const dots = pins
    .map((pin) => {
      const { x, y } = project(pin.lat, pin.lon, width, height);
      const r = 3 + pin.score * 10;
      return (
        `<circle cx="${x.toFixed(1)}" cy="${y.toFixed(1)}" r="${r.toFixed(1)}"` +
        ` fill="#cc4455" fill-opacity="0.75"><title>${pin.label}</title></circle>`
      );
    })
    .join("");
  return `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}">${frame}${dots}</svg>`;
}

/** Value-to-color mapping for score heatmaps.
 *
 * Scores arrive already normalized to [0, 1] by the server, so the palette
 * domain is fixed rather than rescaled per layer: a uniform 0.5 layer renders
 * as a uniform mid-scale color, and 1.0 is always the maximal color.
 */

export type Rgb = [number, number, number];

// compact viridis approximation: anchor stops, linearly interpolated
const STOPS: { at: number; color: Rgb }[] = [
  { at: 0.0, color: [68, 1, 84] },
  { at: 0.25, color: [59, 82, 139] },
  { at: 0.5, color: [33, 145, 140] },
  { at: 0.75, color: [94, 201, 98] },
  { at: 1.0, color: [253, 231, 37] },
];

export function valueToColor(value: number): Rgb {
  if (!Number.isFinite(value)) {
    return [128, 128, 128];
  }
  const v = Math.min(1, Math.max(0, value));
  for (let i = 1; i < STOPS.length; i++) {
    const hi = STOPS[i]!;
    if (v <= hi.at) {
      const lo = STOPS[i - 1]!;
      const t = (v - lo.at) / (hi.at - lo.at);
      return [0, 1, 2].map((c) =>
        Math.round(lo.color[c]! + t * (hi.color[c]! - lo.color[c]!)),
      ) as Rgb;
    }
  }
  return STOPS[STOPS.length - 1]!.color;
}

/** Evenly spaced legend entries from 0 to 1, inclusive. */
export function legendStops(count: number): { value: number; color: Rgb }[] {
  if (count < 2) {
    throw new Error(`legend needs at least 2 stops, got ${count}`);
  }
  return Array.from({ length: count }, (_, i) => {
    const value = i / (count - 1);
    return { value, color: valueToColor(value) };
  });
}

export function cssColor([r, g, b]: Rgb): string {
  return `rgb(${r}, ${g}, ${b})`;
}

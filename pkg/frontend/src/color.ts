/** Colormaps.
 *
 * Edge weights map linearly onto hue 210deg (weak, blue) -> 0deg (strong,
 * red) at full saturation; weight 0 never renders (inactive edges are not
 * drawn). Heat-map cells use the same ramp with white for zero.
 */

export function weightColor(weight: number): string {
  const t = Math.max(0, Math.min(1, weight / 100));
  const hue = 210 * (1 - t);
  return `hsl(${hue.toFixed(0)}, 85%, 45%)`;
}

export function heatColor(weight: number): string {
  if (weight <= 0) return "#ffffff";
  const t = Math.max(0, Math.min(1, weight / 100));
  const hue = 210 * (1 - t);
  const light = 92 - 50 * t;
  return `hsl(${hue.toFixed(0)}, 80%, ${light.toFixed(0)}%)`;
}

export const STAGE_COLORS: Record<string, string> = {
  CIS: "#4c78a8",
  RR: "#f58518",
  PP: "#54a24b",
  SP: "#e45756",
};

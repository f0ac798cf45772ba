import type { RoundMetrics } from './types.js';

export type Series = {
  label: string;
  color: string;
  points: Array<{ x: number; y: number }>;
};

export function metricsToSeries(metrics: RoundMetrics[]): Series[] {
  const selected = metrics.map((m) => ({ x: m.round, y: m.num_selected }));
  const auc = metrics
    .filter((m) => m.batch_auc !== undefined)
    .map((m) => ({ x: m.round, y: m.batch_auc as number }));
  return [
    { label: 'selected / round', color: '#2e7d32', points: selected },
    { label: 'batch AUC', color: '#1565c0', points: auc },
  ];
}

/** Map data coordinates onto pixel space; exported for testing. */
export function scalePoint(
  p: { x: number; y: number },
  xRange: [number, number],
  yRange: [number, number],
  width: number,
  height: number,
  pad: number,
): { px: number; py: number } {
  const spanX = Math.max(xRange[1] - xRange[0], 1e-9);
  const spanY = Math.max(yRange[1] - yRange[0], 1e-9);
  const px = pad + ((p.x - xRange[0]) / spanX) * (width - 2 * pad);
  const py = height - pad - ((p.y - yRange[0]) / spanY) * (height - 2 * pad);
  return { px, py };
}

/** Render per-round series as a minimal inline SVG line chart. */
export function renderChart(series: Series[], width = 460, height = 180): string {
  const pad = 28;
  const all = series.flatMap((s) => s.points);
  if (all.length === 0) {
    return `<svg width="${width}" height="${height}" role="img"></svg>`;
  }
  const xs = all.map((p) => p.x);
  const ys = all.map((p) => p.y);
  const xRange: [number, number] = [Math.min(...xs, 1), Math.max(...xs, 2)];
  const yRange: [number, number] = [Math.min(...ys, 0), Math.max(...ys, 1)];

  const parts: string[] = [];
  for (const s of series) {
    if (s.points.length === 0) continue;
    const coords = s.points.map((p) => {
      const { px, py } = scalePoint(p, xRange, yRange, width, height, pad);
      return `${px.toFixed(1)},${py.toFixed(1)}`;
    });
    parts.push(
      `<polyline fill="none" stroke="${s.color}" stroke-width="2" points="${coords.join(' ')}"/>`,
    );
    for (const c of coords) {
      const [cx, cy] = c.split(',');
      parts.push(`<circle cx="${cx}" cy="${cy}" r="3" fill="${s.color}"/>`);
    }
  }
  const legend = series
    .map(
      (s, i) =>
        `<text x="${pad + i * 150}" y="14" fill="${s.color}" font-size="11">${s.label}</text>`,
    )
    .join('');
  return (
    `<svg width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" role="img">` +
    `<rect x="${pad}" y="${pad / 1.4}" width="${width - 2 * pad}" height="${height - pad - pad / 1.4}"` +
    ` fill="none" stroke="#ccc"/>` +
    legend +
    parts.join('') +
    `</svg>`
  );
}

import { describe, expect, it } from 'vitest';

import { metricsToSeries, renderChart, scalePoint } from '../src/chart.js';

describe('metricsToSeries', () => {
  it('keeps selections for every round but AUC only where defined', () => {
    const series = metricsToSeries([
      { round: 1, num_selected: 1 },
      { round: 2, num_selected: 5, batch_auc: 0.8 },
    ]);
    expect(series[0]!.points).toEqual([
      { x: 1, y: 1 },
      { x: 2, y: 5 },
    ]);
    expect(series[1]!.points).toEqual([{ x: 2, y: 0.8 }]);
  });
});

describe('scalePoint', () => {
  it('maps range endpoints to padded pixel corners', () => {
    const lo = scalePoint({ x: 1, y: 0 }, [1, 26], [0, 1], 460, 180, 28);
    const hi = scalePoint({ x: 26, y: 1 }, [1, 26], [0, 1], 460, 180, 28);
    expect(lo.px).toBeCloseTo(28);
    expect(lo.py).toBeCloseTo(152); // y grows downward
    expect(hi.px).toBeCloseTo(432);
    expect(hi.py).toBeCloseTo(28);
  });
});

describe('renderChart', () => {
  it('renders a polyline per populated series', () => {
    const svg = renderChart(
      metricsToSeries([
        { round: 1, num_selected: 1 },
        { round: 2, num_selected: 5, batch_auc: 0.8 },
        { round: 3, num_selected: 7, batch_auc: 0.9 },
      ]),
    );
    expect(svg).toContain('<svg');
    expect((svg.match(/<polyline/g) ?? []).length).toBe(2);
  });

  it('handles an empty history', () => {
    expect(renderChart(metricsToSeries([]))).toContain('<svg');
  });
});

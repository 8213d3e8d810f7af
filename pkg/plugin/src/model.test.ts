import { describe, expect, it } from 'vitest';
import { causalScore, emptyDataset, fit, predictCell, quantile } from './model';

describe('causalScore', () => {
  it('returns 0 without enough history', () => {
    expect(causalScore([5, 5, 5], 1, 1)).toBe(0);
    expect(causalScore([5, 5, 5], 0, 1)).toBe(0);
  });

  it('standardizes against strictly earlier history', () => {
    const series = [1, 1, 1, 1, 9, 0];
    // bin 5 with lag 1 observes index 4; history = [1,1,1,1], std 0
    expect(causalScore(series, 5, 1)).toBe(8);
  });

  it('is zero for flat history and flat current', () => {
    expect(causalScore([2, 2, 2, 2], 3, 1)).toBe(0);
  });

  it('uses population standard deviation', () => {
    const series = [0, 2, 0, 2, 4];
    // history [0,2,0,2]: mean 1, popstd 1; current 4 -> score 3
    expect(causalScore(series, 5, 1)).toBe(3);
  });
});

describe('quantile', () => {
  it('interpolates linearly', () => {
    expect(quantile([0, 10], 0.5)).toBe(5);
    expect(quantile([1, 2, 3, 4], 1)).toBe(4);
    expect(quantile([1, 2, 3, 4], 0)).toBe(1);
  });

  it('handles empty input', () => {
    expect(quantile([], 0.5)).toBe(Infinity);
  });
});

describe('fit/predict', () => {
  it('disables flagging without positive labels', () => {
    const data = emptyDataset(1, 1, 3, 12);
    data.incoming[0][8] = 50;
    const model = fit(data, 9);
    expect(model.threshold).toBe(Infinity);
    expect(predictCell(data, model, 0, 9)).toBe(false);
  });

  it('flags history-breaking spikes once calibrated', () => {
    const data = emptyDataset(1, 1, 2, 16);
    for (let b = 0; b < 16; b++) data.incoming[0][b] = 1;
    data.incoming[0][11] = 40; // spike observed by bin 12 verdicts
    data.labels.add('0:5');
    const model = fit(data, 11);
    expect(Number.isFinite(model.threshold)).toBe(true);
    expect(predictCell(data, model, 0, 12)).toBe(true);
    expect(predictCell(data, model, 1, 12)).toBe(false);
  });
});

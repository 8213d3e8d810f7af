/**
 * Causal z-score outlier model over per-node incoming event counts.
 *
 * The score of (node, bin) is how many population standard deviations
 * the node's incoming count at bin - lag sits above its own earlier
 * history. The decision threshold is calibrated on the training region:
 * it is the score quantile matching the training labels' positive rate,
 * so label-dense training data lowers the bar and label-free data
 * effectively disables flagging.
 */

export interface Dataset {
  z: number;
  lag: number;
  nodeCount: number;
  numBins: number;
  /** incoming event counts, [node][bin] */
  incoming: number[][];
  /** positive training labels as "node:bin" keys */
  labels: Set<string>;
}

export function emptyDataset(z: number, lag: number, nodeCount: number, numBins: number): Dataset {
  const incoming: number[][] = [];
  for (let v = 0; v < nodeCount; v++) {
    incoming.push(new Array<number>(numBins).fill(0));
  }
  return { z, lag, nodeCount, numBins, incoming, labels: new Set() };
}

function meanStd(values: number[]): { mean: number; std: number } {
  const n = values.length;
  let sum = 0;
  for (const v of values) sum += v;
  const mean = sum / n;
  let ss = 0;
  for (const v of values) ss += (v - mean) * (v - mean);
  return { mean, std: Math.sqrt(ss / n) };
}

/**
 * Score one cell from history strictly before the observation bin.
 * Returns 0 when there is not enough history to standardize.
 */
export function causalScore(series: number[], bin: number, lag: number): number {
  const obs = bin - lag;
  if (obs < 1) return 0;
  const history = series.slice(0, obs);
  const current = series[obs];
  const { mean, std } = meanStd(history);
  if (std === 0) {
    return current > mean ? current - mean : 0;
  }
  return (current - mean) / std;
}

/** Sorted-copy quantile with linear interpolation (q in [0, 1]). */
export function quantile(values: number[], q: number): number {
  if (values.length === 0) return Infinity;
  const sorted = [...values].sort((a, b) => a - b);
  const pos = q * (sorted.length - 1);
  const lo = Math.floor(pos);
  const hi = Math.ceil(pos);
  if (lo === hi) return sorted[lo];
  return sorted[lo] + (pos - lo) * (sorted[hi] - sorted[lo]);
}

export interface FittedModel {
  threshold: number;
  positiveRate: number;
}

/**
 * Calibrate the flagging threshold on training-region cells.
 *
 * Training cells are all (node, bin) with bin inside the labeler's
 * defined range and before the first requested test bin.
 */
export function fit(data: Dataset, firstTestBin: number): FittedModel {
  const definedLo = data.z + 1;
  const trainEnd = Math.min(firstTestBin, data.numBins - data.z - 1);
  const scores: number[] = [];
  let positives = 0;
  let cells = 0;
  for (let v = 0; v < data.nodeCount; v++) {
    for (let b = definedLo; b < trainEnd; b++) {
      scores.push(causalScore(data.incoming[v], b, data.lag));
      cells += 1;
      if (data.labels.has(`${v}:${b}`)) positives += 1;
    }
  }
  const rate = cells > 0 ? positives / cells : 0;
  if (scores.length === 0 || rate <= 0) {
    return { threshold: Infinity, positiveRate: rate };
  }
  const clamped = Math.min(rate, 0.5);
  return { threshold: quantile(scores, 1 - clamped), positiveRate: rate };
}

export function predictCell(
  data: Dataset,
  model: FittedModel,
  node: number,
  bin: number,
): boolean {
  return causalScore(data.incoming[node], bin, data.lag) > model.threshold;
}

#!/usr/bin/env node
/**
 * Reference detector plugin.
 *
 * Reads the harness protocol line by line from stdin, accumulates
 * per-node incoming counts and training labels, and on the predict
 * request emits one verdict per requested (node, bin) followed by
 * done. Malformed input produces an error record and a nonzero exit.
 */

import { createInterface } from 'readline';
import { Dataset, emptyDataset, fit, predictCell } from './model';
import { parseInbound, ProtocolError, renderVerdict } from './protocol';

function fail(message: string): never {
  process.stdout.write(JSON.stringify({ type: 'error', message }) + '\n');
  process.exit(1);
}

function main(): void {
  let data: Dataset | null = null;
  let answered = false;
  const out: string[] = [];

  const rl = createInterface({ input: process.stdin, terminal: false });
  rl.on('line', (line: string) => {
    const trimmed = line.trim();
    if (trimmed.length === 0) return;
    let msg;
    try {
      msg = parseInbound(trimmed);
    } catch (err) {
      fail(err instanceof ProtocolError ? err.message : String(err));
    }
    switch (msg.type) {
      case 'init':
        data = emptyDataset(msg.z, msg.lag, msg.node_count, msg.num_bins);
        break;
      case 'event': {
        if (data === null) fail('event before init');
        const d = data as Dataset;
        if (msg.bin < 0 || msg.bin >= d.numBins) fail(`event bin ${msg.bin} out of range`);
        if (msg.target < 0 || msg.target >= d.nodeCount) {
          fail(`event target ${msg.target} out of range`);
        }
        d.incoming[msg.target][msg.bin] += msg.count;
        break;
      }
      case 'label': {
        if (data === null) fail('label before init');
        (data as Dataset).labels.add(`${msg.node}:${msg.bin}`);
        break;
      }
      case 'predict': {
        if (data === null) fail('predict before init');
        if (answered) fail('duplicate predict request');
        answered = true;
        const d = data as Dataset;
        if (d.numBins > 0 && msg.bins.length > 0) {
          const model = fit(d, Math.min(...msg.bins));
          for (const b of msg.bins) {
            for (let v = 0; v < d.nodeCount; v++) {
              out.push(renderVerdict({ type: 'verdict', node: v, bin: b, anomalous: predictCell(d, model, v, b) }));
            }
          }
        }
        out.push(JSON.stringify({ type: 'done' }));
        process.stdout.write(out.join('\n') + '\n');
        break;
      }
    }
  });
  rl.on('close', () => {
    if (!answered) {
      // an empty exchange (no predict) is a harness bug; be explicit
      fail('input ended before predict request');
    }
    process.exit(0);
  });
}

main();

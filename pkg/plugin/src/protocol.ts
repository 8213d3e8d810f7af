/**
 * Message types for the harness plugin protocol.
 *
 * Line-delimited JSON over stdin/stdout. The harness sends init, then
 * one event per nonzero (bin, edge), then one label per positive
 * training cell, then a single predict request; the plugin answers with
 * one verdict per requested (node, bin) followed by done.
 */

export interface InitMessage {
  type: 'init';
  z: number;
  lag: number;
  node_count: number;
  num_bins: number;
}

export interface EventMessage {
  type: 'event';
  bin: number;
  source: number;
  target: number;
  count: number;
}

export interface LabelMessage {
  type: 'label';
  node: number;
  bin: number;
}

export interface PredictMessage {
  type: 'predict';
  bins: number[];
}

export type InboundMessage = InitMessage | EventMessage | LabelMessage | PredictMessage;

export interface VerdictMessage {
  type: 'verdict';
  node: number;
  bin: number;
  anomalous: boolean;
}

export class ProtocolError extends Error {}

function asInt(value: unknown, field: string): number {
  if (typeof value !== 'number' || !Number.isInteger(value)) {
    throw new ProtocolError(`field '${field}' must be an integer, got ${JSON.stringify(value)}`);
  }
  return value;
}

export function parseInbound(line: string): InboundMessage {
  let raw: unknown;
  try {
    raw = JSON.parse(line);
  } catch {
    throw new ProtocolError(`unparseable line: ${line}`);
  }
  if (typeof raw !== 'object' || raw === null) {
    throw new ProtocolError(`message must be an object: ${line}`);
  }
  const msg = raw as Record<string, unknown>;
  switch (msg.type) {
    case 'init':
      return {
        type: 'init',
        z: asInt(msg.z, 'z'),
        lag: asInt(msg.lag, 'lag'),
        node_count: asInt(msg.node_count, 'node_count'),
        num_bins: asInt(msg.num_bins, 'num_bins'),
      };
    case 'event':
      return {
        type: 'event',
        bin: asInt(msg.bin, 'bin'),
        source: asInt(msg.source, 'source'),
        target: asInt(msg.target, 'target'),
        count: asInt(msg.count, 'count'),
      };
    case 'label':
      return { type: 'label', node: asInt(msg.node, 'node'), bin: asInt(msg.bin, 'bin') };
    case 'predict': {
      if (!Array.isArray(msg.bins)) {
        throw new ProtocolError('predict.bins must be an array');
      }
      return { type: 'predict', bins: msg.bins.map((b, i) => asInt(b, `bins[${i}]`)) };
    }
    default:
      throw new ProtocolError(`unknown message type: ${JSON.stringify(msg.type)}`);
  }
}

export function renderVerdict(v: VerdictMessage): string {
  return JSON.stringify({ type: 'verdict', node: v.node, bin: v.bin, anomalous: v.anomalous });
}

import { execFileSync, spawnSync } from 'node:child_process';
import { readFileSync } from 'node:fs';
import { join } from 'node:path';
import { describe, expect, it } from 'vitest';

const DIST = join(__dirname, '..', 'dist', 'main.js');
const FIXTURES = join(__dirname, '..', 'fixtures');

function run(input: string) {
  return spawnSync('node', [DIST], { input, encoding: 'utf8', timeout: 60_000 });
}

describe('conformance fixture', () => {
  it('reproduces the frozen verdict stream byte-exactly', () => {
    const input = readFileSync(join(FIXTURES, 'conformance_input.jsonl'), 'utf8');
    const expected = readFileSync(join(FIXTURES, 'conformance_expected.jsonl'), 'utf8');
    const res = run(input);
    expect(res.status).toBe(0);
    expect(res.stdout).toBe(expected);
  });

  it('is deterministic across runs', () => {
    const input = readFileSync(join(FIXTURES, 'conformance_input.jsonl'), 'utf8');
    expect(run(input).stdout).toBe(run(input).stdout);
  });
});

describe('protocol behavior', () => {
  it('answers done with no verdicts for an empty instance', () => {
    const input = [
      '{"type":"init","z":1,"lag":1,"node_count":0,"num_bins":0}',
      '{"type":"predict","bins":[]}',
      '',
    ].join('\n');
    const res = run(input);
    expect(res.status).toBe(0);
    expect(res.stdout).toBe('{"type":"done"}\n');
  });

  it('covers every requested cell exactly once', () => {
    const lines = [
      '{"type":"init","z":1,"lag":1,"node_count":3,"num_bins":12}',
      '{"type":"event","bin":2,"source":0,"target":1,"count":2}',
      '{"type":"event","bin":5,"source":2,"target":1,"count":1}',
      '{"type":"label","node":1,"bin":3}',
      '{"type":"predict","bins":[9,10,11]}',
      '',
    ].join('\n');
    const res = run(lines);
    expect(res.status).toBe(0);
    const out = res.stdout.trim().split('\n').map((l) => JSON.parse(l));
    const done = out.pop();
    expect(done).toEqual({ type: 'done' });
    const seen = new Set(out.map((v) => `${v.node}:${v.bin}`));
    expect(out).toHaveLength(9);
    expect(seen.size).toBe(9);
    for (const b of [9, 10, 11]) {
      for (let v = 0; v < 3; v++) {
        expect(seen.has(`${v}:${b}`)).toBe(true);
      }
    }
  });

  it('reports malformed input and exits nonzero', () => {
    const res = run('{"type":"init","z":1}\n');
    expect(res.status).not.toBe(0);
    const record = JSON.parse(res.stdout.trim().split('\n')[0]);
    expect(record.type).toBe('error');
    expect(record.message).toContain('lag');
  });

  it('rejects events before init', () => {
    const res = run('{"type":"event","bin":0,"source":0,"target":1,"count":1}\n');
    expect(res.status).not.toBe(0);
    expect(res.stdout).toContain('before init');
  });

  it('fails loudly when input ends without predict', () => {
    const res = run('{"type":"init","z":1,"lag":1,"node_count":2,"num_bins":5}\n');
    expect(res.status).not.toBe(0);
    expect(res.stdout).toContain('before predict');
  });
});

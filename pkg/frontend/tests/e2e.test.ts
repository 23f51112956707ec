/**
 * End-to-end: a scripted session against the live Python service labels a
 * 40-item deck through the same client/flow modules the browser uses, then
 * checks that the results payload matches a direct command-line analysis of
 * the session's label log, value for value.
 */
import { execFileSync, spawn, ChildProcess } from 'node:child_process';
import { mkdtempSync, readdirSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join, dirname } from 'node:path';
import { fileURLToPath } from 'node:url';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { StudyClient } from '../src/api.js';
import { LabelFlow } from '../src/flow.js';
import { barLayout } from '../src/geometry.js';
import { HistogramPayload } from '../src/types.js';

const PORT = 18000 + (process.pid % 2000);
const BASE = `http://127.0.0.1:${PORT}`;
const FRONTEND_DIR = join(dirname(fileURLToPath(import.meta.url)), '..');

let service: ChildProcess;
let dataDir: string;

function stableStringify(value: unknown): string {
  if (Array.isArray(value)) {
    return `[${value.map(stableStringify).join(',')}]`;
  }
  if (value !== null && typeof value === 'object') {
    const entries = Object.entries(value as Record<string, unknown>)
      .sort(([a], [b]) => (a < b ? -1 : 1))
      .map(([k, v]) => `${JSON.stringify(k)}:${stableStringify(v)}`);
    return `{${entries.join(',')}}`;
  }
  return JSON.stringify(value);
}

async function waitForService(timeoutMs = 30_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    try {
      const ping = await fetch(`${BASE}/sessions/none/next`);
      if (ping.status === 404) return; // service is answering
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) throw new Error('service did not come up');
    await new Promise((r) => setTimeout(r, 200));
  }
}

beforeAll(async () => {
  dataDir = mkdtempSync(join(tmpdir(), 'rankhist-e2e-'));
  service = spawn(
    'python3',
    [
      '-m', 'rankhist', 'study', 'serve',
      '--data-dir', dataDir,
      '--port', String(PORT),
      '--ui-dir', join(FRONTEND_DIR, 'dist'),
    ],
    { stdio: 'ignore' },
  );
  await waitForService();
}, 40_000);

afterAll(() => {
  service?.kill();
});

describe('labeling a live 40-item deck', () => {
  it('completes the flow and matches a direct analysis of the label log', async () => {
    const client = new StudyClient(BASE);
    const flow = new LabelFlow(client);
    const seen: HistogramPayload[] = [];

    await flow.start({ per_category: 1, shuffle_seed: 7 });
    expect(flow.state.total).toBe(40);

    while (flow.state.phase === 'labeling' && flow.state.current) {
      const payload = flow.state.current;
      seen.push(payload);

      // blinding: the served payload carries nothing but the bare histogram
      expect(Object.keys(payload).sort()).toEqual(
        ['heights', 'histogram_id', 'k', 'progress', 'total'],
      );

      // rendered bar heights track the served heights within a pixel
      const layout = barLayout(payload.heights);
      payload.heights.forEach((h, i) => {
        expect(Math.abs(layout.bars[i].height - h * layout.unitScale)).toBeLessThan(1);
      });

      // a deterministic "inspector": accept when mean |h - 1| stays small
      const meanDeviation =
        payload.heights.reduce((acc, h) => acc + Math.abs(h - 1), 0) / payload.k;
      await flow.submit(meanDeviation <= 0.25 ? 'accept' : 'reject');
    }

    expect(flow.state.phase).toBe('done');
    expect(seen).toHaveLength(40);
    const results = flow.state.results!;
    expect(results.n_labels).toBe(40);

    // the same analysis, straight from the label log on disk
    const sessionDir = join(dataDir, 'sessions', flow.state.sessionId!);
    const reportJson = execFileSync(
      'python3',
      [
        '-m', 'rankhist', 'study', 'analyze',
        '--deck', join(sessionDir, 'deck.json'),
        '--labels', join(sessionDir, 'labels.jsonl'),
      ],
      { encoding: 'utf-8' },
    );
    const report = JSON.parse(reportJson);

    expect(stableStringify(results.thresholds)).toBe(stableStringify(report.thresholds));
    expect(stableStringify(results.mcr_curves)).toBe(stableStringify(report.mcr_curves));
    expect(results.bin_decision_correlation).toBe(report.bin_decision_correlation);

    // personal optimal-k lookup round-trips through the same session
    const withK = await flow.fetchOptimalK(0.1, 60, 4000);
    expect(Object.keys(withK.optimal_k!).sort()).toEqual(['kl', 'l1', 'l2']);
    for (const table of Object.values(withK.optimal_k!)) {
      expect(table.k_opt).toBeGreaterThanOrEqual(2);
      expect(table.k_opt).toBeLessThanOrEqual(12);
    }
  }, 120_000);

  it('serves the UI bundle at the root', async () => {
    const page = await fetch(`${BASE}/`);
    expect(page.status).toBe(200);
    const html = await page.text();
    expect(html).toContain('Does this histogram look uniform?');
    const js = await fetch(`${BASE}/main.js`);
    expect(js.status).toBe(200);
  });

  it('resumes a refreshed session at the server cursor', async () => {
    const client = new StudyClient(BASE);
    const first = new LabelFlow(client);
    await first.start({ per_category: 1, shuffle_seed: 8 });
    const sessionId = first.state.sessionId!;
    await first.submit('accept');
    await first.submit('reject');
    const itemBefore = first.state.current?.histogram_id;

    // "refresh": a brand-new flow adopting the same session id
    const second = new LabelFlow(client);
    await second.start(undefined, sessionId);
    expect(second.state.progress).toBe(2);
    expect(second.state.current?.histogram_id).toBe(itemBefore);
  }, 60_000);

  it('keeps duplicate submissions single', async () => {
    const client = new StudyClient(BASE);
    const flow = new LabelFlow(client);
    await flow.start({ per_category: 1, shuffle_seed: 9 });
    const id = flow.state.current!.histogram_id;
    await client.submitLabel(flow.state.sessionId!, id, 'accept');
    const ack = await client.submitLabel(flow.state.sessionId!, id, 'accept');
    expect(ack.progress).toBe(1);
    const files = readdirSync(join(dataDir, 'sessions', flow.state.sessionId!));
    expect(files).toContain('labels.jsonl');
  }, 60_000);
});

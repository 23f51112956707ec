import { describe, expect, it } from 'vitest';

import { ApiError, ConflictError, StudyApi } from '../src/api.js';
import { LabelFlow } from '../src/flow.js';
import {
  DeckSpec,
  LabelAck,
  NextResponse,
  ResultsPayload,
  SessionInfo,
  Verdict,
} from '../src/types.js';

interface FakeOptions {
  failSubmissions?: number; // network errors before a submit succeeds
  conflictOnce?: boolean; // first submit conflicts (server already has it)
}

/** In-memory stand-in for the service with the same cursor semantics. */
class FakeApi implements StudyApi {
  labels: Array<{ id: string; verdict: Verdict }> = [];
  submitCalls = 0;
  private failuresLeft: number;
  private conflictPending: boolean;

  constructor(
    private readonly deck: Array<{ id: string; heights: number[] }>,
    options: FakeOptions = {},
  ) {
    this.failuresLeft = options.failSubmissions ?? 0;
    this.conflictPending = options.conflictOnce ?? false;
  }

  async createSession(_spec?: DeckSpec): Promise<SessionInfo> {
    return { session_id: 'fake', total: this.deck.length };
  }

  async next(_sessionId: string): Promise<NextResponse> {
    const cursor = this.labels.length;
    if (cursor >= this.deck.length) {
      return { done: true, progress: cursor, total: this.deck.length };
    }
    const item = this.deck[cursor];
    return {
      histogram_id: item.id,
      k: item.heights.length,
      heights: item.heights,
      progress: cursor,
      total: this.deck.length,
    };
  }

  async submitLabel(_s: string, histogramId: string, verdict: Verdict): Promise<LabelAck> {
    this.submitCalls += 1;
    if (this.conflictPending) {
      this.conflictPending = false;
      this.labels.push({ id: histogramId, verdict }); // server got it after all
      throw new ConflictError(409, 'already recorded');
    }
    if (this.failuresLeft > 0) {
      this.failuresLeft -= 1;
      throw new TypeError('network down'); // what fetch throws offline
    }
    const last = this.labels[this.labels.length - 1];
    if (last && last.id === histogramId && last.verdict === verdict) {
      return { progress: this.labels.length, total: this.deck.length };
    }
    const expected = this.deck[this.labels.length];
    if (!expected || expected.id !== histogramId) {
      throw new ConflictError(409, 'out of order');
    }
    this.labels.push({ id: histogramId, verdict });
    return { progress: this.labels.length, total: this.deck.length };
  }

  async results(_sessionId: string): Promise<ResultsPayload> {
    return {
      session_id: 'fake',
      progress: this.labels.length,
      total: this.deck.length,
      n_labels: this.labels.length,
      mcr_curves: {},
      thresholds: {},
      acceptance_rate_curves: {},
      bin_decision_correlation: null,
      correlation_error: null,
    };
  }
}

const DECK = [
  { id: 'h1', heights: [1.2, 0.8] },
  { id: 'h2', heights: [0.5, 1.5] },
  { id: 'h3', heights: [1.0, 1.0] },
];

describe('LabelFlow', () => {
  it('walks a deck end to end and lands on results', async () => {
    const api = new FakeApi(DECK);
    const flow = new LabelFlow(api);
    await flow.start();
    expect(flow.state.phase).toBe('labeling');
    expect(flow.state.current?.histogram_id).toBe('h1');

    await flow.submit('accept');
    await flow.submit('reject');
    await flow.submit('accept');

    expect(flow.state.phase).toBe('done');
    expect(flow.state.results?.n_labels).toBe(3);
    expect(api.labels.map((l) => l.verdict)).toEqual(['accept', 'reject', 'accept']);
  });

  it('resumes an existing session at the server cursor', async () => {
    const api = new FakeApi(DECK);
    api.labels.push({ id: 'h1', verdict: 'accept' });
    const flow = new LabelFlow(api);
    await flow.start(undefined, 'fake');
    expect(flow.state.current?.histogram_id).toBe('h2');
    expect(flow.state.progress).toBe(1);
  });

  it('retries network failures and relies on idempotent resend', async () => {
    const api = new FakeApi(DECK, { failSubmissions: 2 });
    const flow = new LabelFlow(api, 3, 1);
    await flow.start();
    await flow.submit('accept');
    expect(flow.state.phase).toBe('labeling');
    expect(flow.state.current?.histogram_id).toBe('h2');
    expect(api.submitCalls).toBe(3); // two failures, one success
    expect(api.labels).toHaveLength(1);
  });

  it('gives up after exhausting retries', async () => {
    const api = new FakeApi(DECK, { failSubmissions: 99 });
    const flow = new LabelFlow(api, 2, 1);
    await flow.start();
    await flow.submit('accept');
    expect(flow.state.phase).toBe('error');
  });

  it('resyncs on conflict instead of failing', async () => {
    const api = new FakeApi(DECK, { conflictOnce: true });
    const flow = new LabelFlow(api, 2, 1);
    await flow.start();
    await flow.submit('accept');
    // the server had recorded the label; flow moved on to the next item
    expect(flow.state.phase).toBe('labeling');
    expect(flow.state.current?.histogram_id).toBe('h2');
  });

  it('ignores double submissions while one is in flight', async () => {
    const api = new FakeApi(DECK);
    const flow = new LabelFlow(api);
    await flow.start();
    await Promise.all([flow.submit('accept'), flow.submit('accept')]);
    expect(api.labels).toHaveLength(1);
    expect(flow.state.current?.histogram_id).toBe('h2');
  });

  it('propagates hard API errors to the error state', async () => {
    const api = new FakeApi(DECK);
    api.next = async () => {
      throw new ApiError(500, 'boom');
    };
    const flow = new LabelFlow(api);
    await flow.start();
    expect(flow.state.phase).toBe('error');
    expect(flow.state.error).toContain('boom');
  });
});

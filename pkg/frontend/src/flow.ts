import { ConflictError, StudyApi } from './api.js';
import {
  DeckSpec,
  HistogramPayload,
  NextResponse,
  ResultsPayload,
  Verdict,
  isDone,
} from './types.js';

export type Phase = 'idle' | 'labeling' | 'done' | 'error';

export interface FlowState {
  phase: Phase;
  sessionId: string | null;
  total: number;
  progress: number;
  current: HistogramPayload | null;
  results: ResultsPayload | null;
  error: string | null;
}

const INITIAL: FlowState = {
  phase: 'idle',
  sessionId: null,
  total: 0,
  progress: 0,
  current: null,
  results: null,
  error: null,
};

/**
 * Server-authoritative labeling session: one histogram at a time, verdicts
 * submitted with retry, conflicts resolved by resyncing against the
 * server's cursor. All state transitions flow through `apply`.
 */
export class LabelFlow {
  state: FlowState = { ...INITIAL };
  private listeners: Array<(s: FlowState) => void> = [];
  private submitting = false;

  constructor(
    private readonly client: StudyApi,
    private readonly retries = 3,
    private readonly retryDelayMs = 300,
  ) {}

  onChange(listener: (s: FlowState) => void): void {
    this.listeners.push(listener);
  }

  private apply(patch: Partial<FlowState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) listener(this.state);
  }

  /** Create a fresh session (or adopt an existing one) and load its cursor. */
  async start(spec?: DeckSpec, existingSessionId?: string): Promise<void> {
    try {
      let sessionId = existingSessionId ?? null;
      let total = this.state.total;
      if (!sessionId) {
        const info = await this.client.createSession(spec);
        sessionId = info.session_id;
        total = info.total;
      }
      this.apply({ ...INITIAL, sessionId, total });
      await this.advance();
    } catch (err) {
      this.apply({ phase: 'error', error: String(err) });
    }
  }

  /** Pull the server cursor; flips to the results view when the deck is done. */
  async advance(): Promise<void> {
    const sessionId = this.requireSession();
    const next: NextResponse = await this.client.next(sessionId);
    if (isDone(next)) {
      const results = await this.client.results(sessionId);
      this.apply({ phase: 'done', progress: next.progress, total: next.total, current: null, results });
      return;
    }
    this.apply({
      phase: 'labeling',
      progress: next.progress,
      total: next.total,
      current: next,
    });
  }

  /**
   * Submit the verdict for the current item. Network failures are retried
   * (the server treats resends idempotently); a conflict means the server
   * is ahead, so the flow resyncs instead of failing.
   */
  async submit(verdict: Verdict): Promise<void> {
    if (this.submitting || this.state.phase !== 'labeling' || !this.state.current) return;
    this.submitting = true;
    const sessionId = this.requireSession();
    const { histogram_id } = this.state.current;
    try {
      let attempt = 0;
      for (;;) {
        try {
          await this.client.submitLabel(sessionId, histogram_id, verdict);
          break;
        } catch (err) {
          if (err instanceof ConflictError) break; // server already past this item
          attempt += 1;
          if (attempt > this.retries) throw err;
          await sleep(this.retryDelayMs * attempt);
        }
      }
      await this.advance();
    } catch (err) {
      this.apply({ phase: 'error', error: String(err) });
    } finally {
      this.submitting = false;
    }
  }

  async fetchOptimalK(alpha: number, n: number, reps?: number): Promise<ResultsPayload> {
    const sessionId = this.requireSession();
    const results = await this.client.results(sessionId, { alpha, n, reps });
    this.apply({ results });
    return results;
  }

  private requireSession(): string {
    if (!this.state.sessionId) throw new Error('no active session');
    return this.state.sessionId;
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

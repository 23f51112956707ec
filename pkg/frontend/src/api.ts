import {
  DeckSpec,
  LabelAck,
  NextResponse,
  ResultsPayload,
  SessionInfo,
  Verdict,
} from './types.js';

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

export class ConflictError extends ApiError {}

type FetchLike = typeof fetch;

/** What the labeling flow needs from the backend. */
export interface StudyApi {
  createSession(spec?: DeckSpec): Promise<SessionInfo>;
  next(sessionId: string): Promise<NextResponse>;
  submitLabel(sessionId: string, histogramId: string, verdict: Verdict): Promise<LabelAck>;
  results(
    sessionId: string,
    opts?: { alpha: number; n: number; reps?: number },
  ): Promise<ResultsPayload>;
}

/** Thin JSON client for the labeling service. */
export class StudyClient implements StudyApi {
  constructor(
    private readonly baseUrl: string = '',
    private readonly fetchFn: FetchLike = fetch,
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      headers: { 'content-type': 'application/json' },
      ...init,
    });
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        if (body && typeof body.detail === 'string') detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      if (response.status === 409) throw new ConflictError(409, detail);
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  createSession(spec?: DeckSpec): Promise<SessionInfo> {
    const body = spec ? { deck_spec: spec } : {};
    return this.request<SessionInfo>('/sessions', {
      method: 'POST',
      body: JSON.stringify(body),
    });
  }

  next(sessionId: string): Promise<NextResponse> {
    return this.request<NextResponse>(`/sessions/${sessionId}/next`);
  }

  submitLabel(sessionId: string, histogramId: string, verdict: Verdict): Promise<LabelAck> {
    return this.request<LabelAck>(`/sessions/${sessionId}/labels`, {
      method: 'POST',
      body: JSON.stringify({ histogram_id: histogramId, verdict }),
    });
  }

  results(
    sessionId: string,
    opts?: { alpha: number; n: number; reps?: number },
  ): Promise<ResultsPayload> {
    let query = '';
    if (opts) {
      const params = new URLSearchParams({ alpha: String(opts.alpha), n: String(opts.n) });
      if (opts.reps !== undefined) params.set('reps', String(opts.reps));
      query = `?${params.toString()}`;
    }
    return this.request<ResultsPayload>(`/sessions/${sessionId}/results${query}`);
  }
}

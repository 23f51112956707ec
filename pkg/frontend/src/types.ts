export type Verdict = 'accept' | 'reject';

export interface HistogramPayload {
  histogram_id: string;
  k: number;
  heights: number[];
  progress: number;
  total: number;
}

export interface DonePayload {
  done: true;
  progress: number;
  total: number;
}

export type NextResponse = HistogramPayload | DonePayload;

export function isDone(payload: NextResponse): payload is DonePayload {
  return (payload as DonePayload).done === true;
}

export interface SessionInfo {
  session_id: string;
  total: number;
}

export interface LabelAck {
  progress: number;
  total: number;
}

export interface ThresholdEstimate {
  kind: string;
  c_minus: number;
  c_acc: number;
  c_plus: number;
  mcr_min: number;
  delta: number;
  minus_crossed: boolean;
  plus_crossed: boolean;
}

export interface McrCurve {
  kind: string;
  c: number[];
  mcr: number[];
}

export interface OptimalKRow {
  k: number;
  c: number;
  gap: number;
}

export interface OptimalKTable {
  kind: string;
  alpha: number;
  n: number;
  c_target: number;
  replications: number;
  k_opt: number;
  per_k: OptimalKRow[];
}

export interface ResultsPayload {
  session_id: string;
  progress: number;
  total: number;
  n_labels: number;
  mcr_curves: Record<string, McrCurve>;
  thresholds: Record<string, ThresholdEstimate>;
  acceptance_rate_curves: Record<string, unknown>;
  bin_decision_correlation: number | null;
  correlation_error: string | null;
  optimal_k?: Record<string, OptimalKTable>;
}

export interface DeckSpec {
  per_category?: number;
  shuffle_seed?: number;
  bin_counts?: number[];
  target_distances?: number[];
}

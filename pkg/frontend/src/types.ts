// Shapes mirror the gateway's JSON payloads exactly; the console never
// invents values that are not present in these objects.

export interface AnswerPayload {
  text: string;
  citations: [number, string][];
  safety_notes: string[];
  best_effort: boolean;
  failure_reasons: string[];
}

export interface StepPayload {
  index: number;
  tool: string;
  inputs: Record<string, string>;
  outputs: Record<string, string>;
  status: string;
  attempts: number;
  safety: SafetyVerdictPayload[];
  error: string;
}

export interface SafetyVerdictPayload {
  score: number;
  flagged: boolean;
  matched: string | null;
  threshold: number;
  kind: string;
}

export interface TracePayload {
  chain: string[];
  query: string;
  overall: string;
  steps: StepPayload[];
}

export interface QueryResponse {
  session: string;
  turn: number;
  question: string;
  answer: AnswerPayload;
  plan: string[];
  trace: TracePayload | null;
  rounds: number;
  timings: { total_s: number };
}

export interface TraceEvent {
  session: string;
  step: number;
  phase: string; // planned | started | retrying | ok | failed | blocked
  detail: Record<string, unknown>;
  query_index?: number;
}

export interface NeighborsResponse {
  tool: string;
  d: number;
  direction: string;
  neighbors: string[];
}

export interface Turn {
  query: string;
  answer: AnswerPayload;
}

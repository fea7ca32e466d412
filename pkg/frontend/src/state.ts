import type { QueryResponse, TraceEvent, TracePayload, Turn } from "./types.js";

export interface KgView {
  tool: string;
  d: number;
  neighbors: string[] | null; // null marks a not-found lookup
}

/**
 * Console state: a pure projection of gateway payloads. Events move step
 * chips through their phases; the final trace from the query response is
 * authoritative and reconciliation snaps chips to it.
 */
export class SessionView {
  sessionId = "";
  turns: Turn[] = [];
  plan: string[] = [];
  stepStatus = new Map<number, string>();
  stepPhases = new Map<number, string[]>();
  safetyNotes: string[] = [];
  banner = "";
  busy = false;
  kg: KgView | null = null;

  startSession(id: string): void {
    this.sessionId = id;
    this.turns = [];
    this.plan = [];
    this.stepStatus.clear();
    this.stepPhases.clear();
    this.safetyNotes = [];
    this.banner = "";
  }

  setError(message: string): void {
    this.banner = message;
    this.busy = false;
  }

  beginQuery(): void {
    this.busy = true;
    this.banner = "";
    this.plan = [];
    this.stepStatus.clear();
    this.stepPhases.clear();
    this.safetyNotes = [];
  }

  applyEvent(event: TraceEvent): void {
    const phases = this.stepPhases.get(event.step) ?? [];
    phases.push(event.phase);
    this.stepPhases.set(event.step, phases);
    if (event.phase === "planned") {
      const tool = String(event.detail["tool"] ?? "");
      if (this.plan.length <= event.step) this.plan[event.step] = tool;
      this.stepStatus.set(event.step, "pending");
    } else if (event.phase === "started" || event.phase === "retrying") {
      this.stepStatus.set(event.step, "running");
    } else if (event.phase === "ok") {
      this.stepStatus.set(event.step, "ok");
    } else if (event.phase === "failed") {
      this.stepStatus.set(event.step, "failed");
    } else if (event.phase === "blocked") {
      this.stepStatus.set(event.step, "blocked_by_safety");
    }
  }

  /** The query response is authoritative: plan, chips and notes snap to it. */
  applyQueryResponse(resp: QueryResponse): void {
    this.busy = false;
    this.turns.push({ query: resp.question, answer: resp.answer });
    this.plan = [...resp.plan];
    this.safetyNotes = [...resp.answer.safety_notes];
    if (resp.trace) this.reconcile(resp.trace);
  }

  reconcile(trace: TracePayload): void {
    this.plan = [...trace.chain];
    this.stepStatus.clear();
    trace.steps.forEach((step) => this.stepStatus.set(step.index, step.status));
    for (let i = trace.steps.length; i < trace.chain.length; i += 1) {
      this.stepStatus.set(i, "skipped");
    }
  }

  statusOf(step: number): string {
    return this.stepStatus.get(step) ?? "pending";
  }

  chipStatuses(): string[] {
    return this.plan.map((_, i) => this.statusOf(i));
  }

  showNeighbors(tool: string, d: number, neighbors: string[] | null): void {
    this.kg = { tool, d, neighbors };
  }
}

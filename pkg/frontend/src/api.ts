import type { NeighborsResponse, QueryResponse, TraceEvent } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class GatewayError extends Error {
  status: number;
  constructor(message: string, status: number) {
    super(message);
    this.status = status;
  }
}

/** Thin typed client over the gateway routes; fetch is injectable for tests. */
export class GatewayClient {
  baseUrl: string;
  fetchFn: FetchLike;

  constructor(baseUrl = "", fetchFn: FetchLike = (u, i) => fetch(u, i)) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchFn = fetchFn;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let resp: Response;
    try {
      resp = await this.fetchFn(this.baseUrl + path, init);
    } catch (err) {
      throw new GatewayError(`gateway unreachable: ${String(err)}`, 0);
    }
    const body = await resp.text();
    if (!resp.ok) {
      let detail = body;
      try {
        detail = (JSON.parse(body) as { error?: string }).error ?? body;
      } catch {
        /* not json */
      }
      throw new GatewayError(detail || `HTTP ${resp.status}`, resp.status);
    }
    return JSON.parse(body) as T;
  }

  createSession(): Promise<{ id: string }> {
    return this.request("/v1/sessions", { method: "POST" });
  }

  submitQuery(sessionId: string, question: string): Promise<QueryResponse> {
    return this.request(`/v1/sessions/${sessionId}/queries`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ question }),
    });
  }

  neighbors(toolId: string, d: number, direction = "out"): Promise<NeighborsResponse> {
    const params = new URLSearchParams({ d: String(d), direction });
    return this.request(`/v1/kg/tools/${encodeURIComponent(toolId)}/neighbors?${params}`);
  }

  listTools(): Promise<{ id: string }[]> {
    return this.request("/v1/kg/tools");
  }

  /**
   * Consume the NDJSON event stream, reconnecting automatically on transport
   * failures. Resolves when the stream closes cleanly or retries run out;
   * callers reconcile with the final trace from the query response afterwards.
   */
  async streamEvents(
    sessionId: string,
    onEvent: (event: TraceEvent) => void,
    opts: { maxReconnects?: number; retryDelayMs?: number } = {},
  ): Promise<{ reconnects: number }> {
    const maxReconnects = opts.maxReconnects ?? 3;
    const retryDelayMs = opts.retryDelayMs ?? 250;
    let reconnects = 0;
    for (;;) {
      try {
        const resp = await this.fetchFn(`${this.baseUrl}/v1/sessions/${sessionId}/events`);
        if (!resp.ok || !resp.body) {
          throw new Error(`HTTP ${resp.status}`);
        }
        await readNdjson(resp.body, onEvent);
        return { reconnects };
      } catch {
        if (reconnects >= maxReconnects) {
          return { reconnects };
        }
        reconnects += 1;
        await new Promise((r) => setTimeout(r, retryDelayMs));
      }
    }
  }
}

async function readNdjson(
  body: ReadableStream<Uint8Array>,
  onEvent: (event: TraceEvent) => void,
): Promise<void> {
  const reader = body.getReader();
  const decoder = new TextDecoder();
  let buffer = "";
  for (;;) {
    const { value, done } = await reader.read();
    if (done) break;
    buffer += decoder.decode(value, { stream: true });
    let idx: number;
    while ((idx = buffer.indexOf("\n")) !== -1) {
      const line = buffer.slice(0, idx).trim();
      buffer = buffer.slice(idx + 1);
      if (line) onEvent(JSON.parse(line) as TraceEvent);
    }
  }
  const rest = buffer.trim();
  if (rest) onEvent(JSON.parse(rest) as TraceEvent);
}

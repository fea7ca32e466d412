// Recorded-payload gateway standing in for the real HTTP service in tests.
// Payload shapes and values mirror actual gateway responses.

import type { FetchLike } from "../src/api.js";
import type { QueryResponse, TraceEvent } from "../src/types.js";

export const HAPPY_QUESTION = "probe the pipeline";
export const BLOCKED_QUESTION = "predict the product of phenol + chlorine";
export const FOLLOWUP_QUESTION = "and a follow up";

const answer = (text: string, notes: string[] = [], bestEffort = false) => ({
  text,
  citations: [] as [number, string][],
  safety_notes: notes,
  best_effort: bestEffort,
  failure_reasons: bestEffort ? ["step 0 (reaction_predict) blocked_by_safety"] : [],
});

export const HAPPY_RESPONSE: QueryResponse = {
  session: "",
  turn: 0,
  question: HAPPY_QUESTION,
  answer: answer("probes completed"),
  plan: ["probe1", "probe2", "probe3"],
  trace: {
    chain: ["probe1", "probe2", "probe3"],
    query: HAPPY_QUESTION,
    overall: "completed",
    steps: [0, 1, 2].map((i) => ({
      index: i,
      tool: `probe${i + 1}`,
      inputs: { text: i === 0 ? "begin" : `probe${i}/text` },
      outputs: { text: `probe${i + 1}/text` },
      status: "ok",
      attempts: 1,
      safety: [],
      error: "",
    })),
  },
  rounds: 1,
  timings: { total_s: 0.01 },
};

export const HAPPY_EVENTS: TraceEvent[] = [
  ...[0, 1, 2].map((i) => ({
    session: "", step: i, phase: "planned", detail: { tool: `probe${i + 1}` },
  })),
  ...[0, 1, 2].flatMap((i) => [
    { session: "", step: i, phase: "started", detail: { tool: `probe${i + 1}` } },
    { session: "", step: i, phase: "ok", detail: { tool: `probe${i + 1}` } },
  ]),
];

const BLOCK_NOTE =
  "step 0 (reaction_predict): molecule similarity 1.0000 to safeguard entry " +
  "'mol_chlorophenol4' exceeds threshold 0.95";

export const BLOCKED_RESPONSE: QueryResponse = {
  session: "",
  turn: 0,
  question: BLOCKED_QUESTION,
  answer: answer(
    "The predicted product matches a hazardous safeguard entry.\n\nSAFETY WARNING:\n- " +
      BLOCK_NOTE,
    [BLOCK_NOTE],
    true,
  ),
  plan: ["reaction_predict", "smiles_to_selfies"],
  trace: {
    chain: ["reaction_predict", "smiles_to_selfies"],
    query: BLOCKED_QUESTION,
    overall: "aborted",
    steps: [
      {
        index: 0,
        tool: "reaction_predict",
        inputs: { text: "phenol + chlorine" },
        outputs: {},
        status: "blocked_by_safety",
        attempts: 1,
        safety: [
          { score: 1.0, flagged: true, matched: "mol_chlorophenol4", threshold: 0.95, kind: "molecule" },
        ],
        error: "output flagged by safety screening",
      },
    ],
  },
  rounds: 1,
  timings: { total_s: 0.01 },
};

export const BLOCKED_EVENTS: TraceEvent[] = [
  { session: "", step: 0, phase: "planned", detail: { tool: "reaction_predict" } },
  { session: "", step: 1, phase: "planned", detail: { tool: "smiles_to_selfies" } },
  { session: "", step: 0, phase: "started", detail: { tool: "reaction_predict" } },
  { session: "", step: 0, phase: "blocked", detail: { tool: "reaction_predict" } },
];

export const FOLLOWUP_RESPONSE: QueryResponse = {
  session: "",
  turn: 1,
  question: FOLLOWUP_QUESTION,
  answer: answer("follow up done"),
  plan: ["probe1"],
  trace: {
    chain: ["probe1"],
    query: FOLLOWUP_QUESTION,
    overall: "completed",
    steps: [
      {
        index: 0, tool: "probe1", inputs: { text: "begin" },
        outputs: { text: "probe1/text" }, status: "ok", attempts: 1, safety: [], error: "",
      },
    ],
  },
  rounds: 1,
  timings: { total_s: 0.01 },
};

export const NEIGHBOR_FIXTURES: Record<string, string[]> = {
  "F|1": ["A", "C"],
  "F|2": ["A", "B", "C", "D"],
  "F|0": [],
  "E|1": [],
};

export interface RecordedRequest {
  method: string;
  url: string;
  body: string;
}

export interface FixtureOptions {
  down?: boolean;
  failFirstEventStream?: boolean;
}

export function fixtureGateway(opts: FixtureOptions = {}): {
  fetchFn: FetchLike;
  requests: RecordedRequest[];
} {
  const requests: RecordedRequest[] = [];
  let sessionCounter = 0;
  let eventStreamAttempts = 0;
  const sessions = new Set<string>();
  const queryCount = new Map<string, number>();

  const json = (body: unknown, status = 200) =>
    new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });

  const ndjson = (events: TraceEvent[], truncateAt = -1) => {
    const encoder = new TextEncoder();
    let sent = 0;
    const stream = new ReadableStream<Uint8Array>({
      pull(controller) {
        if (truncateAt >= 0 && sent === truncateAt) {
          controller.error(new Error("connection reset"));
          return;
        }
        if (sent >= events.length) {
          controller.close();
          return;
        }
        controller.enqueue(encoder.encode(JSON.stringify(events[sent]) + "\n"));
        sent += 1;
      },
    });
    return new Response(stream, {
      status: 200,
      headers: { "Content-Type": "application/x-ndjson" },
    });
  };

  const fetchFn: FetchLike = async (url, init) => {
    requests.push({ method: init?.method ?? "GET", url, body: String(init?.body ?? "") });
    if (opts.down) throw new TypeError("fetch failed: connection refused");

    const path = url.replace(/^https?:\/\/[^/]+/, "");
    if (path === "/v1/sessions" && init?.method === "POST") {
      sessionCounter += 1;
      const id = `fix-${sessionCounter}`;
      sessions.add(id);
      return json({ id });
    }
    const queryMatch = path.match(/^\/v1\/sessions\/([^/]+)\/queries$/);
    if (queryMatch && init?.method === "POST") {
      const sid = queryMatch[1];
      if (!sessions.has(sid)) return json({ error: `unknown session '${sid}'` }, 404);
      const { question } = JSON.parse(String(init.body)) as { question: string };
      const turn = queryCount.get(sid) ?? 0;
      queryCount.set(sid, turn + 1);
      let payload: QueryResponse;
      if (question === BLOCKED_QUESTION) payload = BLOCKED_RESPONSE;
      else if (question === FOLLOWUP_QUESTION) payload = FOLLOWUP_RESPONSE;
      else payload = HAPPY_RESPONSE;
      return json({ ...payload, session: sid, turn });
    }
    const eventsMatch = path.match(/^\/v1\/sessions\/([^/]+)\/events/);
    if (eventsMatch) {
      if (!sessions.has(eventsMatch[1])) return json({ error: "unknown session" }, 404);
      const events = (queryCount.get(eventsMatch[1]) ?? 0) > 0 &&
        lastQuestionWasBlocked(requests)
        ? BLOCKED_EVENTS
        : HAPPY_EVENTS;
      eventStreamAttempts += 1;
      if (opts.failFirstEventStream && eventStreamAttempts === 1) {
        return ndjson(events, 2); // drops the connection after two events
      }
      return ndjson(events);
    }
    const neighborMatch = path.match(/^\/v1\/kg\/tools\/([^/]+)\/neighbors\?(.*)$/);
    if (neighborMatch) {
      const tool = decodeURIComponent(neighborMatch[1]);
      const d = Number(new URLSearchParams(neighborMatch[2]).get("d") ?? "1");
      const key = `${tool}|${d}`;
      if (!(key in NEIGHBOR_FIXTURES)) {
        return json({ error: `unknown tool '${tool}'` }, 404);
      }
      return json({ tool, d, direction: "out", neighbors: NEIGHBOR_FIXTURES[key] });
    }
    return json({ error: `no fixture for ${path}` }, 500);
  };

  return { fetchFn, requests };
}

function lastQuestionWasBlocked(requests: RecordedRequest[]): boolean {
  for (let i = requests.length - 1; i >= 0; i -= 1) {
    if (requests[i].url.endsWith("/queries")) {
      try {
        return (JSON.parse(requests[i].body) as { question: string }).question === BLOCKED_QUESTION;
      } catch {
        return false;
      }
    }
  }
  return false;
}

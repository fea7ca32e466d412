import { GatewayClient, GatewayError } from "./api.js";
import { SessionView } from "./state.js";
import { renderApp } from "./render.js";

declare global {
  interface Window {
    BASE_URL?: string;
  }
}

const client = new GatewayClient(window.BASE_URL ?? "");
const view = new SessionView();

function paint(): void {
  const root = document.getElementById("app");
  if (root) root.innerHTML = renderApp(view);
}

async function startSession(): Promise<void> {
  try {
    const { id } = await client.createSession();
    view.startSession(id);
  } catch (err) {
    view.setError(err instanceof GatewayError ? err.message : String(err));
  }
  paint();
}

async function submitQuery(question: string): Promise<void> {
  if (!view.sessionId || view.busy) return;
  view.beginQuery();
  paint();
  // live chips stream concurrently with the query; the response reconciles
  const streaming = client.streamEvents(view.sessionId, (event) => {
    view.applyEvent(event);
    paint();
  });
  try {
    const resp = await client.submitQuery(view.sessionId, question);
    view.applyQueryResponse(resp);
  } catch (err) {
    view.setError(err instanceof GatewayError ? err.message : String(err));
  }
  await streaming;
  paint();
}

async function inspectKg(tool: string, d: number): Promise<void> {
  try {
    const resp = await client.neighbors(tool, d);
    view.showNeighbors(resp.tool, resp.d, resp.neighbors);
  } catch (err) {
    if (err instanceof GatewayError && err.status === 404) {
      view.showNeighbors(tool, d, null);
    } else {
      view.setError(String(err));
    }
  }
  paint();
}

function wire(): void {
  const form = document.getElementById("query-form") as HTMLFormElement | null;
  form?.addEventListener("submit", (e) => {
    e.preventDefault();
    const input = document.getElementById("query-input") as HTMLInputElement;
    if (input.value.trim()) void submitQuery(input.value.trim());
  });
  const kgForm = document.getElementById("kg-form") as HTMLFormElement | null;
  kgForm?.addEventListener("submit", (e) => {
    e.preventDefault();
    const tool = (document.getElementById("kg-tool") as HTMLInputElement).value.trim();
    const d = Number((document.getElementById("kg-depth") as HTMLInputElement).value || "1");
    if (tool) void inspectKg(tool, d);
  });
  void startSession();
}

if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", wire);
}

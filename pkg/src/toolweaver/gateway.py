"""HTTP service over the engine: sessions, queries, event streaming, inspection."""

from __future__ import annotations

import json
import os
import threading
import time
import uuid

from fastapi import FastAPI
from fastapi.responses import JSONResponse, StreamingResponse
from fastapi.staticfiles import StaticFiles

from .bench import JudgeConfig, run_bench
from .errors import DatasetError, TerminalPlanningError, ToolweaverError
from .kg import neighborhood, validate_graph
from .safety.screen import screen_molecule, screen_protein
from .summarizer import SessionMemory


class SessionState:
    def __init__(self, session_id: str):
        self.id = session_id
        self.created = time.time()
        self.memory = SessionMemory(session_id=session_id)
        self.busy = False
        self.lock = threading.Lock()
        self.cond = threading.Condition()
        self.events: list[dict] = []
        self.query_count = 0

    def emit(self, event: dict) -> None:
        with self.cond:
            self.events.append(event)
            self.cond.notify_all()

    def try_acquire(self) -> bool:
        with self.lock:
            if self.busy:
                return False
            self.busy = True
            return True

    def release(self) -> None:
        with self.lock:
            self.busy = False
        with self.cond:
            self.cond.notify_all()


def create_app(engine, persist_dir: str = "", static_dir: str = "") -> FastAPI:
    app = FastAPI(title="toolweaver gateway")
    sessions: dict[str, SessionState] = {}
    sessions_lock = threading.Lock()
    app.state.engine = engine
    app.state.sessions = sessions

    def persist(state: SessionState) -> None:
        if not persist_dir:
            return
        os.makedirs(persist_dir, exist_ok=True)
        path = os.path.join(persist_dir, f"{state.id}.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(state.memory.to_dict(), fh, indent=2)

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "tools": len(engine.kg.tools)}

    @app.post("/v1/sessions")
    def create_session():
        sid = uuid.uuid4().hex[:12]
        with sessions_lock:
            sessions[sid] = SessionState(sid)
        return {"id": sid}

    def _get_session(sid: str) -> SessionState | None:
        with sessions_lock:
            return sessions.get(sid)

    @app.post("/v1/sessions/{sid}/queries")
    def post_query(sid: str, body: dict):
        state = _get_session(sid)
        if state is None:
            return JSONResponse({"error": f"unknown session '{sid}'"}, status_code=404)
        question = str(body.get("question", "")).strip()
        if not question:
            return JSONResponse({"error": "question is required"}, status_code=422)
        if not state.try_acquire():
            return JSONResponse({"error": "session busy", "session": sid}, status_code=409)
        started = time.time()
        try:
            query_index = state.query_count
            state.query_count += 1

            def sink(event: dict) -> None:
                event = dict(event)
                event["query_index"] = query_index
                state.emit(event)

            answer, traces = engine.run_session_query(state.memory, question, event_sink=sink)
        except TerminalPlanningError as e:
            return JSONResponse(
                {"error": str(e), "diagnostics": e.diagnostics, "session": sid},
                status_code=502,
            )
        except ToolweaverError as e:
            return JSONResponse({"error": str(e), "session": sid}, status_code=500)
        finally:
            state.release()
        persist(state)
        final_trace = traces[-1] if traces else None
        return {
            "session": sid,
            "turn": len(state.memory.turns) - 1,
            "question": question,
            "answer": answer.to_dict(),
            "plan": final_trace.chain.tool_ids() if final_trace else [],
            "trace": final_trace.to_dict() if final_trace else None,
            "rounds": len(traces),
            "timings": {"total_s": round(time.time() - started, 6)},
        }

    @app.get("/v1/sessions/{sid}/events")
    def get_events(sid: str, replay: int = 0):
        state = _get_session(sid)
        if state is None:
            return JSONResponse({"error": f"unknown session '{sid}'"}, status_code=404)

        if replay:
            with state.cond:
                snapshot = list(state.events)
            body = "".join(json.dumps(e) + "\n" for e in snapshot)
            return StreamingResponse(iter([body]), media_type="application/x-ndjson")

        def stream():
            idx = 0
            while True:
                with state.cond:
                    if idx >= len(state.events):
                        if not state.busy:
                            break
                        state.cond.wait(timeout=0.1)
                    chunk = state.events[idx:]
                    idx = len(state.events)
                for event in chunk:
                    yield json.dumps(event) + "\n"

        return StreamingResponse(stream(), media_type="application/x-ndjson")

    @app.get("/v1/sessions/{sid}")
    def get_session(sid: str):
        state = _get_session(sid)
        if state is None:
            return JSONResponse({"error": f"unknown session '{sid}'"}, status_code=404)
        return state.memory.to_dict()

    @app.get("/v1/kg/tools")
    def kg_tools():
        return [engine.kg.tools[tid].to_dict() for tid in engine.kg.sorted_ids()]

    @app.get("/v1/kg/tools/{tid}/neighbors")
    def kg_neighbors(tid: str, d: int = 1, direction: str = "out"):
        if tid not in engine.kg.tools:
            return JSONResponse({"error": f"unknown tool '{tid}'"}, status_code=404)
        try:
            hood = neighborhood(engine.kg, tid, d, direction=direction)
        except ValueError as e:
            return JSONResponse({"error": str(e)}, status_code=422)
        return {"tool": tid, "d": d, "direction": direction, "neighbors": sorted(hood)}

    @app.get("/v1/kg/validate")
    def kg_validate():
        violations = validate_graph(engine.kg)
        return {"valid": not violations,
                "violations": [{"kind": v.kind, "where": v.where, "detail": v.detail} for v in violations]}

    @app.post("/v1/safety/screen")
    def safety_screen(body: dict):
        threshold = float(body.get("threshold", engine.safety_ctx.threshold))
        db = engine.safety_ctx.db
        try:
            if "smiles" in body:
                verdict = screen_molecule(str(body["smiles"]), db, threshold)
            elif "sequence" in body:
                verdict = screen_protein(str(body["sequence"]), db, threshold)
            else:
                return JSONResponse({"error": "provide 'smiles' or 'sequence'"}, status_code=422)
        except ToolweaverError as e:
            return JSONResponse({"error": str(e)}, status_code=422)
        return verdict.to_dict()

    @app.post("/v1/bench/run")
    def bench_run(body: dict):
        dataset = body.get("items", body.get("dataset"))
        if dataset is None:
            return JSONResponse({"error": "provide 'dataset' path or inline 'items'"}, status_code=422)
        judge_mode = body.get("judge", "deterministic")
        try:
            judge = JudgeConfig(mode=judge_mode,
                                provider=engine.chat if judge_mode == "llm" else None)
            report = run_bench(dataset, engine, judge, parallel=int(body.get("parallel", 1)))
        except DatasetError as e:
            return JSONResponse({"error": str(e)}, status_code=422)
        return json.loads(report.to_json())

    if static_dir:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="console")

    return app

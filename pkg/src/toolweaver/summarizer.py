"""Answer synthesis, success assessment, session memory and the refinement loop."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import PlanningError, TerminalPlanningError
from .executor import STATUS_BLOCKED, STATUS_OK, ExecutionTrace, run_chain
from .planner import PlanFeedback, ToolChain, generate_chain, one_line, refine_chain, validate_chain
from .providers import ChatExchange

SUMMARIZER_SYSTEM = (
    "You compile tool outputs into a final answer for the user. "
    "Be concrete and include the values the tools produced."
)
ASSESSOR_SYSTEM = (
    "You judge whether the executed tool chain answered the question. "
    "Reply with 'VERDICT: success' or 'VERDICT: failure', then optional "
    "'REASON: ...', 'SUGGEST: add|remove|reorder|re-retrieve' and 'CONFLICT: ...' lines."
)

_VERDICT_LINE = re.compile(r"^\s*VERDICT\s*:\s*(success|failure)\s*$", re.MULTILINE | re.IGNORECASE)
_REASON_LINE = re.compile(r"^\s*REASON\s*:\s*(.+?)\s*$", re.MULTILINE)
_SUGGEST_LINE = re.compile(r"^\s*SUGGEST\s*:\s*([a-z\- ,]+?)\s*$", re.MULTILINE | re.IGNORECASE)
_CONFLICT_LINE = re.compile(r"^\s*CONFLICT\s*:\s*(.+?)\s*$", re.MULTILINE)

EDIT_KINDS = ("add", "remove", "reorder", "re-retrieve")

WARNING_HEADER = "SAFETY WARNING"


@dataclass
class FinalAnswer:
    text: str
    citations: list[tuple[int, str]] = field(default_factory=list)
    safety_notes: list[str] = field(default_factory=list)
    best_effort: bool = False
    failure_reasons: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "citations": [list(c) for c in self.citations],
            "safety_notes": list(self.safety_notes),
            "best_effort": self.best_effort,
            "failure_reasons": list(self.failure_reasons),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "FinalAnswer":
        return cls(
            text=doc.get("text", ""),
            citations=[(int(i), str(f)) for i, f in doc.get("citations", [])],
            safety_notes=list(doc.get("safety_notes", [])),
            best_effort=bool(doc.get("best_effort", False)),
            failure_reasons=list(doc.get("failure_reasons", [])),
        )


@dataclass
class Assessment:
    verdict: str  # "success" | "failure"
    reasons: list[str] = field(default_factory=list)
    consistency_flags: list[str] = field(default_factory=list)
    suggested_edits: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.verdict == "failure" and not self.reasons:
            raise ValueError("failure assessment needs at least one reason")


@dataclass
class SessionMemory:
    session_id: str = ""
    turns: list[tuple[str, FinalAnswer]] = field(default_factory=list)
    artifacts: dict[str, tuple[str, str]] = field(default_factory=dict)

    def add_turn(self, query: str, answer: FinalAnswer, trace: ExecutionTrace | None) -> None:
        turn = len(self.turns)
        self.turns.append((query, answer))
        if trace is not None:
            for step in trace.steps:
                if step.status != STATUS_OK:
                    continue
                for fmt in sorted(step.outputs):
                    self.artifacts[f"turn{turn}.step{step.index}.{fmt}"] = (fmt, step.outputs[fmt])

    def memory_block(self) -> str:
        if not self.turns and not self.artifacts:
            return ""
        lines = []
        for query, answer in self.turns:
            lines.append(f"Q: {query}")
            lines.append(f"A: {answer.text}")
        for label, (fmt, value) in self.artifacts.items():
            lines.append(f"artifact {label} [{fmt}]: {value}")
        return "\n".join(lines)

    def seed_outputs(self) -> list[tuple[str, str]]:
        return [(fmt, value) for fmt, value in self.artifacts.values()]

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "turns": [{"query": q, "answer": a.to_dict()} for q, a in self.turns],
            "artifacts": {k: list(v) for k, v in self.artifacts.items()},
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SessionMemory":
        mem = cls(session_id=doc.get("session_id", ""))
        for turn in doc.get("turns", []):
            mem.turns.append((turn["query"], FinalAnswer.from_dict(turn["answer"])))
        for label, pair in doc.get("artifacts", {}).items():
            mem.artifacts[label] = (pair[0], pair[1])
        return mem


def _trace_block(trace: ExecutionTrace) -> str:
    lines = []
    for step in trace.steps:
        ins = "; ".join(f"{k}={v}" for k, v in sorted(step.inputs.items()))
        outs = "; ".join(f"{k}={v}" for k, v in sorted(step.outputs.items()))
        lines.append(f"step {step.index} [{step.tool}] status={step.status} inputs({ins}) outputs({outs})")
        if step.error:
            lines.append(f"  error: {step.error}")
        for v in step.flagged_verdicts():
            lines.append(f"  flagged: {v.kind} score {v.score:.4f} matched {v.matched}")
    return "\n".join(lines)


def _safety_notes(trace: ExecutionTrace) -> list[str]:
    notes = []
    for step in trace.steps:
        for v in step.flagged_verdicts():
            notes.append(
                f"step {step.index} ({step.tool}): {v.kind} similarity {v.score:.4f} "
                f"to safeguard entry '{v.matched}' exceeds threshold {v.threshold}"
            )
    return notes


def synthesize(q: str, trace: ExecutionTrace, chat_provider, memory_block: str = "") -> FinalAnswer:
    """Compile a final answer from the trace via the chat provider.

    A blocked step always yields a warning section: if the provider's text
    lacks one, a deterministic warning block is appended. Citations are the
    (step, format) pairs whose output value appears verbatim in the text.
    """
    if not trace.steps:
        raise ValueError("synthesize needs a trace with at least one step")
    parts = [f"SUMMARIZE: {one_line(q)}"]
    if memory_block:
        parts.append("EARLIER TURNS:\n" + memory_block)
    parts.append("QUESTION: " + q)
    parts.append("EXECUTION:\n" + _trace_block(trace))
    parts.append("Write the final answer for the user.")
    text = chat_provider.chat(ChatExchange.single(SUMMARIZER_SYSTEM, "\n".join(parts)))

    notes = _safety_notes(trace)
    blocked = any(step.status == STATUS_BLOCKED for step in trace.steps)
    if blocked and not notes:
        notes = [
            f"step {s.index} ({s.tool}) was blocked by safety screening"
            for s in trace.steps if s.status == STATUS_BLOCKED
        ]
    if blocked and WARNING_HEADER not in text:
        warning = "\n".join([f"{WARNING_HEADER}:"] + [f"- {n}" for n in notes])
        text = f"{text}\n\n{warning}" if text else warning

    citations = []
    for step in trace.steps:
        for fmt in sorted(step.outputs):
            value = step.outputs[fmt]
            if value and value in text:
                citations.append((step.index, fmt))
    return FinalAnswer(text=text, citations=citations, safety_notes=notes)


def assess(q: str, trace: ExecutionTrace, answer: FinalAnswer, chat_provider,
           round_index: int = 0) -> Assessment:
    """Judge the round. Aborted traces fail by rule, completed ones by prompt."""
    if trace.overall == "aborted":
        failing = next((s for s in trace.steps if s.status != STATUS_OK), None)
        if failing is None:
            reason = "trace aborted before any step ran"
        else:
            detail = failing.error or failing.status
            reason = f"step {failing.index} ({failing.tool}) {failing.status}: {detail}"
        edits = ["re-retrieve"] if failing is not None and failing.status == "failed" else []
        return Assessment(verdict="failure", reasons=[reason], suggested_edits=edits)

    prompt = (
        f"ASSESS {round_index}: {one_line(q)}\n"
        f"QUESTION: {q}\n"
        f"EXECUTION:\n{_trace_block(trace)}\n"
        f"PROPOSED ANSWER:\n{answer.text}\n"
        "Did this solve the question?"
    )
    reply = chat_provider.chat(ChatExchange.single(ASSESSOR_SYSTEM, prompt))
    m = _VERDICT_LINE.search(reply)
    if not m:
        return Assessment(verdict="failure", reasons=["unparseable_assessment"])
    verdict = m.group(1).lower()
    reasons = _REASON_LINE.findall(reply)
    conflicts = _CONFLICT_LINE.findall(reply)
    edits = []
    for raw in _SUGGEST_LINE.findall(reply):
        for token in re.split(r"[,\s]+", raw.strip().lower()):
            if token in EDIT_KINDS and token not in edits:
                edits.append(token)
    if verdict == "failure" and not reasons:
        reasons = ["assessment reported failure without a stated reason"]
    return Assessment(verdict=verdict, reasons=reasons, consistency_flags=conflicts,
                      suggested_edits=edits)


def run_session_query(engine, session: SessionMemory, q: str, event_sink=None,
                      max_refinements: int | None = None) -> tuple[FinalAnswer, list[ExecutionTrace]]:
    """Plan/execute/synthesize/assess loop with bounded refinement.

    Round 0 plans from scratch; each refinement round re-plans from the last
    assessment. The loop ends on a success verdict, on a refined chain that
    did not change (re-running an identical chain cannot improve a
    deterministic outcome), or after ``max_refinements`` refinement rounds,
    in which case the last answer is returned flagged best-effort. The turn
    is appended to session memory either way.
    """
    if max_refinements is None:
        max_refinements = engine.max_refinements
    memory_block = session.memory_block()
    seed = session.seed_outputs()
    diagnostics: list[str] = []
    traces: list[ExecutionTrace] = []
    answer: FinalAnswer | None = None
    assessment: Assessment | None = None

    pool = engine.plan_pool(q)
    try:
        chain: ToolChain | None = generate_chain(q, pool, engine.kg, engine.chat,
                                                 memory_block=memory_block)
    except PlanningError as e:
        raise TerminalPlanningError(
            f"planning failed on the initial round: {e}",
            diagnostics=[str(e)] + list(e.responses),
        ) from None

    for round_index in range(max_refinements + 1):
        violations = validate_chain(engine.kg, chain)
        if violations:
            reasons = [f"steps {v.index}->{v.index + 1} ({v.from_tool} -> {v.to_tool}): {v.detail}"
                       for v in violations]
            assessment = Assessment(verdict="failure", reasons=reasons,
                                    suggested_edits=["reorder"])
            diagnostics.append(f"round {round_index}: chain failed validation")
        else:
            trace = run_chain(chain, q, engine.toolhost, engine.kg, engine.chat,
                              engine.retry_policy, engine.safety_ctx,
                              event_sink=event_sink, session=session.session_id,
                              seed_outputs=seed)
            traces.append(trace)
            answer = synthesize(q, trace, engine.chat, memory_block=memory_block)
            assessment = assess(q, trace, answer, engine.chat, round_index=round_index)
            if assessment.verdict == "success":
                session.add_turn(q, answer, trace)
                return answer, traces
            diagnostics.append(f"round {round_index}: {'; '.join(assessment.reasons)}")

        if round_index >= max_refinements:
            break
        feedback = PlanFeedback(verdict="failure", reasons=assessment.reasons,
                                suggested_edits=assessment.suggested_edits)
        try:
            chain = refine_chain(q, chain, feedback, engine.kg, pool, engine.chat,
                                 embedder=engine.embedder, params=engine.params,
                                 round_index=round_index + 1, memory_block=memory_block)
        except PlanningError as e:
            diagnostics.append(f"round {round_index + 1}: refinement planning failed: {e}")
            if answer is None:
                raise TerminalPlanningError("planning failed on every round",
                                            diagnostics=diagnostics) from None
            break
        if chain.no_change:
            diagnostics.append(f"round {round_index + 1}: refined chain unchanged; stopping early")
            break

    if answer is None:
        # every round died in validation; produce a deterministic best-effort report
        answer = FinalAnswer(
            text="No executable tool chain was found.\n" + "\n".join(f"- {d}" for d in diagnostics),
        )
    answer.best_effort = True
    answer.failure_reasons = list(assessment.reasons) if assessment else list(diagnostics)
    session.add_turn(q, answer, traces[-1] if traces else None)
    return answer, traces

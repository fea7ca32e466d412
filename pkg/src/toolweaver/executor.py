"""Step-by-step chain execution with retries and risk-gated safety screening."""

from __future__ import annotations

import re
import time
from dataclasses import dataclass, field

from .errors import InputPreparationError, MissingInputError, OutputFormatViolation, RegistryError
from .kg import ToolGraph
from .planner import ToolChain, one_line
from .providers import ChatExchange
from .safety.screen import SafetyContext, SafetyVerdict
from .toolhost import ToolHost

EXECUTOR_SYSTEM = (
    "You prepare inputs for scientific tools. "
    "Reply only with lines of the form 'format=value', one per required format."
)

_KV_LINE = re.compile(r"^\s*([a-z0-9_]+)\s*=\s*(.*?)\s*$")

STATUS_OK = "ok"
STATUS_FAILED = "failed"
STATUS_BLOCKED = "blocked_by_safety"
STATUS_SKIPPED = "skipped"


@dataclass
class StepRecord:
    index: int
    tool: str
    inputs: dict[str, str] = field(default_factory=dict)
    outputs: dict[str, str] = field(default_factory=dict)
    status: str = STATUS_SKIPPED
    attempts: int = 1
    safety: list[SafetyVerdict] = field(default_factory=list)
    started: float = 0.0
    ended: float = 0.0
    error: str = ""

    def flagged_verdicts(self) -> list[SafetyVerdict]:
        return [v for v in self.safety if v.flagged]

    def to_dict(self, include_timestamps: bool = True) -> dict:
        doc = {
            "index": self.index,
            "tool": self.tool,
            "inputs": dict(self.inputs),
            "outputs": dict(self.outputs),
            "status": self.status,
            "attempts": self.attempts,
            "safety": [v.to_dict() for v in self.safety],
            "error": self.error,
        }
        if include_timestamps:
            doc["started"] = self.started
            doc["ended"] = self.ended
        return doc


@dataclass
class ExecutionTrace:
    chain: ToolChain
    steps: list[StepRecord] = field(default_factory=list)
    overall: str = "completed"  # or "aborted"

    def to_dict(self, include_timestamps: bool = True) -> dict:
        return {
            "chain": self.chain.tool_ids(),
            "query": self.chain.query,
            "overall": self.overall,
            "steps": [s.to_dict(include_timestamps) for s in self.steps],
        }

    def output_history(self) -> list[tuple[str, str]]:
        hist: list[tuple[str, str]] = []
        for step in self.steps:
            if step.status == STATUS_OK:
                for fmt in sorted(step.outputs):
                    hist.append((fmt, step.outputs[fmt]))
        return hist


@dataclass
class RetryPolicy:
    max_attempts: int = 2
    adjust_via_llm: bool = True

    def __post_init__(self) -> None:
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")


def parse_kv_lines(text: str, wanted: set[str]) -> dict[str, str]:
    found: dict[str, str] = {}
    for line in text.splitlines():
        m = _KV_LINE.match(line)
        if m and m.group(1) in wanted and m.group(1) not in found:
            found[m.group(1)] = m.group(2)
    return found


def prepare_inputs(q: str, tool_id: str, prior_outputs: list[tuple[str, str]],
                   kg: ToolGraph, chat_provider) -> dict[str, str]:
    """Resolve every required input format for one step.

    Rule pass first: the most recent prior output of a required format is used
    verbatim, with no provider involvement. Only still-missing formats go to
    the chat provider, which gets one re-prompt before this raises.
    """
    spec = kg.require(tool_id)
    inputs: dict[str, str] = {}
    for fmt in spec.input_formats:
        for prior_fmt, value in reversed(prior_outputs):
            if prior_fmt == fmt:
                inputs[fmt] = value
                break
    missing = [fmt for fmt in spec.input_formats if fmt not in inputs]
    if not missing:
        return inputs

    prior_block = "\n".join(f"{fmt}: {value}" for fmt, value in prior_outputs) or "(none)"
    base = (
        f"QUESTION: {q}\n"
        f"TOOL: {spec.id} ({spec.text()})\n"
        f"REQUIRED FORMATS: {', '.join(missing)}\n"
        f"AVAILABLE OUTPUTS:\n{prior_block}\n"
        "Reply with 'format=value' lines for each required format."
    )
    prompt = f"INPUTS {tool_id}: {one_line(q)}\n" + base
    reply = chat_provider.chat(ChatExchange.single(EXECUTOR_SYSTEM, prompt))
    inputs.update(parse_kv_lines(reply, set(missing)))
    missing = [fmt for fmt in spec.input_formats if fmt not in inputs]
    if missing:
        retry = (
            f"INPUTS RETRY {tool_id}: {one_line(q)}\n" + base
            + f"\nStill missing: {', '.join(missing)}. Provide every missing format."
        )
        reply = chat_provider.chat(ChatExchange.single(EXECUTOR_SYSTEM, retry))
        inputs.update(parse_kv_lines(reply, set(missing)))
        missing = [fmt for fmt in spec.input_formats if fmt not in inputs]
    if missing:
        raise InputPreparationError(tool_id, missing)
    return inputs


def _adjusted_inputs(q: str, tool_id: str, inputs: dict[str, str], error: str,
                     chat_provider) -> dict[str, str]:
    """Ask the provider to revise inputs after a transient failure."""
    prompt = (
        f"ADJUST {tool_id}: {one_line(q)}\n"
        f"The tool failed with: {error}\n"
        + "CURRENT INPUTS:\n"
        + "\n".join(f"{k}={v}" for k, v in sorted(inputs.items()))
        + "\nReply with corrected 'format=value' lines; omit formats to keep them."
    )
    reply = chat_provider.chat(ChatExchange.single(EXECUTOR_SYSTEM, prompt))
    revised = dict(inputs)
    revised.update(parse_kv_lines(reply, set(inputs)))
    return revised


def execute_step(toolhost: ToolHost, index: int, tool_id: str, inputs: dict[str, str],
                 policy: RetryPolicy, safety_ctx: SafetyContext | None,
                 q: str = "", chat_provider=None, emit=None) -> StepRecord:
    """Run one tool with retries; high-risk tools get input and output screening."""
    record = StepRecord(index=index, tool=tool_id, inputs=dict(inputs), started=time.time())
    try:
        spec = toolhost.spec(tool_id)
    except RegistryError as e:
        record.status = STATUS_FAILED
        record.error = str(e)
        record.ended = time.time()
        return record
    high_risk = spec.risk_level == "high" and safety_ctx is not None

    def finish(status: str, outputs: dict[str, str] | None = None, error: str = "") -> StepRecord:
        record.status = status
        record.outputs = outputs or {}
        record.error = error
        record.ended = time.time()
        return record

    if high_risk:
        in_verdicts = _screen_by_format(safety_ctx, inputs)
        record.safety.extend(in_verdicts.values())
        if any(v.flagged for v in in_verdicts.values()):
            return finish(STATUS_BLOCKED, error="input flagged by safety screening")

    current = dict(inputs)
    last_error = ""
    for attempt in range(1, policy.max_attempts + 1):
        record.attempts = attempt
        if emit and attempt > 1:
            emit("retrying", {"attempt": attempt, "tool": tool_id})
        try:
            result = toolhost.invoke(tool_id, current)
        except (MissingInputError, OutputFormatViolation) as e:
            return finish(STATUS_FAILED, error=str(e))
        if result.ok:
            if high_risk:
                out_verdicts = _screen_by_format(safety_ctx, result.outputs)
                record.safety.extend(out_verdicts.values())
                if any(v.flagged for v in out_verdicts.values()):
                    # flagged values are discarded; clean ones stay on the record
                    kept = {
                        fmt: val for fmt, val in result.outputs.items()
                        if fmt not in out_verdicts or not out_verdicts[fmt].flagged
                    }
                    return finish(STATUS_BLOCKED, outputs=kept,
                                  error="output flagged by safety screening")
            record.inputs = current
            return finish(STATUS_OK, outputs=dict(result.outputs))
        last_error = result.diagnostics or "tool failure"
        if not result.transient or attempt >= policy.max_attempts:
            break
        if policy.adjust_via_llm and chat_provider is not None:
            current = _adjusted_inputs(q, tool_id, current, last_error, chat_provider)
    return finish(STATUS_FAILED, error=last_error)


def _screen_by_format(safety_ctx: SafetyContext, values: dict[str, str]) -> dict[str, SafetyVerdict]:
    verdicts: dict[str, SafetyVerdict] = {}
    for fmt in sorted(values):
        v = safety_ctx.screen_value(fmt, values[fmt])
        if v is not None:
            verdicts[fmt] = v
    return verdicts


def run_chain(chain: ToolChain, q: str, toolhost: ToolHost, kg: ToolGraph,
              chat_provider, policy: RetryPolicy, safety_ctx: SafetyContext | None,
              event_sink=None, session: str = "",
              seed_outputs: list[tuple[str, str]] | None = None) -> ExecutionTrace:
    """Execute chain steps in order, stopping at the first non-ok step.

    ``seed_outputs`` lets artifacts from earlier turns participate in the
    rule pass of input preparation. Emits one event per step state change.
    """
    trace = ExecutionTrace(chain=chain)

    def emit(step: int, phase: str, detail: dict) -> None:
        if event_sink is not None:
            event_sink({"session": session, "step": step, "phase": phase, "detail": detail})

    for i, (tool_id, _) in enumerate(chain.steps):
        emit(i, "planned", {"tool": tool_id})

    prior: list[tuple[str, str]] = list(seed_outputs or [])
    for i, (tool_id, _) in enumerate(chain.steps):
        emit(i, "started", {"tool": tool_id})
        try:
            inputs = prepare_inputs(q, tool_id, prior, kg, chat_provider)
        except InputPreparationError as e:
            record = StepRecord(index=i, tool=tool_id, status=STATUS_FAILED,
                                error=str(e), started=time.time(), ended=time.time())
            trace.steps.append(record)
            trace.overall = "aborted"
            emit(i, "failed", {"tool": tool_id, "error": str(e)})
            return trace
        record = execute_step(
            toolhost, i, tool_id, inputs, policy, safety_ctx,
            q=q, chat_provider=chat_provider,
            emit=lambda phase, detail, _i=i: emit(_i, phase, detail),
        )
        trace.steps.append(record)
        if record.status == STATUS_OK:
            emit(i, "ok", {"tool": tool_id, "outputs": dict(record.outputs)})
            for fmt in sorted(record.outputs):
                prior.append((fmt, record.outputs[fmt]))
        else:
            phase = "blocked" if record.status == STATUS_BLOCKED else "failed"
            emit(i, phase, {"tool": tool_id, "error": record.error})
            trace.overall = "aborted"
            return trace
    trace.overall = "completed"
    return trace

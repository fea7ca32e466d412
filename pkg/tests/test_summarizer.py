from __future__ import annotations

import pytest

from toolweaver.errors import TerminalPlanningError
from toolweaver.executor import RetryPolicy, run_chain
from toolweaver.planner import ToolChain
from toolweaver.providers import ScriptedChatProvider
from toolweaver.safety.screen import SafetyContext
from toolweaver.summarizer import (
    Assessment,
    SessionMemory,
    assess,
    run_session_query,
    synthesize,
)

Q = "run the toy chain"


def completed_trace(toy_kg, toy_host, chain_ids=("F", "C", "D")):
    scripts = {f"INPUTS F: {Q}": "cif=TBAPy_Ti.cif"}
    chain = ToolChain(steps=[(t, "") for t in chain_ids], query=Q)
    return run_chain(chain, Q, toy_host, toy_kg, ScriptedChatProvider(table=scripts),
                     RetryPolicy(), None)


def blocked_trace(demo_kg, demo_host, safeguard_db):
    q = "chlorinate phenol"
    scripts = {f"INPUTS reaction_predict: {q}": "text=phenol + chlorine"}
    chain = ToolChain(steps=[("reaction_predict", ""), ("smiles_to_selfies", "")], query=q)
    return run_chain(chain, q, demo_host, demo_kg, ScriptedChatProvider(table=scripts),
                     RetryPolicy(), SafetyContext(safeguard_db))


def test_synthesize_scripted_answer_with_citations(toy_kg, toy_host):
    trace = completed_trace(toy_kg, toy_host)
    outputs = {fmt: v for s in trace.steps for fmt, v in s.outputs.items()}
    answer_text = (f"The linker is {outputs['smiles']} with CAS {outputs['cas']}; "
                   f"safety: {outputs['text']}")
    provider = ScriptedChatProvider(table={f"SUMMARIZE: {Q}": answer_text})
    answer = synthesize(Q, trace, provider)
    assert answer.text == answer_text
    # every output value quoted in the text is cited as (step, format)
    assert (0, "smiles") in answer.citations
    assert (1, "cas") in answer.citations
    assert (2, "text") in answer.citations
    assert answer.safety_notes == []


def test_synthesize_single_step_cites_step_zero(toy_kg, toy_host):
    trace = completed_trace(toy_kg, toy_host, chain_ids=("F",))
    value = trace.steps[0].outputs["smiles"]
    provider = ScriptedChatProvider(table={f"SUMMARIZE: {Q}": f"result {value}"})
    answer = synthesize(Q, trace, provider)
    assert answer.citations == [(0, "smiles")]


def test_synthesize_blocked_trace_forces_warning(demo_kg, demo_host, safeguard_db):
    trace = blocked_trace(demo_kg, demo_host, safeguard_db)
    provider = ScriptedChatProvider(table={}, fallback="The reaction was attempted.")
    answer = synthesize("chlorinate phenol", trace, provider)
    assert answer.safety_notes
    assert "SAFETY WARNING" in answer.text
    assert "safeguard entry" in answer.text


def test_assess_aborted_trace_skips_provider(toy_kg):
    from toolweaver.executor import ExecutionTrace, StepRecord

    trace = ExecutionTrace(
        chain=ToolChain(steps=[("F", "")], query=Q),
        steps=[StepRecord(index=0, tool="F", status="failed", error="boom")],
        overall="aborted",
    )
    provider = ScriptedChatProvider(table={})
    result = assess(Q, trace, None, provider)
    assert result.verdict == "failure"
    assert "boom" in result.reasons[0]
    assert provider.calls == []


def test_assess_scripted_success(toy_kg, toy_host):
    trace = completed_trace(toy_kg, toy_host)
    provider = ScriptedChatProvider(table={f"ASSESS 0: {Q}": "VERDICT: success"})
    answer_provider = ScriptedChatProvider(table={}, fallback="answer")
    answer = synthesize(Q, trace, answer_provider)
    result = assess(Q, trace, answer, provider, round_index=0)
    assert result.verdict == "success"


def test_assess_gibberish_defaults_to_failure(toy_kg, toy_host):
    trace = completed_trace(toy_kg, toy_host)
    answer = synthesize(Q, trace, ScriptedChatProvider(table={}, fallback="answer"))
    provider = ScriptedChatProvider(table={}, fallback="who knows")
    result = assess(Q, trace, answer, provider)
    assert result.verdict == "failure"
    assert result.reasons == ["unparseable_assessment"]


def test_assess_parses_reasons_edits_conflicts(toy_kg, toy_host):
    trace = completed_trace(toy_kg, toy_host)
    answer = synthesize(Q, trace, ScriptedChatProvider(table={}, fallback="answer"))
    reply = ("VERDICT: failure\nREASON: wrong tool order\n"
             "SUGGEST: reorder, re-retrieve\nCONFLICT: step outputs disagree")
    provider = ScriptedChatProvider(table={f"ASSESS 2: {Q}": reply})
    result = assess(Q, trace, answer, provider, round_index=2)
    assert result.verdict == "failure"
    assert result.reasons == ["wrong tool order"]
    assert result.suggested_edits == ["reorder", "re-retrieve"]
    assert result.consistency_flags == ["step outputs disagree"]


def test_assessment_failure_requires_reasons():
    with pytest.raises(ValueError):
        Assessment(verdict="failure", reasons=[])


# ------------------------------------------------------------------ the loop

BASE = {
    f"PLAN: {Q}": "CHAIN: F -> C -> D",
    f"INPUTS F: {Q}": "cif=TBAPy_Ti.cif",
    f"SUMMARIZE: {Q}": "all done: linker, cas and safety text collected",
}


def test_loop_success_on_first_round(toy_engine_factory):
    engine = toy_engine_factory({**BASE, f"ASSESS 0: {Q}": "VERDICT: success"})
    session = SessionMemory(session_id="s")
    answer, traces = run_session_query(engine, session, Q)
    assert len(traces) == 1
    assert not answer.best_effort
    assert session.turns[0][0] == Q
    assert session.turns[0][1].text == answer.text
    assert session.artifacts  # step outputs carried as artifacts


def test_loop_fail_fail_success(toy_engine_factory):
    scripts = {
        **BASE,
        f"ASSESS 0: {Q}": "VERDICT: failure\nREASON: first try wrong",
        f"REFINE 1: {Q}": "CHAIN: F -> C",
        f"ASSESS 1: {Q}": "VERDICT: failure\nREASON: second try wrong",
        f"REFINE 2: {Q}": "CHAIN: F -> A -> B",
        f"ASSESS 2: {Q}": "VERDICT: success",
    }
    engine = toy_engine_factory(scripts)
    answer, traces = run_session_query(engine, SessionMemory(session_id="s"), Q)
    assert len(traces) == 3
    assert [t.chain.tool_ids() for t in traces] == [["F", "C", "D"], ["F", "C"], ["F", "A", "B"]]
    assert not answer.best_effort


def test_loop_perpetual_failure_bounded(toy_engine_factory):
    scripts = {
        **BASE,
        f"ASSESS 0: {Q}": "VERDICT: failure\nREASON: round 0 wrong",
        f"REFINE 1: {Q}": "CHAIN: F -> C",
        f"ASSESS 1: {Q}": "VERDICT: failure\nREASON: round 1 wrong",
        f"REFINE 2: {Q}": "CHAIN: F -> A -> B",
        f"ASSESS 2: {Q}": "VERDICT: failure\nREASON: round 2 wrong",
        f"REFINE 3: {Q}": "CHAIN: F -> A",
        f"ASSESS 3: {Q}": "VERDICT: failure\nREASON: round 3 wrong",
    }
    engine = toy_engine_factory(scripts, max_refinements=3)
    answer, traces = run_session_query(engine, SessionMemory(session_id="s"), Q)
    assert len(traces) == 4  # 1 initial + 3 refinement rounds, exactly
    assert answer.best_effort
    assert answer.failure_reasons == ["round 3 wrong"]


def test_loop_stops_early_on_unchanged_refinement(toy_engine_factory):
    scripts = {
        **BASE,
        f"ASSESS 0: {Q}": "VERDICT: failure\nREASON: not good",
        f"REFINE 1: {Q}": "CHAIN: F -> C -> D",  # identical chain
    }
    engine = toy_engine_factory(scripts, max_refinements=3)
    answer, traces = run_session_query(engine, SessionMemory(session_id="s"), Q)
    assert len(traces) == 1  # re-running an identical chain is pointless
    assert answer.best_effort


def test_loop_terminal_planning_error(toy_engine_factory):
    engine = toy_engine_factory({}, fallback="no plan from me")
    with pytest.raises(TerminalPlanningError) as exc:
        run_session_query(engine, SessionMemory(session_id="s"), Q)
    assert exc.value.diagnostics


def test_memory_prepended_to_later_turns(toy_engine_factory):
    q2 = "and what about its selfies encoding"
    scripts = {
        **BASE,
        f"ASSESS 0: {Q}": "VERDICT: success",
        f"PLAN: {q2}": "CHAIN: A -> B",
        f"SUMMARIZE: {q2}": "selfies rendered",
        f"ASSESS 0: {q2}": "VERDICT: success",
    }
    engine = toy_engine_factory(scripts)
    session = SessionMemory(session_id="s")
    answer1, _ = run_session_query(engine, session, Q)
    answer2, traces2 = run_session_query(engine, session, q2)
    assert len(session.turns) == 2
    # the second planning prompt carries the first answer verbatim
    plan_calls = [c for c in engine.chat.calls if c["marker"] == f"PLAN: {q2}"]
    assert len(plan_calls) == 1
    assert answer1.text in plan_calls[0]["prompt"]
    # artifacts from turn 1 seed the rule pass of turn 2: step A takes the
    # smiles produced by tool F in turn 1 without any extraction prompt
    assert traces2[0].steps[0].inputs["smiles"] == session.artifacts["turn0.step0.smiles"][1]


def test_memory_turn_count_never_decreases(toy_engine_factory):
    engine = toy_engine_factory({**BASE, f"ASSESS 0: {Q}": "VERDICT: success"})
    session = SessionMemory(session_id="s")
    counts = []
    for _ in range(3):
        run_session_query(engine, session, Q)
        counts.append(len(session.turns))
    assert counts == sorted(counts)
    assert counts[-1] == 3


def test_full_determinism_of_session_query(toy_engine_factory):
    scripts = {**BASE, f"ASSESS 0: {Q}": "VERDICT: success"}
    results = []
    for _ in range(2):
        engine = toy_engine_factory(scripts)
        answer, traces = run_session_query(engine, SessionMemory(session_id="s"), Q)
        results.append((answer.to_dict(), [t.to_dict(include_timestamps=False) for t in traces]))
    assert results[0] == results[1]

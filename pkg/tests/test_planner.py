from __future__ import annotations

import random
import time

import pytest

from toolweaver.errors import PlanningError
from toolweaver.kg import ToolGraph, ToolSpec, Triple
from toolweaver.planner import (
    PlanFeedback,
    RetrievalParams,
    ToolChain,
    combine_rank,
    explore_subgraphs,
    generate_chain,
    parse_chain_response,
    refine_chain,
    retrieve_full,
    validate_chain,
)
from toolweaver.providers import HashedEmbedder, ScriptedChatProvider

from planner_oracle import WORDS, oracle_stages, random_kg, run_production


def test_oracle_equivalence_100_random_graphs():
    rng = random.Random(2024)
    emb = HashedEmbedder()
    started = time.monotonic()
    for trial in range(100):
        kg = random_kg(rng)
        q = " ".join(rng.choices(WORDS, k=rng.randint(2, 6)))
        k = rng.randint(1, 6)
        d = rng.randint(1, 4)
        n = rng.randint(1, k * k)
        candidates, per_anchor, pool = run_production(kg, q, emb, k, d, n)
        o_candidates, o_pairs, o_pool = oracle_stages(kg, q, emb, k, d, n)
        assert [(c.tool, c.score) for c in candidates] == o_candidates, f"trial {trial}"
        for c in candidates:
            got = [(p.anchor, p.companion, p.pair_score, p.combined) for p in per_anchor[c.tool]]
            assert got == o_pairs[c.tool], f"trial {trial} anchor {c.tool}"
        assert pool == o_pool, f"trial {trial}"
    assert time.monotonic() - started < 10.0


def test_retrieve_toy_query_leads_with_f(toy_kg):
    emb = HashedEmbedder()
    q = "convert a cif file to smiles"
    candidates = retrieve_full(toy_kg, q, 2, emb)
    # confirmed against brute-force scoring of all six tools
    brute = oracle_stages(toy_kg, q, emb, 2, 1, 1)[0]
    assert [(c.tool, c.score) for c in candidates] == brute
    assert candidates[0].tool == "F"
    assert len(candidates) == 2


def test_retrieve_topk_saturation(toy_kg):
    emb = HashedEmbedder()
    candidates = retrieve_full(toy_kg, "anything at all", 50, emb)
    assert len(candidates) == 6
    assert [c.tool for c in sorted(candidates, key=lambda c: c.tool)] == list("ABCDEF")


def test_retrieve_tie_break_by_id():
    tools = {}
    for tid in ("zz", "aa"):
        tools[tid] = ToolSpec(id=tid, name="same name", purpose="p",
                              functions=("identical function text",),
                              input_formats=("text",), output_formats=("text",))
    kg = ToolGraph.build(tools, [])
    candidates = retrieve_full(kg, "identical function text", 2, HashedEmbedder())
    assert [c.tool for c in candidates] == ["aa", "zz"]
    assert candidates[0].score == candidates[1].score


def test_explore_degenerate_anchor(toy_kg):
    emb = HashedEmbedder()
    candidates = retrieve_full(toy_kg, "summarize text", 6, emb)
    per_anchor = explore_subgraphs(toy_kg, "summarize text", candidates, 2, 5, emb)
    e_pairs = per_anchor["E"]
    assert len(e_pairs) == 1
    assert e_pairs[0].anchor == "E" and e_pairs[0].companion == "E"
    e_score = next(c.score for c in candidates if c.tool == "E")
    assert e_pairs[0].pair_score == e_score
    assert e_pairs[0].combined == e_score * e_score


def test_explore_depth_saturation(toy_kg):
    emb = HashedEmbedder()
    q = "convert a cif file to smiles"
    candidates = retrieve_full(toy_kg, q, 5, emb)
    at_3 = explore_subgraphs(toy_kg, q, candidates, 3, 5, emb)
    at_6 = explore_subgraphs(toy_kg, q, candidates, 6, 5, emb)
    assert at_3 == at_6


def test_combine_rank_singleton():
    from toolweaver.planner import ToolPair

    pool, ranked = combine_rank([ToolPair("a", "b", 0.5, 0.25)], 10)
    assert pool == ["a", "b"]
    pool, _ = combine_rank([ToolPair("a", "a", 0.5, 0.25)], 10)
    assert pool == ["a"]


def test_combine_rank_truncation_and_empty():
    from toolweaver.planner import ToolPair

    pairs = [ToolPair("a", "b", 0.9, 0.81), ToolPair("c", "d", 0.5, 0.25)]
    pool, _ = combine_rank(pairs, 1)
    assert pool == ["a"]
    assert combine_rank([], 10) == ([], [])


def test_combine_rank_negative_products_rank_normally():
    from toolweaver.planner import ToolPair

    # negative anchor and pair scores multiply into a positive combined score
    pairs = [
        ToolPair("neg", "neg2", -0.8, 0.64),
        ToolPair("pos", "pos2", 0.5, 0.25),
        ToolPair("mix", "mix2", -0.5, -0.25),
    ]
    pool, ranked = combine_rank(pairs, 10)
    assert [p.anchor for p in ranked] == ["neg", "pos", "mix"]
    assert pool == ["neg", "neg2", "pos", "pos2", "mix", "mix2"]


def test_retrieval_params_clamp_n():
    params = RetrievalParams(k=3, n=100)
    assert params.n == 9
    with pytest.raises(ValueError):
        RetrievalParams(k=0)
    with pytest.raises(ValueError):
        RetrievalParams(neighbor_direction="sideways")


def test_score_scaling_leaves_orderings_unchanged(toy_kg):
    emb = HashedEmbedder()

    class Scaled:
        """Same embedder with every similarity effectively scaled by c > 0."""

        def __init__(self, c):
            self.c = c

        def embed(self, text):
            return emb.embed(text) * self.c

    q = "convert a cif file to smiles"
    base_c, base_pairs, base_pool = run_production(toy_kg, q, emb, 4, 3, 10)
    for c in (0.5, 2.0, 7.3):
        s_c, s_pairs, s_pool = run_production(toy_kg, q, Scaled(c), 4, 3, 10)
        assert [x.tool for x in s_c] == [x.tool for x in base_c]
        for cand in base_c:
            assert [(p.anchor, p.companion) for p in s_pairs[cand.tool]] == \
                   [(p.anchor, p.companion) for p in base_pairs[cand.tool]]
        assert s_pool == base_pool


# ---------------------------------------------------------------------------
# chain generation, validation, refinement
# ---------------------------------------------------------------------------

def test_parse_chain_wire_format(toy_kg):
    text = "noise\n CHAIN:  F ->C -> D \nWHY F: starts from the cif\nWHY D: safety text"
    chain = parse_chain_response(text, toy_kg, "q", ["F", "C", "D"])
    assert chain.tool_ids() == ["F", "C", "D"]
    assert chain.steps[0][1] == "starts from the cif"
    assert chain.steps[1][1] == ""


def test_generate_chain_scripted(toy_kg):
    provider = ScriptedChatProvider(table={"PLAN: build a safety report": "CHAIN: F -> C -> D"})
    chain = generate_chain("build a safety report", ["F", "C", "D"], toy_kg, provider)
    assert chain.tool_ids() == ["F", "C", "D"]
    assert not chain.repaired


def test_generate_chain_repair_round(toy_kg):
    provider = ScriptedChatProvider(table={
        "PLAN: q1": "CHAIN: F -> Z",
        "PLAN RETRY: q1": "CHAIN: F -> C",
    })
    chain = generate_chain("q1", ["F", "C"], toy_kg, provider)
    assert chain.tool_ids() == ["F", "C"]
    assert chain.repaired
    assert len(provider.calls) == 2


def test_generate_chain_garbage_twice_errors(toy_kg):
    provider = ScriptedChatProvider(table={}, fallback="no chain here")
    with pytest.raises(PlanningError) as exc:
        generate_chain("q2", ["F"], toy_kg, provider)
    assert len(exc.value.responses) == 2


def test_validate_chain_examples(toy_kg):
    ok = ToolChain(steps=[("F", ""), ("C", ""), ("D", "")], query="q")
    assert validate_chain(toy_kg, ok) == []
    bad = ToolChain(steps=[("F", ""), ("D", "")], query="q")
    violations = validate_chain(toy_kg, bad)
    assert len(violations) == 1
    assert (violations[0].from_tool, violations[0].to_tool) == ("F", "D")
    single = ToolChain(steps=[("E", "")], query="q")
    assert validate_chain(toy_kg, single) == []


def test_refine_chain_scripted(toy_kg):
    provider = ScriptedChatProvider(table={"REFINE 1: q3": "CHAIN: F -> A -> B"})
    failed = ToolChain(steps=[("F", ""), ("C", ""), ("D", "")], query="q3")
    feedback = PlanFeedback(verdict="failure", reasons=["tool C unavailable"])
    refined = refine_chain("q3", failed, feedback, toy_kg, ["F", "A", "B", "C", "D"], provider)
    assert refined.tool_ids() == ["F", "A", "B"]
    assert not refined.no_change
    prompt = provider.calls[0]["prompt"]
    assert "tool C unavailable" in prompt
    assert "F -> C -> D" in prompt


def test_refine_chain_reretrieve_runs_retrieval_once(toy_kg):
    class CountingEmbedder(HashedEmbedder):
        def __init__(self):
            super().__init__()
            self.embed_calls = 0

        def embed(self, text):
            self.embed_calls += 1
            return super().embed(text)

    emb = CountingEmbedder()
    provider = ScriptedChatProvider(table={"REFINE 1: q4": "CHAIN: F -> C"})
    failed = ToolChain(steps=[("F", ""), ("D", "")], query="q4")
    feedback = PlanFeedback(verdict="failure", reasons=["bad ordering"],
                            suggested_edits=["re-retrieve"])
    refined = refine_chain("q4", failed, feedback, toy_kg, ["F", "D"], provider,
                           embedder=emb, params=RetrievalParams(k=3, d=2, n=9))
    assert refined.tool_ids() == ["F", "C"]
    # the augmented query, every tool function and every explored pair embed once
    assert emb.embed_calls > 0


def test_refine_chain_no_change_flag(toy_kg):
    provider = ScriptedChatProvider(table={"REFINE 2: q5": "CHAIN: F -> C"})
    failed = ToolChain(steps=[("F", ""), ("C", "")], query="q5")
    feedback = PlanFeedback(verdict="failure", reasons=["still wrong"])
    refined = refine_chain("q5", failed, feedback, toy_kg, ["F", "C"], provider, round_index=2)
    assert refined.no_change


def test_plan_feedback_requires_reasons():
    with pytest.raises(ValueError):
        PlanFeedback(verdict="failure", reasons=[])


def test_pipeline_determinism(toy_kg):
    emb = HashedEmbedder()
    provider = ScriptedChatProvider(table={"PLAN: same query": "CHAIN: F -> C -> D"})
    q = "same query"
    runs = []
    for _ in range(3):
        candidates, per_anchor, pool = run_production(toy_kg, q, emb, 5, 3, 10)
        chain = generate_chain(q, pool, toy_kg, provider)
        runs.append(([(c.tool, c.score) for c in candidates], pool, chain.tool_ids()))
    assert runs[0] == runs[1] == runs[2]

"""Brute-force reference for the three retrieval stages, used by several tests.

Independent of the production planner: edges are re-derived from the format
rule, reachability uses repeated full edge-set expansion instead of frontier
BFS, and ranking re-sorts from scratch with the documented tie-breaks.
"""

from __future__ import annotations

import random

from toolweaver.kg import ToolGraph, ToolSpec
from toolweaver.planner import combine_rank, explore_subgraphs, retrieve_full
from toolweaver.providers import similarity

WORDS = [
    "convert", "predict", "protein", "molecule", "structure", "search", "energy",
    "smiles", "crystal", "dataset", "train", "classify", "fold", "spectrum",
    "price", "stability", "adsorption", "alignment", "patent", "caption",
]
FORMATS = ["text", "smiles", "cas", "cif", "csv", "seq", "spec", "feat"]


def random_kg(rng: random.Random, max_tools: int = 40) -> ToolGraph:
    n = rng.randint(1, max_tools)
    tools = {}
    for i in range(n):
        tid = f"t{i:02d}"
        functions = tuple(
            " ".join(rng.choices(WORDS, k=rng.randint(2, 5)))
            for _ in range(rng.randint(1, 3))
        )
        tools[tid] = ToolSpec(
            id=tid,
            name=" ".join(rng.choices(WORDS, k=2)),
            purpose="p",
            functions=functions,
            input_formats=tuple(rng.sample(FORMATS, rng.randint(1, 3))),
            output_formats=tuple(rng.sample(FORMATS, rng.randint(1, 3))),
        )
    ids = sorted(tools)
    if len(ids) >= 2 and rng.random() < 0.3:
        a, b = rng.sample(ids, 2)
        tools[b] = ToolSpec(
            id=b, name=tools[a].name, purpose="p", functions=tools[a].functions,
            input_formats=tools[b].input_formats, output_formats=tools[b].output_formats,
        )
    return ToolGraph.build(tools, [])


def oracle_edges(kg: ToolGraph) -> set[tuple[str, str]]:
    edges = set()
    for a in kg.tools.values():
        for b in kg.tools.values():
            if a.id != b.id and set(a.output_formats) & set(b.input_formats):
                edges.add((a.id, b.id))
    for t in kg.triples:
        if t.predicate == "can_precede" and t.subject in kg.tools and t.object in kg.tools:
            if t.subject != t.object:
                edges.add((t.subject, t.object))
    return edges


def oracle_reachable(edges: set[tuple[str, str]], start: str, d: int) -> set[str]:
    reach: set[str] = set()
    current = {start}
    for _ in range(d):
        current = {b for (a, b) in edges if a in current}
        reach |= current
    reach.discard(start)
    return reach


def oracle_stages(kg: ToolGraph, q: str, emb, k: int, d: int, n: int):
    qv = emb.embed(q)
    scored = []
    for tid in sorted(kg.tools):
        spec = kg.tools[tid]
        best = max(similarity(qv, emb.embed(f"{spec.name}: {fn}")) for fn in spec.functions)
        scored.append((tid, best))
    scored.sort(key=lambda r: (-r[1], r[0]))
    candidates = scored[:k]

    edges = oracle_edges(kg)
    pair_lists = {}
    all_pairs = []
    for tid, a_score in candidates:
        spec = kg.tools[tid]
        rows = []
        for other in sorted(oracle_reachable(edges, tid, d)):
            o = kg.tools[other]
            text = (f"{spec.name}: {' ; '.join(spec.functions)} ; "
                    f"{o.name}: {' ; '.join(o.functions)}")
            s = similarity(qv, emb.embed(text))
            rows.append((tid, other, s, a_score * s))
        if not rows:
            rows = [(tid, tid, a_score, a_score * a_score)]
        rows.sort(key=lambda r: (-r[2], r[0], r[1]))
        pair_lists[tid] = rows[:k]
        all_pairs.extend(rows[:k])

    ranked = sorted(all_pairs, key=lambda r: (-r[3], r[0], r[1]))
    pool: list[str] = []
    for anchor, companion, _, _ in ranked:
        members = (anchor,) if anchor == companion else (anchor, companion)
        for tid in members:
            if tid not in pool:
                pool.append(tid)
    return candidates, pair_lists, pool[:n]


def run_production(kg, q, emb, k, d, n):
    candidates = retrieve_full(kg, q, k, emb)
    per_anchor = explore_subgraphs(kg, q, candidates, d, k, emb)
    pool, _ = combine_rank([p for c in candidates for p in per_anchor[c.tool]], n)
    return candidates, per_anchor, pool


def stages_match(kg, q, emb, k, d, n) -> bool:
    candidates, per_anchor, pool = run_production(kg, q, emb, k, d, n)
    o_candidates, o_pairs, o_pool = oracle_stages(kg, q, emb, k, d, n)
    if [(c.tool, c.score) for c in candidates] != o_candidates:
        return False
    for c in candidates:
        got = [(p.anchor, p.companion, p.pair_score, p.combined) for p in per_anchor[c.tool]]
        if got != o_pairs[c.tool]:
            return False
    return pool == o_pool

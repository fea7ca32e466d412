"""Four-stage retrieval planning over the tool graph.

Stage 1 ranks every tool against the question, stage 2 scores each candidate's
d-hop neighborhood as anchor/companion pairs, stage 3 ranks the pairs by the
product of anchor score and pair score into a bounded tool pool, and stage 4
prompts the chat provider to lay the pool out as an ordered chain. Every stage
breaks score ties lexicographically by tool id so results are reproducible and
oracle-checkable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import PlanningError
from .kg import ToolGraph, neighborhood
from .providers import ChatExchange, similarity

TOOL_ID = re.compile(r"^[A-Za-z0-9_\-]+$")
CHAIN_LINE = re.compile(r"^\s*CHAIN\s*:\s*(.+?)\s*$", re.MULTILINE)
WHY_LINE = re.compile(r"^\s*WHY\s+([A-Za-z0-9_\-]+)\s*:\s*(.*?)\s*$", re.MULTILINE)

PLANNER_SYSTEM = (
    "You sequence scientific tools into an executable chain. "
    "Answer with one line 'CHAIN: id1 -> id2 -> ...' using only listed tool ids, "
    "optionally followed by 'WHY id: reason' lines."
)


def one_line(text: str) -> str:
    """Collapse whitespace so a query can serve as a marker-line suffix."""
    return " ".join(text.split())


@dataclass
class RetrievalParams:
    k: int = 5
    d: int = 3
    n: int = 10
    neighbor_direction: str = "out"

    def __post_init__(self) -> None:
        if self.k < 1 or self.d < 1 or self.n < 1:
            raise ValueError("k, d and n must be positive")
        if self.neighbor_direction not in ("out", "in", "both"):
            raise ValueError(f"bad neighbor_direction '{self.neighbor_direction}'")
        # the pair stage yields at most k^2 pairs, so a larger pool is meaningless
        if self.n > self.k * self.k:
            self.n = self.k * self.k


@dataclass(frozen=True)
class RetrievalCandidate:
    tool: str
    score: float


@dataclass(frozen=True)
class ToolPair:
    anchor: str
    companion: str
    pair_score: float
    combined: float

    @property
    def degenerate(self) -> bool:
        return self.anchor == self.companion


@dataclass
class ToolChain:
    steps: list[tuple[str, str]]  # (tool id, rationale)
    query: str
    source_pool: list[str] = field(default_factory=list)
    repaired: bool = False
    no_change: bool = False

    def tool_ids(self) -> list[str]:
        return [tool for tool, _ in self.steps]


@dataclass
class PlanFeedback:
    verdict: str  # "success" | "failure"
    reasons: list[str] = field(default_factory=list)
    suggested_edits: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.verdict == "failure" and not self.reasons:
            raise ValueError("failure feedback needs at least one reason")


def pair_text(a, b) -> str:
    """Semantic concatenation of two tools' name+function metadata."""
    return f"{a.text()} ; {b.text()}"


def retrieve_full(kg: ToolGraph, q: str, k: int, embedder) -> list[RetrievalCandidate]:
    """Top-k tools by question similarity over each tool's function texts.

    A tool's score is the max similarity across its per-function texts;
    equal scores order by ascending tool id.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    qv = embedder.embed(q)
    scored = []
    for tid in kg.sorted_ids():
        spec = kg.tools[tid]
        score = max(similarity(qv, embedder.embed(text)) for text in spec.function_texts())
        scored.append(RetrievalCandidate(tool=tid, score=score))
    scored.sort(key=lambda c: (-c.score, c.tool))
    return scored[:k]


def explore_subgraphs(kg: ToolGraph, q: str, candidates: list[RetrievalCandidate],
                      d: int, k: int, embedder,
                      direction: str = "out") -> dict[str, list[ToolPair]]:
    """Per-anchor top-k companion pairs from the anchor's d-hop neighborhood.

    Anchors with no reachable neighbors contribute one degenerate self-pair
    whose pair score is the anchor's own retrieval score, keeping single-tool
    answers in play for the combination stage.
    """
    qv = embedder.embed(q)
    anchor_scores = {c.tool: c.score for c in candidates}
    result: dict[str, list[ToolPair]] = {}
    for cand in candidates:
        anchor = kg.tools[cand.tool]
        hood = neighborhood(kg, cand.tool, d, direction=direction)
        pairs: list[ToolPair] = []
        for other_id in sorted(hood):
            text = pair_text(anchor, kg.tools[other_id])
            s = similarity(qv, embedder.embed(text))
            pairs.append(ToolPair(anchor=cand.tool, companion=other_id, pair_score=s,
                                  combined=anchor_scores[cand.tool] * s))
        if not pairs:
            pairs = [ToolPair(anchor=cand.tool, companion=cand.tool, pair_score=cand.score,
                              combined=cand.score * cand.score)]
        pairs.sort(key=lambda p: (-p.pair_score, p.anchor, p.companion))
        result[cand.tool] = pairs[:k]
    return result


def combine_rank(pairs: list[ToolPair], n: int) -> tuple[list[str], list[ToolPair]]:
    """Rank all pairs by combined score and pool the tools they mention.

    The pool keeps first appearances from the ranked pair list (anchor before
    companion within a pair) and truncates at n.
    """
    ranked = sorted(pairs, key=lambda p: (-p.combined, p.anchor, p.companion))
    pool: list[str] = []
    for p in ranked:
        for tid in ((p.anchor,) if p.degenerate else (p.anchor, p.companion)):
            if tid not in pool:
                pool.append(tid)
    return pool[:n], ranked


def parse_chain_response(text: str, kg: ToolGraph, query: str, pool: list[str]) -> ToolChain:
    """Parse the plan wire format; raises :class:`PlanningError` on any defect."""
    m = CHAIN_LINE.search(text)
    if not m:
        raise PlanningError("response has no 'CHAIN:' line", responses=[text])
    ids = [part.strip() for part in m.group(1).split("->")]
    ids = [part for part in ids if part]
    if not ids:
        raise PlanningError("CHAIN line lists no tools", responses=[text])
    for tid in ids:
        if not TOOL_ID.match(tid):
            raise PlanningError(f"malformed tool id '{tid}'", responses=[text])
        if tid not in kg.tools:
            raise PlanningError(f"unknown tool id '{tid}'", responses=[text])
    rationales = {tid: why for tid, why in WHY_LINE.findall(text)}
    steps = [(tid, rationales.get(tid, "")) for tid in ids]
    return ToolChain(steps=steps, query=query, source_pool=list(pool))


def _pool_block(kg: ToolGraph, pool: list[str]) -> str:
    lines = []
    for tid in pool:
        spec = kg.tools[tid]
        lines.append(
            f"- {tid} ({','.join(spec.input_formats)} -> {','.join(spec.output_formats)}): {spec.text()}"
        )
        succ = [s for s in kg.successors(tid)]
        if succ:
            lines.append(f"  feeds into: {', '.join(succ)}")
    return "\n".join(lines)


def build_plan_prompt(q: str, kg: ToolGraph, pool: list[str], marker: str,
                      memory_block: str = "", extra: str = "") -> str:
    parts = [marker]
    if memory_block:
        parts.append("EARLIER TURNS:\n" + memory_block)
    parts.append("QUESTION: " + q)
    parts.append("TOOLS:\n" + _pool_block(kg, pool))
    if extra:
        parts.append(extra)
    parts.append("Reply with 'CHAIN: id1 -> id2 -> ...' and optional 'WHY id: reason' lines.")
    return "\n".join(parts)


def generate_chain(q: str, pool: list[str], kg: ToolGraph, chat_provider,
                   memory_block: str = "") -> ToolChain:
    """Prompt for a chain over the pool; one repair round on a bad response."""
    if not pool:
        raise PlanningError("empty tool pool")
    marker = f"PLAN: {one_line(q)}"
    prompt = build_plan_prompt(q, kg, pool, marker, memory_block)
    first = chat_provider.chat(ChatExchange.single(PLANNER_SYSTEM, prompt))
    try:
        return parse_chain_response(first, kg, q, pool)
    except PlanningError as e:
        retry_marker = f"PLAN RETRY: {one_line(q)}"
        retry_prompt = build_plan_prompt(
            q, kg, pool, retry_marker, memory_block,
            extra=f"Your previous reply could not be used: {e}. Reply again in the exact format.",
        )
        second = chat_provider.chat(ChatExchange.single(PLANNER_SYSTEM, retry_prompt))
        try:
            chain = parse_chain_response(second, kg, q, pool)
        except PlanningError:
            raise PlanningError("unusable plan after repair round",
                                responses=[first, second]) from None
        chain.repaired = True
        return chain


@dataclass(frozen=True)
class ChainViolation:
    index: int
    from_tool: str
    to_tool: str
    detail: str


def validate_chain(kg: ToolGraph, chain: ToolChain) -> list[ChainViolation]:
    """Flag consecutive steps with no compatibility edge between them."""
    out: list[ChainViolation] = []
    ids = chain.tool_ids()
    for i in range(len(ids) - 1):
        a, b = ids[i], ids[i + 1]
        if not kg.has_edge(a, b):
            a_out = ",".join(kg.tools[a].output_formats) if a in kg.tools else "?"
            b_in = ",".join(kg.tools[b].input_formats) if b in kg.tools else "?"
            out.append(ChainViolation(index=i, from_tool=a, to_tool=b,
                                      detail=f"outputs [{a_out}] never feed inputs [{b_in}]"))
    return out


def refine_chain(q: str, chain: ToolChain, feedback: PlanFeedback, kg: ToolGraph,
                 pool: list[str], chat_provider, embedder=None,
                 params: RetrievalParams | None = None, round_index: int = 1,
                 memory_block: str = "") -> ToolChain:
    """Re-plan after a failed round.

    If the feedback suggests re-retrieval the whole retrieve/explore/combine
    pipeline reruns once with the failure reasons appended to the question,
    and the refreshed pool replaces the old one in the prompt. A refined chain
    identical to the failed one is accepted but flagged ``no_change``.
    """
    if feedback.verdict != "failure":
        raise ValueError("refine_chain expects failure feedback")
    if "re-retrieve" in feedback.suggested_edits:
        if embedder is None or params is None:
            raise ValueError("re-retrieval needs an embedder and retrieval params")
        augmented = q + " ; " + " ; ".join(feedback.reasons)
        candidates = retrieve_full(kg, augmented, params.k, embedder)
        per_anchor = explore_subgraphs(kg, augmented, candidates, params.d, params.k,
                                       embedder, direction=params.neighbor_direction)
        pool, _ = combine_rank([p for plist in per_anchor.values() for p in plist], params.n)

    failed = " -> ".join(chain.tool_ids())
    extra = (
        f"The previous chain '{failed}' failed.\n"
        + "FAILURE REASONS:\n" + "\n".join(f"- {r}" for r in feedback.reasons)
        + ("\nSUGGESTED EDITS: " + ", ".join(feedback.suggested_edits) if feedback.suggested_edits else "")
    )
    marker = f"REFINE {round_index}: {one_line(q)}"
    prompt = build_plan_prompt(q, kg, pool, marker, memory_block, extra=extra)
    first = chat_provider.chat(ChatExchange.single(PLANNER_SYSTEM, prompt))
    try:
        refined = parse_chain_response(first, kg, q, pool)
    except PlanningError as e:
        retry_marker = f"REFINE RETRY {round_index}: {one_line(q)}"
        retry_prompt = build_plan_prompt(q, kg, pool, retry_marker, memory_block,
                                         extra=extra + f"\nYour previous reply could not be used: {e}.")
        second = chat_provider.chat(ChatExchange.single(PLANNER_SYSTEM, retry_prompt))
        try:
            refined = parse_chain_response(second, kg, q, pool)
        except PlanningError:
            raise PlanningError("unusable refined plan after repair round",
                                responses=[first, second]) from None
        refined.repaired = True
    if refined.tool_ids() == chain.tool_ids():
        refined.no_change = True
    return refined

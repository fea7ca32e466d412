"""Benchmark harness: dataset schema, the three metrics, and item generation.

Metrics follow the completion/plan/answer trio. The deterministic judge needs
no model: plan accuracy is longest-common-subsequence overlap against the
reference chain, answer accuracy is key-fact containment. The llm judge mode
asks a chat provider for a 0-100 similarity grade instead.
"""

from __future__ import annotations

import json
import random
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .errors import DatasetError, TerminalPlanningError
from .kg import ToolGraph
from .planner import ToolChain, one_line, validate_chain
from .providers import ChatExchange
from .summarizer import SessionMemory

JUDGE_SYSTEM = (
    "You grade similarity between a generated artifact and a reference on a 0-100 scale. "
    "Reply with 'SCORE: <integer>'."
)

_SCORE_LINE = re.compile(r"^\s*SCORE\s*:\s*(\d{1,3})\s*$", re.MULTILINE)
_WORD = re.compile(r"[a-z0-9]+")


@dataclass
class BenchItem:
    id: str
    level: int
    question: str
    reference_chain: list[str]
    reference_answer: str
    key_facts: list[str] = field(default_factory=list)
    unreviewed: bool = False

    def validate(self) -> None:
        if self.level not in (1, 2):
            raise DatasetError(f"item {self.id}: level must be 1 or 2")
        if self.level == 1 and len(self.reference_chain) != 1:
            raise DatasetError(f"item {self.id}: level 1 needs a single-tool reference chain")
        if self.level == 2 and len(self.reference_chain) < 2:
            raise DatasetError(f"item {self.id}: level 2 needs at least two tools")
        if not self.question.strip():
            raise DatasetError(f"item {self.id}: empty question")
        if not self.reference_answer.strip():
            raise DatasetError(f"item {self.id}: empty reference answer")

    def to_dict(self) -> dict:
        doc = {
            "id": self.id,
            "level": self.level,
            "question": self.question,
            "reference_chain": list(self.reference_chain),
            "reference_answer": self.reference_answer,
        }
        if self.key_facts:
            doc["key_facts"] = list(self.key_facts)
        if self.unreviewed:
            doc["unreviewed"] = True
        return doc


def load_dataset(source: str | list) -> list[BenchItem]:
    """Parse and validate a dataset (path or inline list); any defect aborts."""
    if isinstance(source, str):
        try:
            with open(source, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as e:
            raise DatasetError(f"cannot read dataset {source}: {e}") from None
        except json.JSONDecodeError as e:
            raise DatasetError(f"dataset {source} is not valid JSON: {e}") from None
    else:
        raw = source
    if not isinstance(raw, list) or not raw:
        raise DatasetError("dataset must be a non-empty JSON array")
    items = []
    seen: set[str] = set()
    for obj in raw:
        item = BenchItem(
            id=str(obj["id"]),
            level=int(obj["level"]),
            question=str(obj["question"]),
            reference_chain=[str(t) for t in obj["reference_chain"]],
            reference_answer=str(obj["reference_answer"]),
            key_facts=[str(f) for f in obj.get("key_facts", [])],
            unreviewed=bool(obj.get("unreviewed", False)),
        )
        if item.id in seen:
            raise DatasetError(f"duplicate item id '{item.id}'")
        seen.add(item.id)
        item.validate()
        items.append(item)
    return items


def lcs_length(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0] * (len(b) + 1)
        for j, y in enumerate(b, start=1):
            cur[j] = prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1])
        prev = cur
    return prev[-1]


@dataclass
class JudgeConfig:
    mode: str = "deterministic"  # or "llm"
    provider: object = None
    diagnostics: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.mode not in ("deterministic", "llm"):
            raise DatasetError(f"unknown judge mode '{self.mode}'")
        if self.mode == "llm" and self.provider is None:
            raise DatasetError("llm judge mode needs a chat provider")

    def _llm_score(self, marker: str, generated: str, reference: str) -> float:
        prompt = (
            f"{marker}\nGENERATED:\n{generated}\nREFERENCE:\n{reference}\n"
            "Grade the similarity from 0 to 100."
        )
        reply = self.provider.chat(ChatExchange.single(JUDGE_SYSTEM, prompt))
        m = _SCORE_LINE.search(reply)
        if not m or not (0 <= int(m.group(1)) <= 100):
            self.diagnostics.append(f"unparseable judge reply for marker '{marker}'")
            return 0.0
        return int(m.group(1)) / 100.0


def plan_accuracy(generated: list[str], reference: list[str], judge: JudgeConfig) -> float:
    """Alignment of the generated chain with the reference chain, in [0, 1]."""
    if not reference:
        raise DatasetError("reference chain must be non-empty")
    if judge.mode == "llm":
        return judge._llm_score("JUDGE PLAN:", " -> ".join(generated), " -> ".join(reference))
    return lcs_length(generated, reference) / len(reference)


def default_key_facts(reference: str) -> list[str]:
    return [tok for tok in _WORD.findall(reference.lower()) if len(tok) >= 4]


def answer_accuracy(generated: str, reference: str, judge: JudgeConfig,
                    key_facts: list[str] | None = None) -> float:
    """Fraction of key facts present in the generated answer (case-insensitive)."""
    if not reference:
        raise DatasetError("reference answer must be non-empty")
    if judge.mode == "llm":
        return judge._llm_score("JUDGE ANSWER:", generated, reference)
    if not generated:
        return 0.0
    facts = key_facts if key_facts else default_key_facts(reference)
    if not facts:
        return 1.0
    hay = generated.lower()
    hit = sum(1 for fact in facts if fact.lower() in hay)
    return hit / len(facts)


@dataclass
class BenchReport:
    pass_rate: float
    plan_accuracy: float
    answer_accuracy: float
    per_item: list[dict]

    def to_json(self) -> str:
        doc = {
            "pass_rate": self.pass_rate,
            "plan_accuracy": self.plan_accuracy,
            "answer_accuracy": self.answer_accuracy,
            "per_item": self.per_item,
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    def to_table(self) -> str:
        header = f"{'item':<16} {'ok':<4} {'plan':>6} {'answer':>7}"
        rows = [header, "-" * len(header)]
        for entry in self.per_item:
            rows.append(
                f"{entry['id']:<16} {'yes' if entry['completed'] else 'no':<4} "
                f"{entry['plan_accuracy']:>6.3f} {entry['answer_accuracy']:>7.3f}"
            )
        rows.append("-" * len(header))
        rows.append(
            f"pass_rate={self.pass_rate:.4f} plan={self.plan_accuracy:.4f} "
            f"answer={self.answer_accuracy:.4f}"
        )
        return "\n".join(rows)


def _run_item(engine, item: BenchItem, judge: JudgeConfig) -> dict:
    session = SessionMemory(session_id=f"bench-{item.id}")
    completed = True
    answer_text = ""
    chain_ids: list[str] = []
    trace_docs: list[dict] = []
    error = ""
    try:
        answer, traces = engine.run_session_query(session, item.question)
        answer_text = answer.text
        if traces:
            chain_ids = traces[-1].chain.tool_ids()
            trace_docs = [t.to_dict(include_timestamps=False) for t in traces]
    except TerminalPlanningError as e:
        completed = False
        error = str(e)
    plan = plan_accuracy(chain_ids, item.reference_chain, judge) if completed else 0.0
    answer_score = (
        answer_accuracy(answer_text, item.reference_answer, judge, item.key_facts)
        if completed else 0.0
    )
    return {
        "id": item.id,
        "level": item.level,
        "completed": completed,
        "plan_accuracy": plan,
        "answer_accuracy": answer_score,
        "chain": chain_ids,
        "answer": answer_text,
        "error": error,
        "traces": trace_docs,
    }


def run_bench(dataset: str | list, engine, judge: JudgeConfig | None = None,
              parallel: int = 1) -> BenchReport:
    """Run every item in a fresh session and aggregate the three metrics."""
    items = load_dataset(dataset)
    judge = judge or JudgeConfig()
    if parallel > 1:
        with ThreadPoolExecutor(max_workers=parallel) as pool:
            results = list(pool.map(lambda it: _run_item(engine, it, judge), items))
    else:
        results = [_run_item(engine, item, judge) for item in items]
    count = len(results)
    return BenchReport(
        pass_rate=sum(1.0 for r in results if r["completed"]) / count,
        plan_accuracy=sum(r["plan_accuracy"] for r in results) / count,
        answer_accuracy=sum(r["answer_accuracy"] for r in results) / count,
        per_item=results,
    )


def generate_items(kg: ToolGraph, chat_provider, count: int, level: int,
                   seed: int = 0, engine=None) -> tuple[list[BenchItem], list[str]]:
    """Draft benchmark items by sampling the graph; outputs stay unreviewed.

    Level 1 samples single tools; level 2 samples walks along compatibility
    edges so every consecutive pair is executable. Reference answers come from
    running the engine when one is supplied, else stay as a placeholder.
    Returns (items, diagnostics) where diagnostics explain skipped items.
    """
    if not kg.tools:
        raise DatasetError("cannot generate items from an empty graph")
    if level not in (1, 2):
        raise DatasetError("level must be 1 or 2")
    rng = random.Random(seed)
    ids = kg.sorted_ids()
    items: list[BenchItem] = []
    diagnostics: list[str] = []
    attempts = 0
    while len(items) < count and attempts < count * 10:
        attempts += 1
        if level == 1:
            chain = [rng.choice(ids)]
        else:
            start_options = [t for t in ids if kg.successors(t)]
            if not start_options:
                diagnostics.append("graph has no compatibility edges; no level-2 chains exist")
                break
            tool = rng.choice(start_options)
            chain = [tool]
            length = rng.randint(2, 4)
            while len(chain) < length:
                succ = kg.successors(chain[-1])
                if not succ:
                    break
                chain.append(rng.choice(succ))
            if len(chain) < 2:
                continue
        marker = f"GENQ L{level}: {' -> '.join(chain)}"
        specs = "\n".join(f"- {tid}: {kg.tools[tid].text()}" for tid in chain)
        prompt = f"{marker}\nTOOLS:\n{specs}\nWrite one question this chain answers."
        try:
            question = chat_provider.chat(ChatExchange.single(
                "You write benchmark questions answerable by the given tool chain.", prompt))
        except Exception as e:  # noqa: BLE001 - provider failure skips the item
            diagnostics.append(f"chain {' -> '.join(chain)}: provider failure: {e}")
            continue
        if not question.strip():
            diagnostics.append(f"chain {' -> '.join(chain)}: provider returned no question")
            continue
        probe = ToolChain(steps=[(t, "") for t in chain], query=question)
        if validate_chain(kg, probe):
            diagnostics.append(f"chain {' -> '.join(chain)}: sampler produced a non-executable chain")
            continue
        reference_answer = "(unreviewed draft)"
        if engine is not None:
            try:
                answer, _ = engine.run_session_query(
                    SessionMemory(session_id=f"genitem-{len(items)}"), question)
                reference_answer = answer.text
            except TerminalPlanningError as e:
                diagnostics.append(f"chain {' -> '.join(chain)}: engine run failed: {e}")
                continue
        items.append(BenchItem(
            id=f"gen-{level}-{len(items)}",
            level=level,
            question=one_line(question),
            reference_chain=chain,
            reference_answer=reference_answer,
            unreviewed=True,
        ))
    return items, diagnostics

"""Engine assembly: wires graph, providers, tool host and safety into one unit."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .errors import ConfigError
from .executor import RetryPolicy
from .kg import ToolGraph, load_graph
from .planner import RetrievalParams, ToolChain, combine_rank, explore_subgraphs, generate_chain, retrieve_full
from .providers import build_chat_provider, build_embedder
from .safety.screen import DEFAULT_THRESHOLD, SafeguardDB, SafetyContext
from .summarizer import FinalAnswer, SessionMemory, run_session_query
from .toolhost import ToolHost


def data_path(name: str) -> Path:
    """Path to a bundled data file shipped inside the package."""
    return Path(str(resources.files("toolweaver").joinpath("data", name)))


@dataclass
class EngineConfig:
    kg_path: str = ""
    tools_path: str = ""
    safeguard_path: str = ""
    llm: dict = field(default_factory=dict)
    embed: dict = field(default_factory=dict)
    retrieval: dict = field(default_factory=dict)
    retry: dict = field(default_factory=dict)
    safety_threshold: float = DEFAULT_THRESHOLD
    max_refinements: int = 3
    host: str = "127.0.0.1"
    port: int = 8720
    persist_dir: str = ""

    @classmethod
    def from_dict(cls, doc: dict) -> "EngineConfig":
        return cls(
            kg_path=doc.get("kg", ""),
            tools_path=doc.get("tools", ""),
            safeguard_path=doc.get("safeguard", ""),
            llm=dict(doc.get("llm", {})),
            embed=dict(doc.get("embed", {})),
            retrieval=dict(doc.get("retrieval", {})),
            retry=dict(doc.get("retry", {})),
            safety_threshold=float(doc.get("safety_threshold", DEFAULT_THRESHOLD)),
            max_refinements=int(doc.get("max_refinements", 3)),
            host=doc.get("bind", {}).get("host", "127.0.0.1"),
            port=int(doc.get("bind", {}).get("port", 8720)),
            persist_dir=doc.get("persist_dir", ""),
        )

    @classmethod
    def from_file(cls, path: str) -> "EngineConfig":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as e:
            raise ConfigError(f"cannot read config file {path}: {e}") from None
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {path} is not valid JSON: {e}") from None
        return cls.from_dict(doc)

    @classmethod
    def bundled_demo(cls) -> "EngineConfig":
        return cls(
            kg_path=str(data_path("demo.json")),
            tools_path=str(data_path("tools_demo.json")),
            safeguard_path=str(data_path("safeguard_db.json")),
        )

    def resolve(self) -> "Engine":
        for label, path in (("kg", self.kg_path), ("tools", self.tools_path),
                            ("safeguard", self.safeguard_path)):
            if not path:
                raise ConfigError(f"config is missing the '{label}' path")
            if not os.path.isfile(path):
                raise ConfigError(f"{label} file not found: {path}")
        with open(self.kg_path, "r", encoding="utf-8") as fh:
            kg = load_graph(fh.read())
        toolhost = ToolHost.from_file(self.tools_path)
        safeguard = SafeguardDB.from_file(self.safeguard_path)
        try:
            params = RetrievalParams(
                k=int(self.retrieval.get("k", 5)),
                d=int(self.retrieval.get("d", 3)),
                n=int(self.retrieval.get("n", 10)),
                neighbor_direction=self.retrieval.get("neighbor_direction", "out"),
            )
            retry = RetryPolicy(
                max_attempts=int(self.retry.get("max_attempts", 2)),
                adjust_via_llm=bool(self.retry.get("adjust_via_llm", True)),
            )
        except ValueError as e:
            raise ConfigError(str(e)) from None
        return Engine(
            kg=kg,
            toolhost=toolhost,
            chat=build_chat_provider(self.llm),
            embedder=build_embedder(self.embed),
            params=params,
            retry_policy=retry,
            safety_ctx=SafetyContext(safeguard, threshold=self.safety_threshold),
            max_refinements=self.max_refinements,
        )


@dataclass
class Engine:
    kg: ToolGraph
    toolhost: ToolHost
    chat: object
    embedder: object
    params: RetrievalParams = field(default_factory=RetrievalParams)
    retry_policy: RetryPolicy = field(default_factory=RetryPolicy)
    safety_ctx: SafetyContext | None = None
    max_refinements: int = 3

    def retrieval_stages(self, q: str):
        """(candidates, per-anchor pairs, pool, ranked pairs) for one question."""
        candidates = retrieve_full(self.kg, q, self.params.k, self.embedder)
        per_anchor = explore_subgraphs(self.kg, q, candidates, self.params.d,
                                       self.params.k, self.embedder,
                                       direction=self.params.neighbor_direction)
        all_pairs = [p for tid in [c.tool for c in candidates] for p in per_anchor[tid]]
        pool, ranked = combine_rank(all_pairs, self.params.n)
        return candidates, per_anchor, pool, ranked

    def plan_pool(self, q: str) -> list[str]:
        return self.retrieval_stages(q)[2]

    def plan(self, q: str, memory_block: str = "") -> ToolChain:
        pool = self.plan_pool(q)
        return generate_chain(q, pool, self.kg, self.chat, memory_block=memory_block)

    def run_session_query(self, session: SessionMemory, q: str, event_sink=None,
                          max_refinements: int | None = None) -> tuple[FinalAnswer, list]:
        return run_session_query(self, session, q, event_sink=event_sink,
                                 max_refinements=max_refinements)

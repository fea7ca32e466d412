from __future__ import annotations

import json

import pytest

from toolweaver.engine import Engine, data_path
from toolweaver.executor import RetryPolicy
from toolweaver.kg import ToolGraph, load_graph
from toolweaver.planner import RetrievalParams
from toolweaver.providers import HashedEmbedder, ScriptedChatProvider
from toolweaver.safety.screen import SafeguardDB, SafetyContext
from toolweaver.toolhost import ToolHost, ToolManifest


@pytest.fixture(scope="session")
def toy_kg() -> ToolGraph:
    return load_graph(data_path("toykg6.json").read_text())


@pytest.fixture(scope="session")
def demo_kg() -> ToolGraph:
    return load_graph(data_path("demo.json").read_text())


@pytest.fixture(scope="session")
def safeguard_db() -> SafeguardDB:
    return SafeguardDB.from_file(str(data_path("safeguard_db.json")))


def _host(path: str) -> ToolHost:
    host = ToolHost()
    with open(path, "r", encoding="utf-8") as fh:
        host.register_all([ToolManifest.from_dict(o) for o in json.load(fh)])
    return host


@pytest.fixture()
def toy_host() -> ToolHost:
    return _host(str(data_path("tools_toy.json")))


@pytest.fixture()
def demo_host() -> ToolHost:
    return _host(str(data_path("tools_demo.json")))


def make_engine(kg: ToolGraph, host: ToolHost, db: SafeguardDB,
                scripts: dict[str, str], fallback: str = "",
                max_refinements: int = 3, params: RetrievalParams | None = None) -> Engine:
    return Engine(
        kg=kg,
        toolhost=host,
        chat=ScriptedChatProvider(table=dict(scripts), fallback=fallback),
        embedder=HashedEmbedder(),
        params=params or RetrievalParams(),
        retry_policy=RetryPolicy(),
        safety_ctx=SafetyContext(db),
        max_refinements=max_refinements,
    )


@pytest.fixture()
def demo_engine_factory(demo_kg, demo_host, safeguard_db):
    def factory(scripts: dict[str, str], fallback: str = "", max_refinements: int = 3) -> Engine:
        return make_engine(demo_kg, demo_host, safeguard_db, scripts, fallback, max_refinements)

    return factory


@pytest.fixture()
def toy_engine_factory(toy_kg, toy_host, safeguard_db):
    def factory(scripts: dict[str, str], fallback: str = "", max_refinements: int = 3) -> Engine:
        return make_engine(toy_kg, toy_host, safeguard_db, scripts, fallback, max_refinements)

    return factory

"""Command-line entry points mirroring the gateway's capabilities."""

from __future__ import annotations

import json
import os
import sys

import click

from .bench import JudgeConfig, run_bench
from .engine import EngineConfig, data_path
from .errors import ToolweaverError
from .kg import load_graph, neighborhood, validate_graph
from .safety.screen import DEFAULT_THRESHOLD, SafeguardDB, screen_molecule, screen_protein
from .summarizer import SessionMemory

CONFIG_ENV = "SCITOOL_CONFIG"


def _load_config(config: str | None) -> EngineConfig:
    path = config or os.environ.get(CONFIG_ENV, "")
    if path:
        return EngineConfig.from_file(path)
    return EngineConfig.bundled_demo()


def _resolve_engine(config: str | None):
    try:
        return _load_config(config).resolve()
    except ToolweaverError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)


@click.group()
def main() -> None:
    """Knowledge-graph-driven orchestration of scientific tool chains."""


@main.command()
@click.option("--config", type=click.Path(), default=None, help="Engine config JSON file.")
@click.option("--host", default=None)
@click.option("--port", type=int, default=None)
@click.option("--static", "static_dir", type=click.Path(), default=None,
              help="Directory of console assets to serve at /.")
def serve(config, host, port, static_dir) -> None:
    """Start the HTTP gateway."""
    import uvicorn

    from .gateway import create_app

    cfg = _load_config(config)
    try:
        engine = cfg.resolve()
    except ToolweaverError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)
    app = create_app(engine, persist_dir=cfg.persist_dir, static_dir=static_dir or "")
    uvicorn.run(app, host=host or cfg.host, port=port or cfg.port, log_level="warning")


@main.command()
@click.option("--query", required=True)
@click.option("--config", type=click.Path(), default=None)
def plan(query, config) -> None:
    """Generate a chain of tools for a query without executing it."""
    engine = _resolve_engine(config)
    try:
        chain = engine.plan(query)
    except ToolweaverError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)
    click.echo(" -> ".join(chain.tool_ids()))
    for tool, why in chain.steps:
        if why:
            click.echo(f"  {tool}: {why}")


@main.command()
@click.option("--query", required=True)
@click.option("--session", "session_id", default=None,
              help="Session id; with persist_dir set, memory carries across invocations.")
@click.option("--config", type=click.Path(), default=None)
def run(query, session_id, config) -> None:
    """Run a query end to end and print the answer payload as JSON."""
    cfg = _load_config(config)
    try:
        engine = cfg.resolve()
    except ToolweaverError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)
    memory = SessionMemory(session_id=session_id or "cli")
    state_path = ""
    if session_id and cfg.persist_dir:
        state_path = os.path.join(cfg.persist_dir, f"{session_id}.json")
        if os.path.isfile(state_path):
            with open(state_path, "r", encoding="utf-8") as fh:
                memory = SessionMemory.from_dict(json.load(fh))
    try:
        answer, traces = engine.run_session_query(memory, query)
    except ToolweaverError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)
    if state_path:
        os.makedirs(cfg.persist_dir, exist_ok=True)
        with open(state_path, "w", encoding="utf-8") as fh:
            json.dump(memory.to_dict(), fh, indent=2)
    payload = {
        "answer": answer.to_dict(),
        "plan": traces[-1].chain.tool_ids() if traces else [],
        "rounds": len(traces),
        "trace": traces[-1].to_dict() if traces else None,
    }
    click.echo(json.dumps(payload, indent=2))


@main.group()
def kg() -> None:
    """Inspect and validate a knowledge graph file."""


@kg.command("validate")
@click.option("--kg", "kg_path", type=click.Path(exists=True), default=None)
def kg_validate(kg_path) -> None:
    path = kg_path or str(data_path("demo.json"))
    with open(path, "r", encoding="utf-8") as fh:
        graph = load_graph(fh.read(), strict=False)
    violations = validate_graph(graph)
    if not violations:
        click.echo(f"ok: {len(graph.tools)} tools, {len(graph.compat)} compat edges, no violations")
        return
    for v in violations:
        click.echo(f"{v.kind} @ {v.where}: {v.detail}")
    sys.exit(1)


@kg.command("neighbors")
@click.option("--tool", required=True)
@click.option("--d", "depth", type=int, default=1)
@click.option("--direction", type=click.Choice(["out", "in", "both"]), default="out")
@click.option("--kg", "kg_path", type=click.Path(exists=True), default=None)
def kg_neighbors(tool, depth, direction, kg_path) -> None:
    path = kg_path or str(data_path("demo.json"))
    with open(path, "r", encoding="utf-8") as fh:
        graph = load_graph(fh.read())
    try:
        hood = neighborhood(graph, tool, depth, direction=direction)
    except ToolweaverError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)
    click.echo(json.dumps({"tool": tool, "d": depth, "neighbors": sorted(hood)}))


@main.group()
def safety() -> None:
    """Safety screening against the safeguard database."""


@safety.command("screen")
@click.option("--smiles", default=None)
@click.option("--sequence", default=None)
@click.option("--db", "db_path", type=click.Path(exists=True), default=None)
@click.option("--threshold", type=float, default=DEFAULT_THRESHOLD)
def safety_screen(smiles, sequence, db_path, threshold) -> None:
    if (smiles is None) == (sequence is None):
        click.echo("error: provide exactly one of --smiles or --sequence", err=True)
        sys.exit(2)
    db = SafeguardDB.from_file(db_path or str(data_path("safeguard_db.json")))
    try:
        if smiles is not None:
            verdict = screen_molecule(smiles, db, threshold)
        else:
            verdict = screen_protein(sequence, db, threshold)
    except ToolweaverError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)
    click.echo(json.dumps(verdict.to_dict(), indent=2))


@main.group()
def bench() -> None:
    """Benchmark harness."""


@bench.command("run")
@click.option("--dataset", type=click.Path(exists=True), required=True)
@click.option("--judge", type=click.Choice(["deterministic", "llm"]), default="deterministic")
@click.option("--parallel", type=int, default=1)
@click.option("--out", type=click.Path(), default=None)
@click.option("--config", type=click.Path(), default=None)
def bench_run(dataset, judge, parallel, out, config) -> None:
    engine = _resolve_engine(config)
    judge_cfg = JudgeConfig(mode=judge, provider=engine.chat if judge == "llm" else None)
    try:
        report = run_bench(dataset, engine, judge_cfg, parallel=parallel)
    except ToolweaverError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)
    click.echo(report.to_table())
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(report.to_json())
        click.echo(f"report written to {out}")


if __name__ == "__main__":
    main()

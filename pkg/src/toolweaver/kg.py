"""Tool knowledge graph: tool specs, attribute triples and compatibility edges.

The graph couples two layers. Tools are the primary nodes, described by
:class:`ToolSpec`. Attribute triples record the same metadata (and anything
extra) in subject/predicate/object form. Tool-to-tool compatibility edges are
derived, never stored: an edge ``a -> b`` exists when some output format of
``a`` is an input format of ``b``, plus any explicit ``can_precede`` triples.
"""

from __future__ import annotations

import json
import re
from collections import defaultdict
from dataclasses import dataclass, field

from .errors import (
    DuplicateToolError,
    GraphParseError,
    InvalidFieldError,
    MissingFieldError,
    UnknownRiskLevelError,
    UnknownToolError,
)

FORMAT_TOKEN = re.compile(r"^[a-z0-9_]+$")

RISK_LEVELS = ("low", "high")

# predicate -> ToolSpec field it mirrors
SCHEMA_RELATIONS = {
    "has_function": "functions",
    "has_input_format": "input_formats",
    "has_output_format": "output_formats",
    "has_category": "category",
    "has_source": "source",
    "has_risk_level": "risk_level",
}

# explicit precedence triples add compat edges on top of the format rule
CAN_PRECEDE = "can_precede"


@dataclass(frozen=True)
class ToolSpec:
    """Static description of one tool as recorded in the graph."""

    id: str
    name: str
    purpose: str
    functions: tuple[str, ...]
    input_formats: tuple[str, ...]
    output_formats: tuple[str, ...]
    category: str = ""
    source: str = ""
    risk_level: str = "low"

    def text(self) -> str:
        """Conjoined name/function text used for semantic scoring."""
        return f"{self.name}: {' ; '.join(self.functions)}"

    def function_texts(self) -> list[str]:
        return [f"{self.name}: {fn}" for fn in self.functions]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "purpose": self.purpose,
            "functions": list(self.functions),
            "input_formats": list(self.input_formats),
            "output_formats": list(self.output_formats),
            "category": self.category,
            "source": self.source,
            "risk_level": self.risk_level,
        }


@dataclass(frozen=True)
class Triple:
    subject: str
    predicate: str
    object: str


@dataclass(frozen=True)
class Violation:
    """One invariant violation found by :func:`validate_graph`."""

    kind: str
    where: str
    detail: str


@dataclass
class ToolGraph:
    """Immutable-by-convention graph; build via :func:`load_graph` or :meth:`build`."""

    tools: dict[str, ToolSpec]
    triples: list[Triple]
    compat: set[tuple[str, str]] = field(default_factory=set)

    def __post_init__(self) -> None:
        self._succ: dict[str, list[str]] = defaultdict(list)
        self._pred: dict[str, list[str]] = defaultdict(list)
        for a, b in sorted(self.compat):
            self._succ[a].append(b)
            self._pred[b].append(a)

    @classmethod
    def build(cls, tools: dict[str, ToolSpec], triples: list[Triple]) -> "ToolGraph":
        return cls(tools=tools, triples=triples, compat=derive_compat(tools, triples))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ToolGraph):
            return NotImplemented
        return (
            self.tools == other.tools
            and self.triples == other.triples
            and self.compat == other.compat
        )

    def successors(self, tool_id: str) -> list[str]:
        return list(self._succ.get(tool_id, []))

    def predecessors(self, tool_id: str) -> list[str]:
        return list(self._pred.get(tool_id, []))

    def has_edge(self, a: str, b: str) -> bool:
        return (a, b) in self.compat

    def require(self, tool_id: str) -> ToolSpec:
        try:
            return self.tools[tool_id]
        except KeyError:
            raise UnknownToolError(f"unknown tool id '{tool_id}'") from None

    def sorted_ids(self) -> list[str]:
        return sorted(self.tools)


def derive_compat(tools: dict[str, ToolSpec], triples: list[Triple]) -> set[tuple[str, str]]:
    """Edge (a, b) iff outputs(a) meet inputs(b), a != b; can_precede triples add more."""
    edges: set[tuple[str, str]] = set()
    for a_id, a in tools.items():
        outs = set(a.output_formats)
        for b_id, b in tools.items():
            if a_id == b_id:
                continue
            if outs.intersection(b.input_formats):
                edges.add((a_id, b_id))
    for t in triples:
        if t.predicate == CAN_PRECEDE and t.subject in tools and t.object in tools:
            if t.subject != t.object:
                edges.add((t.subject, t.object))
    return edges


def _require(obj: dict, key: str, where: str):
    if key not in obj:
        raise MissingFieldError(f"{where}: missing required field '{key}'")
    return obj[key]


def _parse_tool(obj: dict, index: int, strict: bool) -> ToolSpec:
    where = f"tools[{index}]"
    tool_id = _require(obj, "id", where)
    if not isinstance(tool_id, str) or not tool_id:
        raise InvalidFieldError(f"{where}: id must be a non-empty string")
    where = f"tool '{tool_id}'"
    name = _require(obj, "name", where)
    purpose = _require(obj, "purpose", where)
    functions = _require(obj, "functions", where)
    input_formats = _require(obj, "input_formats", where)
    output_formats = _require(obj, "output_formats", where)
    risk = obj.get("risk_level", "low")
    if risk not in RISK_LEVELS:
        raise UnknownRiskLevelError(f"{where}: unknown risk level '{risk}'")
    for label, seq in (("functions", functions), ("input_formats", input_formats), ("output_formats", output_formats)):
        if not isinstance(seq, list) or not all(isinstance(x, str) for x in seq):
            raise InvalidFieldError(f"{where}: {label} must be a list of strings")
        if strict and not seq:
            raise InvalidFieldError(f"{where}: {label} must be non-empty")
    if strict:
        for fmt in list(input_formats) + list(output_formats):
            if not FORMAT_TOKEN.match(fmt):
                raise InvalidFieldError(f"{where}: bad format token '{fmt}'")
    return ToolSpec(
        id=tool_id,
        name=str(name),
        purpose=str(purpose),
        functions=tuple(functions),
        input_formats=tuple(input_formats),
        output_formats=tuple(output_formats),
        category=str(obj.get("category", "")),
        source=str(obj.get("source", "")),
        risk_level=risk,
    )


def load_graph(document: str | bytes, strict: bool = True) -> ToolGraph:
    """Parse the JSON graph file format into a ToolGraph.

    Deterministic: identical bytes produce an equal graph. With ``strict=False``
    per-tool invariants (non-empty lists, format token shape) are left for
    :func:`validate_graph` to report instead of raising here.
    """
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as e:
        raise GraphParseError(e.msg, line=e.lineno, column=e.colno) from None
    if not isinstance(doc, dict):
        raise GraphParseError("top level must be a JSON object")
    version = doc.get("schema_version")
    if version != 1:
        raise GraphParseError(f"unsupported schema_version {version!r} (expected 1)")

    tools: dict[str, ToolSpec] = {}
    for i, obj in enumerate(doc.get("tools", [])):
        if not isinstance(obj, dict):
            raise GraphParseError(f"tools[{i}] is not an object")
        spec = _parse_tool(obj, i, strict)
        if spec.id in tools:
            raise DuplicateToolError(f"duplicate tool id '{spec.id}'")
        tools[spec.id] = spec

    triples: list[Triple] = []
    for i, arr in enumerate(doc.get("triples", [])):
        if not isinstance(arr, list) or len(arr) != 3 or not all(isinstance(x, str) for x in arr):
            raise InvalidFieldError(f"triples[{i}] must be a 3-element array of strings")
        triples.append(Triple(subject=arr[0], predicate=arr[1], object=arr[2]))

    return ToolGraph.build(tools, triples)


def save_graph(kg: ToolGraph) -> str:
    doc = {
        "schema_version": 1,
        "tools": [kg.tools[tid].to_dict() for tid in kg.tools],
        "triples": [[t.subject, t.predicate, t.object] for t in kg.triples],
    }
    return json.dumps(doc, indent=2, sort_keys=False)


def neighborhood(kg: ToolGraph, tool: str, d: int, direction: str = "out") -> set[str]:
    """Tools reachable from ``tool`` in 1..d compat hops, excluding the start.

    ``direction`` selects successor edges (``out``, default), predecessor
    edges (``in``) or both.
    """
    kg.require(tool)
    if d < 0:
        raise ValueError("d must be >= 0")
    if direction not in ("out", "in", "both"):
        raise ValueError(f"bad direction '{direction}'")

    def step(node: str) -> list[str]:
        if direction == "out":
            return kg.successors(node)
        if direction == "in":
            return kg.predecessors(node)
        return kg.successors(node) + kg.predecessors(node)

    seen: set[str] = set()
    frontier = {tool}
    for _ in range(d):
        nxt: set[str] = set()
        for node in frontier:
            for other in step(node):
                if other != tool and other not in seen:
                    nxt.add(other)
        if not nxt:
            break
        seen |= nxt
        frontier = nxt
    return seen


def validate_graph(kg: ToolGraph) -> list[Violation]:
    """Report every invariant violation; an empty list means the graph is valid."""
    out: list[Violation] = []

    for tid, spec in kg.tools.items():
        if tid != spec.id:
            out.append(Violation("id_mismatch", tid, f"map key '{tid}' != spec id '{spec.id}'"))
        if not spec.functions:
            out.append(Violation("empty_functions", tid, "functions must be non-empty"))
        for label, formats in (("input_formats", spec.input_formats), ("output_formats", spec.output_formats)):
            if not formats:
                out.append(Violation(f"empty_{label}", tid, f"{label} must be non-empty"))
            for fmt in formats:
                if not FORMAT_TOKEN.match(fmt):
                    out.append(Violation("bad_format_token", tid, f"{label} contains '{fmt}'"))
        if spec.risk_level not in RISK_LEVELS:
            out.append(Violation("bad_risk_level", tid, f"risk_level '{spec.risk_level}'"))

    expected = derive_compat(kg.tools, kg.triples)
    for edge in sorted(kg.compat - expected):
        out.append(Violation("spurious_edge", f"{edge[0]}->{edge[1]}", "edge lacks a format intersection"))
    for edge in sorted(expected - kg.compat):
        out.append(Violation("missing_edge", f"{edge[0]}->{edge[1]}", "formats intersect but edge is absent"))

    attribute_nodes = {t.object for t in kg.triples}
    for t in kg.triples:
        if t.subject not in kg.tools and t.subject not in attribute_nodes:
            out.append(Violation("dangling_subject", t.subject, f"triple ({t.subject}, {t.predicate}, {t.object})"))
        if t.predicate in SCHEMA_RELATIONS and t.subject in kg.tools:
            spec = kg.tools[t.subject]
            fld = SCHEMA_RELATIONS[t.predicate]
            value = getattr(spec, fld)
            if isinstance(value, tuple):
                if t.object not in value:
                    out.append(
                        Violation("inconsistent_triple", t.subject, f"{t.predicate} '{t.object}' not in spec {fld}")
                    )
            elif t.object != value:
                out.append(
                    Violation("inconsistent_triple", t.subject, f"{t.predicate} '{t.object}' != spec {fld} '{value}'")
                )
    return out

"""toolweaver: knowledge-graph-driven planning and execution of tool chains."""

from .engine import Engine, EngineConfig, data_path
from .kg import ToolGraph, ToolSpec, Triple, load_graph, neighborhood, validate_graph
from .planner import RetrievalParams, ToolChain
from .summarizer import FinalAnswer, SessionMemory

__version__ = "0.1.0"

__all__ = [
    "Engine",
    "EngineConfig",
    "data_path",
    "ToolGraph",
    "ToolSpec",
    "Triple",
    "load_graph",
    "neighborhood",
    "validate_graph",
    "RetrievalParams",
    "ToolChain",
    "FinalAnswer",
    "SessionMemory",
    "__version__",
]

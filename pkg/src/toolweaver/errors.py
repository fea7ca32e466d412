"""Exception hierarchy shared across the engine."""

from __future__ import annotations


class ToolweaverError(Exception):
    """Base class for every error raised by this package."""


class GraphError(ToolweaverError):
    """Problem with a tool knowledge graph document or structure."""


class GraphParseError(GraphError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class DuplicateToolError(GraphError):
    pass


class MissingFieldError(GraphError):
    pass


class InvalidFieldError(GraphError):
    pass


class UnknownRiskLevelError(GraphError):
    pass


class UnknownToolError(ToolweaverError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its arg; keep the plain message
        return Exception.__str__(self)


class ProviderError(ToolweaverError):
    pass


class ProviderTransportError(ProviderError):
    """Remote call failed after the configured retries; safe to retry later."""

    def __init__(self, message: str, attempts: int):
        super().__init__(f"{message} (after {attempts} attempts)")
        self.attempts = attempts
        self.retryable = True


class PlanningError(ToolweaverError):
    """Chain generation failed even after the repair round."""

    def __init__(self, message: str, responses: list[str] | None = None):
        super().__init__(message)
        self.responses = list(responses or [])


class InputPreparationError(ToolweaverError):
    def __init__(self, tool_id: str, missing: list[str]):
        super().__init__(f"could not prepare inputs for '{tool_id}': missing {', '.join(missing)}")
        self.tool_id = tool_id
        self.missing = list(missing)


class SmilesParseError(ToolweaverError):
    pass


class SequenceError(ToolweaverError):
    pass


class RegistryError(ToolweaverError):
    pass


class MissingInputError(ToolweaverError):
    def __init__(self, tool_id: str, missing: list[str]):
        super().__init__(f"tool '{tool_id}' invoked without required format(s): {', '.join(missing)}")
        self.missing = list(missing)


class OutputFormatViolation(ToolweaverError):
    pass


class TerminalPlanningError(ToolweaverError):
    """Every planning round errored out; diagnostics carry per-round details."""

    def __init__(self, message: str, diagnostics: list[str]):
        super().__init__(message)
        self.diagnostics = list(diagnostics)


class DatasetError(ToolweaverError):
    pass


class ConfigError(ToolweaverError):
    pass

"""Exception hierarchy shared by every stage of the pipeline."""
from __future__ import annotations

from typing import Any, Optional


class RDDLError(Exception):
    """Base class for all model and runtime errors."""

    def __init__(self, message: str, loc: Optional[Any] = None) -> None:
        self.message = message
        self.loc = loc
        if loc is not None:
            message = f"{message} (at {loc})"
        super().__init__(message)


class LexicalError(RDDLError):
    pass


class RDDLSyntaxError(RDDLError):

    def __init__(self, message: str, loc: Optional[Any] = None,
                 expected: tuple = ()) -> None:
        self.expected = tuple(expected)
        if expected:
            message = f"{message}; expected one of: {', '.join(expected)}"
        super().__init__(message, loc)


class DeprecatedConstructError(RDDLSyntaxError):
    pass


class ValidationError(RDDLError):
    """Raised when a validation report contains errors and the caller
    asked for a hard failure."""

    def __init__(self, diagnostics) -> None:
        self.diagnostics = list(diagnostics)
        lines = [str(d) for d in self.diagnostics if d.severity == "error"]
        super().__init__("model validation failed:\n  " + "\n  ".join(lines))


class GroundingError(RDDLError):
    pass


class RDDLTypeError(GroundingError):
    pass


class CycleError(RDDLError):

    def __init__(self, cycle: list) -> None:
        self.cycle = list(cycle)
        path = " -> ".join(self.cycle + self.cycle[:1])
        super().__init__(f"cyclic dependency between fluents: {path}")


class EvaluationError(RDDLError):
    pass


class SamplingError(EvaluationError):
    pass


class ActionError(RDDLError):
    """Unknown action, too many concurrent actions or a value of the wrong type."""


class PreconditionViolation(ActionError):
    pass


class StateInvariantViolation(RDDLError):
    pass


class EpisodeStateError(RDDLError):
    """Stepping an environment whose episode is over or poisoned."""


class RelaxationError(RDDLError):
    pass


class NumericalError(RDDLError):
    pass


class GraphStateError(RDDLError):
    """A relaxed graph was used out of order (e.g. backward before forward)."""

"""Exception hierarchy shared across the engine.

Every error carries a stable machine-readable ``code`` so the HTTP layer
can emit problem-detail bodies without string matching.
"""


class MmiaError(Exception):
    """Base class for all engine errors."""

    code = "error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class PreconditionError(MmiaError):
    """An operation was called with inputs that violate its contract."""

    code = "precondition-violation"


class BackendError(MmiaError):
    """The chat backend failed (transport failure after retries, or 4xx)."""

    code = "backend-error"


class ProtocolError(MmiaError):
    """Backend reply stayed malformed after all repair attempts."""

    code = "protocol-error"


class TemplateError(MmiaError):
    """Prompt template missing or a placeholder left unbound."""

    code = "template-error"


class ParseError(MmiaError):
    """Rule text failed to parse; carries source location."""

    code = "parse-error"

    def __init__(self, message: str, line: int = 1, column: int = 1, expected: str = ""):
        loc = f"line {line}, column {column}"
        full = f"{message} at {loc}" + (f" (expected {expected})" if expected else "")
        super().__init__(full)
        self.line = line
        self.column = column
        self.expected = expected


class EvaluationError(MmiaError):
    """Type mismatch or other fault while evaluating a rule against facts."""

    code = "evaluation-error"


class StateError(MmiaError):
    """Illegal lifecycle transition (e.g. re-approving an approved axiom)."""

    code = "state-error"


class ConfigurationError(MmiaError):
    """Unknown tool tag, template id, or invalid configuration value."""

    code = "configuration-error"


class IndexError_(MmiaError):
    """Vector index dimension mismatch."""

    code = "index-error"


class LedgerError(MmiaError):
    """Duplicate task entry in the cost ledger."""

    code = "ledger-error"


class AuditError(MmiaError):
    """A verifier backend failed mid-audit; the chain is never silently certified."""

    code = "audit-error"


class IncompleteInputError(MmiaError):
    """Aggregation was asked to combine incomplete sub-results."""

    code = "incomplete-input"


class ValidationError(MmiaError):
    """Structurally invalid data (negative counts, bad schema)."""

    code = "validation-error"


class StartupError(MmiaError):
    """Service failed to start (bad data directory, busy port)."""

    code = "startup-error"

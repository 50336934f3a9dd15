"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input value is outside the operation's domain."""


class ContractError(RuntimeError):
    """Caller and callee disagree about an invariant (a bug, not bad data)."""


class ConfigError(ValueError):
    """Malformed or inconsistent configuration; maps to CLI exit code 2."""


class TraceError(ValueError):
    """A trace file failed validation. Carries the offending line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line

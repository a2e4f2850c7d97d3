"""Exception hierarchy shared by the library and the CLI.

The CLI maps these onto exit codes: validation problems exit 1, numerical
tolerance breaches exit 2, I/O failures exit 3.
"""


class NwiseError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class UsageError(NwiseError, ValueError):
    """Bad arguments: mismatched lengths, out-of-range sites, wrong parity."""


class CapacityError(UsageError):
    """A dense operation was requested above the dense size cap."""


class ScenarioError(UsageError):
    """A scenario document failed strict validation."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if field:
            where.append(f"field '{field}'")
        if line is not None:
            where.append(f"line {line}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


class NumericalError(NwiseError, ArithmeticError):
    """A numerical invariant (norm, trace, tolerance) was breached."""

    exit_code = 2


class IntegrationError(NumericalError):
    """Norm drift during time integration exceeded the configured tolerance."""

    def __init__(self, message, max_drift=None, label=None):
        self.max_drift = max_drift
        self.label = label
        super().__init__(message)


class OutputError(NwiseError, OSError):
    """A scenario could not be read or a result could not be written."""

    exit_code = 3

"""Exception hierarchy shared by every module."""


class EprError(Exception):
    """Base class for all errors raised by eprworlds."""


class DeviceAlreadyFired(EprError):
    """A measuring device was asked to measure twice."""


class ComparisonBeforeMeasurement(EprError):
    """The comparison apparatus ran while a device record was still unset."""


class ComparisonAlreadyFired(EprError):
    """The comparison apparatus was asked to record twice."""


class IncompleteMeasurement(EprError):
    """Branches were requested from a state whose devices have not fired."""


class NoValidApproximation(EprError):
    """No common denominator within the cap keeps every non-negligible weight."""


class ProtocolError(EprError):
    """Diagnostic raised while reading an experiment file.

    Carries a 1-based ``line`` and ``col`` so the CLI can print
    ``file:line:col: message``.
    """

    def __init__(self, message, line, col=1):
        super().__init__(message)
        self.message = message
        self.line = line
        self.col = col

    def format(self, filename="<input>"):
        return f"{filename}:{self.line}:{self.col}: {self.message}"

    def __str__(self):
        return f"line {self.line}, col {self.col}: {self.message}"


class ProtocolSyntaxError(ProtocolError):
    """Malformed token or directive."""


class ProtocolSemanticError(ProtocolError):
    """Well-formed directive that breaks the measurement protocol."""


class ExecutionError(EprError):
    """A module error raised while executing step ``step`` of a plan."""

    def __init__(self, step, cause):
        super().__init__(f"step {step}: {type(cause).__name__}: {cause}")
        self.step = step
        self.cause = cause

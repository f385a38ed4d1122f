class KpzLabError(Exception):
    """Base class for errors raised by kpz_lab."""


class ValidationError(KpzLabError, ValueError):
    """An argument or configuration value was rejected."""


class JammedError(KpzLabError):
    """No particle can move: the mobile set is empty."""


class InvariantError(KpzLabError, AssertionError):
    """A TASEP state violates its bookkeeping invariants."""


class QuadratureError(KpzLabError, ArithmeticError):
    """A Nystrom matrix contains non-finite entries."""


class OutputError(KpzLabError, OSError):
    """The output path cannot be written."""

class InputError(ValueError):
    """Malformed input: bad arity, unknown symbol, carrier mismatch, syntax."""


class PreconditionFailure(RuntimeError):
    """A documented precondition of an operation does not hold."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class BoundExceeded(RuntimeError):
    """A search hit its size cap; the answer is inconclusive at this bound."""

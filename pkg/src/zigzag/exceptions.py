"""Exception hierarchy shared by all modules."""


class ZigzagError(Exception):
    """Base class for errors raised by this package."""


class FieldError(ZigzagError, ValueError):
    """Invalid field order or an element outside the field."""


class DimensionError(ZigzagError, ValueError):
    """Shapes of matrices, vectors or arrays do not match."""


class SingularMatrixError(ZigzagError, ArithmeticError):
    """A linear system has no unique solution."""


class RowspaceError(ZigzagError, ValueError):
    """Bad index, mismatched vectors, or non-prime base for subspace work."""


class CodeConstructionError(ZigzagError, ValueError):
    """Parameters do not define a valid code."""


class DecodeError(ZigzagError):
    """Too many erasures, or the code failed to decode a pattern it should."""

    def __init__(self, message, pattern=None):
        super().__init__(message)
        self.pattern = pattern


class SearchExhaustedError(ZigzagError):
    """Coefficient search ran out of tries; use a larger field."""


class RebuildError(ZigzagError):
    """A rebuild request cannot be carried out as asked."""

    def __init__(self, message, erased=None):
        super().__init__(message)
        self.erased = erased


class CapExceededError(ZigzagError, ValueError):
    """A request exceeds the desk-scale limits for exhaustive checks."""


class UncorrectableError(ZigzagError):
    """The observed shards fall outside what the decoder can correct."""

    def __init__(self, message, diagnosis=None):
        super().__init__(message)
        self.diagnosis = diagnosis

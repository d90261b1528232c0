"""Exception hierarchy shared across the package."""


class CsbError(Exception):
    """Base class for all package-specific errors."""


class StructuralError(CsbError, ValueError):
    """A table references an out-of-range index or is otherwise malformed.

    Distinct from an axiom violation: a structurally broken object cannot
    even be scanned for the algebraic laws.
    """


class SchemaError(CsbError, ValueError):
    """A JSON document does not match the expected schema."""


class PreconditionError(CsbError, ValueError):
    """An operation was called outside its stated precondition."""


class HypothesisError(CsbError, ValueError):
    """An input pair does not satisfy the embedding hypotheses.

    Carries the name of the failed hypothesis so callers can report it.
    """


class AmbiguousPredecessorError(CsbError, RuntimeError):
    """Two rules invert to the same value: the map was never injective."""


class ConstructionError(CsbError, RuntimeError):
    """An internal uniqueness invariant failed during construction.

    Signals that a non-embedding slipped past validation.
    """


class CertificateFalsificationError(CsbError, RuntimeError):
    """A certified witness failed its independent re-check."""

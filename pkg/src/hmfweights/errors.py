"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed or out-of-range user input."""


class SymbolContextError(InputError):
    """Two coefficients were built over different symbol contexts."""


class UndecidableError(Exception):
    """A comparison needed for progress is Indeterminate under the symbol bounds."""


class ConsistencyError(AssertionError):
    """An internal invariant failed. Always a bug or a counterexample."""

"""Exception hierarchy shared across the package."""


class OrdmedError(Exception):
    """Base class for domain errors (CLI maps these to exit code 1)."""


class ParameterError(OrdmedError, ValueError):
    """An argument violates a documented invariant."""


class SizeGuardError(OrdmedError):
    """A combinatorial guard was exceeded; try a smaller instance."""


class ParseError(OrdmedError):
    """Malformed input file; carries a 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConvergenceError(OrdmedError):
    """An iterative method hit its iteration cap; carries the count."""

    def __init__(self, message: str, iterations: int):
        self.iterations = iterations
        super().__init__(f"{message} (after {iterations} iterations)")

"""Exception types shared across the workbench."""

from __future__ import annotations


class ValidationError(ValueError):
    """A value violates a domain invariant (range, step, schema)."""


class IngestError(ValidationError):
    """A CSV row or file failed validation; carries row numbers."""

    def __init__(self, message: str, rows: tuple[int, ...] = ()):
        super().__init__(message)
        self.rows = rows


class FitConvergenceError(RuntimeError):
    """Distribution fit did not converge within the iteration budget."""

    def __init__(self, message: str, residuals: tuple[float, float]):
        super().__init__(f"{message} (residuals: mass={residuals[0]:.3e}, median={residuals[1]:.3e})")
        self.residuals = residuals


class DegenerateSampleError(ValueError):
    """Paired sample has zero variance or too few observations."""


class AggregationError(ValueError):
    """Pooling failed, e.g. no coherent participants were selected."""


class ProtocolError(RuntimeError):
    """A session operation arrived out of protocol order."""

    def __init__(self, message: str, expected: str | None = None):
        super().__init__(message)
        self.expected = expected

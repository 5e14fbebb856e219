"""Workbench for forecasting binary adversarial actions.

Elicits decomposed judgments about an adversary's decision problem (his
status-quo utility and his success probability), recomposes them into a
forecast of whether he acts through four behavioral choice rules, and
evaluates direct vs. recomposed forecasts with Brier scores and Bayesian
paired comparisons.
"""

from advforecast.errors import (
    AggregationError,
    DegenerateSampleError,
    FitConvergenceError,
    IngestError,
    ProtocolError,
    ValidationError,
)
from advforecast.judgments import (
    IntervalResponse,
    JudgmentSet,
    KnowledgeLevel,
    Probability,
    Question,
    interval_from_selection,
    midpoint,
)

__all__ = [
    "AggregationError",
    "DegenerateSampleError",
    "FitConvergenceError",
    "IngestError",
    "IntervalResponse",
    "JudgmentSet",
    "KnowledgeLevel",
    "Probability",
    "ProtocolError",
    "Question",
    "ValidationError",
    "interval_from_selection",
    "midpoint",
]

__version__ = "0.1.0"

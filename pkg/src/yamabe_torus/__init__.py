"""Periodic solutions of the spinorial Yamabe equation on flat tori ``ell S^1 x S^1``."""

from .errors import (
    BoundViolation,
    BracketError,
    ConvergenceError,
    DegenerateError,
    DomainError,
    NoBranchError,
    ToleranceError,
    UnderflowError,
    YamabeTorusError,
)
from .params import ModelParams

__version__ = "0.1.0"

__all__ = [
    "BoundViolation",
    "BracketError",
    "ConvergenceError",
    "DegenerateError",
    "DomainError",
    "ModelParams",
    "NoBranchError",
    "ToleranceError",
    "UnderflowError",
    "YamabeTorusError",
    "__version__",
]

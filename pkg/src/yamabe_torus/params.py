"""Physical parameters of the torus problem."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError


@dataclass(frozen=True)
class ModelParams:
    """Dirac eigenvalue ``lam`` on the second circle and circumference factor ``ell``.

    The first circle has total length ``2*pi*ell``. ``lam = 1`` corresponds to
    the trivial spin structure, ``lam = 1/2`` to the nontrivial one, but any
    positive value is admitted.
    """

    lam: float
    ell: float

    def __post_init__(self):
        for name in ("lam", "ell"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be a positive finite number, got {value!r}")
            object.__setattr__(self, name, float(value))

    @property
    def constant_K(self) -> float:
        """First-integral constant of the constant-length solution."""
        return self.lam / 2

    @property
    def min_half_period(self) -> float:
        """Limit of the half period as K approaches lam/2."""
        return math.pi / (2 * self.lam)

    @property
    def period_length(self) -> float:
        return 2 * math.pi * self.ell

    @property
    def first_branch_point(self) -> float:
        return 1 / (2 * self.lam)

    @property
    def constant_volume(self) -> float:
        return 4 * math.pi**2 * self.lam**2 * self.ell

    @property
    def volume_ceiling(self) -> float:
        """Large-ell limit of the single-winding volume."""
        return 8 * math.pi * self.lam

    def with_ell(self, ell: float) -> "ModelParams":
        return ModelParams(self.lam, ell)

"""Bands for the state coordinate and for the FX quote."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class Band:
    """Interval [x_minus, x_plus] that confines the state process."""

    x_minus: float = 0.0
    x_plus: float = 1.0

    def __post_init__(self):
        if not self.x_minus < self.x_plus:
            raise ValidationError(
                f"band requires x_minus < x_plus, got [{self.x_minus}, {self.x_plus}]"
            )

    @property
    def width(self) -> float:
        return self.x_plus - self.x_minus

    @property
    def mid(self) -> float:
        return 0.5 * (self.x_minus + self.x_plus)

    def grid(self, n: int) -> np.ndarray:
        return np.linspace(self.x_minus, self.x_plus, n)


@dataclass(frozen=True)
class FxBand:
    """FX-quote band [s_minus, s_plus] with the mid quote inside."""

    s_minus: float
    s_mid: float
    s_plus: float

    def __post_init__(self):
        if not 0.0 < self.s_minus < self.s_mid < self.s_plus:
            raise ValidationError(
                "fx band requires 0 < s_minus < s_mid < s_plus, got "
                f"({self.s_minus}, {self.s_mid}, {self.s_plus})"
            )

    @property
    def width(self) -> float:
        return self.s_plus - self.s_minus

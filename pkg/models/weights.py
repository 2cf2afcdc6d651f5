"""Level-weight sequences used by popularity scoring and topic blending."""

from __future__ import annotations

from enum import Enum
from typing import List

from pydantic import BaseModel, ConfigDict, Field, model_validator


class SequenceVariant(str, Enum):
    ARITHMETIC = "arithmetic"
    GEOMETRIC = "geometric"
    HARMONIC = "harmonic"


class WeightSequence(BaseModel):
    """Decreasing per-level weights w(l), l >= 1.

    arithmetic: w(l) = max(c - (l-1)d, floor)
    geometric:  w(l) = c * r**(l-1)
    harmonic:   w(l) = (c + (l-1)b) ** -G

    ``scale`` multiplies every weight; it exists so that scale invariance of
    the blend can be exercised without touching the variant parameters.
    """

    model_config = ConfigDict(frozen=True)

    variant: SequenceVariant = SequenceVariant.ARITHMETIC
    c: float = Field(default=1.0, gt=0)
    d: float = Field(default=0.25, ge=0)
    r: float = Field(default=0.5, gt=0, le=1)
    b: float = Field(default=1.0, ge=0)
    G: float = Field(default=1.0, ge=0)
    floor: float = Field(default=0.0, ge=0)
    scale: float = Field(default=1.0, gt=0)

    @model_validator(mode="after")
    def _check_harmonic_base(self):
        # c > 0 and b >= 0 keep every harmonic base positive
        if self.variant == SequenceVariant.HARMONIC and self.c <= 0:
            raise ValueError("harmonic base c must be positive")
        return self

    def weight_at(self, level: int) -> float:
        """Weight of a node ``level`` levels away (direct replies are level 1)."""
        if level < 1:
            raise ValueError(f"level must be >= 1, got {level}")
        step = level - 1
        if self.variant == SequenceVariant.ARITHMETIC:
            value = max(self.c - step * self.d, self.floor)
        elif self.variant == SequenceVariant.GEOMETRIC:
            value = self.c * self.r ** step
        else:
            value = (self.c + step * self.b) ** (-self.G)
        return self.scale * value

    def weights(self, depth: int) -> List[float]:
        """[w(1), ..., w(depth)]"""
        return [self.weight_at(level) for level in range(1, depth + 1)]

    def first_weight(self) -> float:
        """w(1): c for arithmetic/geometric, c**-G for harmonic (times scale)."""
        return self.weight_at(1)

    def scaled(self, gamma: float) -> "WeightSequence":
        return self.model_copy(update={"scale": self.scale * gamma})

    def describe(self) -> str:
        if self.variant == SequenceVariant.ARITHMETIC:
            return f"arithmetic(c={self.c}, d={self.d}, floor={self.floor})"
        if self.variant == SequenceVariant.GEOMETRIC:
            return f"geometric(c={self.c}, r={self.r})"
        return f"harmonic(c={self.c}, b={self.b}, G={self.G})"


def weight_at(seq: WeightSequence, level: int) -> float:
    """Standalone wrapper for WeightSequence.weight_at."""
    return seq.weight_at(level)

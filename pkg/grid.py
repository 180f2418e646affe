import math
import logging
from dataclasses import dataclass
from enum import IntEnum
from typing import Union

import numpy as np

from errors import EvenN, TooSmall, NonFinite, IndexOutOfRange, ValidationError

# Configure logging
logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


class Indicator(IntEnum):
    """Grid indicator: 0 starts the grid at 0, 1 shifts it by half a step"""
    ZERO = 0
    ONE = 1

    @classmethod
    def coerce(cls, value: Union[int, "Indicator"]) -> "Indicator":
        """Accept 0/1 (or an Indicator) and reject anything else"""
        try:
            return cls(int(value))
        except (TypeError, ValueError):
            raise ValidationError(f"Indicator must be 0 or 1, got {value!r}")

    def flipped(self) -> "Indicator":
        return Indicator(1 - int(self))


@dataclass(frozen=True)
class UniformGrid:
    """Uniform grid of N (odd) nodes on [0, 2π); nodes are 1-based in the public API"""
    N: int
    indicator: Indicator

    @property
    def n(self) -> int:
        return (self.N - 1) // 2

    @property
    def step(self) -> float:
        return TWO_PI / self.N

    @property
    def offset(self) -> float:
        """Position of the first node"""
        return int(self.indicator) * math.pi / self.N

    @property
    def nodes(self) -> np.ndarray:
        # Closed form per node, no cumulative addition
        i = np.arange(self.N, dtype=float)
        return TWO_PI * i / self.N + int(self.indicator) * math.pi / self.N

    def node(self, i: int) -> float:
        """Node t_i for 1 <= i <= N"""
        if not 1 <= i <= self.N:
            raise IndexOutOfRange(f"Node index {i} outside 1..{self.N}")
        return TWO_PI * (i - 1) / self.N + int(self.indicator) * math.pi / self.N

    def shifted(self) -> "UniformGrid":
        """The same node count on the other indicator"""
        return UniformGrid(self.N, self.indicator.flipped())


def make_grid(N: int, indicator: Union[int, Indicator] = Indicator.ZERO) -> UniformGrid:
    """Build the uniform grid Δ_N^(I)"""
    if isinstance(N, bool) or int(N) != N:
        raise ValidationError(f"Node count must be an integer, got {N!r}")
    N = int(N)
    if N % 2 == 0:
        raise EvenN(f"Node count must be odd, got N={N}")
    if N < 3:
        raise TooSmall(f"Node count must be at least 3, got N={N}")

    return UniformGrid(N, Indicator.coerce(indicator))


def wrap_to_period(t: float) -> float:
    """Reduce t modulo 2π into [0, 2π)"""
    if not math.isfinite(t):
        raise NonFinite(f"Cannot wrap non-finite value {t!r}")

    wrapped = math.fmod(t, TWO_PI)
    if wrapped < 0.0:
        wrapped += TWO_PI
    # Tiny negative inputs round up to exactly 2π
    if wrapped >= TWO_PI:
        wrapped = 0.0
    return wrapped


def wrap_array(t: np.ndarray) -> np.ndarray:
    """Vectorized wrap_to_period"""
    t = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t)):
        raise NonFinite("Cannot wrap non-finite values")
    wrapped = np.mod(t, TWO_PI)
    return np.where(wrapped >= TWO_PI, 0.0, wrapped)

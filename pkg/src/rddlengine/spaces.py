"""Space descriptors for actions, states and observations.

Sampling from a side that is unbounded draws from a unit-scale
distribution anchored at the finite side (or at zero): a standard normal
when both sides are open, one plus an exponential offset otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Tuple

from .engine import distributions as D
from .engine.rng import RandomSource
from .model import Member


@dataclass(frozen=True)
class Binary:
    kind = "binary"

    def contains(self, value) -> bool:
        return isinstance(value, bool)

    def sample(self, rng: RandomSource) -> bool:
        return rng.uniform() < 0.5

    def describe(self) -> str:
        return "binary"


def _open_sample(rng: RandomSource, lo: float, hi: float) -> float:
    if math.isinf(lo) and math.isinf(hi):
        return D.standard_normal(rng)
    if math.isinf(lo):
        return hi - D.exponential(rng, 1.0)
    if math.isinf(hi):
        return lo + D.exponential(rng, 1.0)
    return lo + (hi - lo) * rng.uniform()


def _bound_text(x) -> str:
    if x == math.inf:
        return "inf"
    if x == -math.inf:
        return "-inf"
    return f"{x:g}" if isinstance(x, float) else str(x)


@dataclass(frozen=True)
class IntegerInterval:
    low: float = -math.inf
    high: float = math.inf
    kind = "integer-interval"

    def contains(self, value) -> bool:
        return (isinstance(value, int) and not isinstance(value, bool)
                and self.low <= value <= self.high)

    def sample(self, rng: RandomSource) -> int:
        # open sides spread over roughly ten integers
        if math.isinf(self.low) and math.isinf(self.high):
            return int(math.floor(10.0 * D.standard_normal(rng)))
        if math.isinf(self.low):
            return int(self.high) - int(10.0 * D.exponential(rng, 1.0))
        if math.isinf(self.high):
            return int(self.low) + int(10.0 * D.exponential(rng, 1.0))
        return rng.integers(int(self.low), int(self.high))

    def describe(self) -> str:
        return f"integer-interval[{_bound_text(self.low)}, {_bound_text(self.high)}]"


@dataclass(frozen=True)
class RealBox:
    low: float = -math.inf
    high: float = math.inf
    kind = "real-box"

    def contains(self, value) -> bool:
        return (isinstance(value, (int, float)) and not isinstance(value, bool)
                and math.isfinite(value) and self.low <= value <= self.high)

    def sample(self, rng: RandomSource) -> float:
        x = _open_sample(rng, self.low, self.high)
        return float(min(max(x, self.low), self.high))

    def describe(self) -> str:
        return f"real-box[{_bound_text(self.low)}, {_bound_text(self.high)}]"


@dataclass(frozen=True)
class EnumChoice:
    members: Tuple[Member, ...]
    kind = "enum-choice"

    def contains(self, value) -> bool:
        return value in self.members

    def sample(self, rng: RandomSource) -> Member:
        return self.members[rng.integers(0, len(self.members) - 1)]

    def describe(self) -> str:
        return "enum-choice{" + ", ".join(str(m) for m in self.members) + "}"


def space_for(prange: str, bounds=None, members=None):
    lo, hi = bounds if bounds is not None else (-math.inf, math.inf)
    if prange == "bool":
        return Binary()
    if prange == "int":
        return IntegerInterval(lo, hi)
    if prange == "real":
        return RealBox(lo, hi)
    return EnumChoice(tuple(members or ()))


class SpaceDescriptor(Dict[str, object]):
    """Mapping grounded name -> space, with whole-mapping helpers."""

    def sample(self, rng: RandomSource) -> Dict[str, object]:
        return {k: s.sample(rng) for k, s in self.items()}

    def contains(self, values) -> bool:
        return set(values) <= set(self) and all(self[k].contains(v)
                                                for k, v in values.items())

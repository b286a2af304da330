"""Base 1D chaotic maps (tent, sine, logistic) and mod-1 arithmetic.

All three maps are the normalized forms on [0, 1] that peak at exactly r
and are fully chaotic at r = 1:

    tent(r, x)     = 2*r*x          if x < 0.5 else 2*r*(1 - x)
    sine(r, x)     = r*sin(pi*x)
    logistic(r, x) = 4*r*x*(1 - x)

Everything here is a pure function of its arguments.
"""

from __future__ import annotations

import enum
import math

__all__ = ["BaseMap", "NonFiniteError", "mod1", "eval_base_map"]


class NonFiniteError(ValueError):
    """Raised when a value that must be finite is NaN or infinite."""


class BaseMap(enum.Enum):
    TENT = "tent"
    SIN = "sin"
    LOGISTIC = "logistic"


def mod1(v: float) -> float:
    """Reduce v to the unit interval: v - floor(v), always in [0, 1).

    Uses floor-based remainder so negative inputs wrap into [0, 1).
    Raises NonFiniteError for NaN or infinite input.
    """
    if not math.isfinite(v):
        raise NonFiniteError(f"mod1 of non-finite value {v!r}")
    f = v - math.floor(v)
    # v - floor(v) can round up to exactly 1.0 for v just below an integer.
    return 0.0 if f >= 1.0 else f


def _tent(r: float, x: float) -> float:
    return 2.0 * r * x if x < 0.5 else 2.0 * r * (1.0 - x)


def _sin(r: float, x: float) -> float:
    return r * math.sin(math.pi * x)


def _logistic(r: float, x: float) -> float:
    return 4.0 * r * x * (1.0 - x)


_DISPATCH = {
    BaseMap.TENT: _tent,
    BaseMap.SIN: _sin,
    BaseMap.LOGISTIC: _logistic,
}


def eval_base_map(base: BaseMap, r: float, x: float) -> float:
    """Evaluate one of the three base maps at control parameter r.

    Defined for x in [0, 1] and r in (0, 1.2]; output lies in [0, r]
    for r <= 1.
    """
    return _DISPATCH[base](r, x)

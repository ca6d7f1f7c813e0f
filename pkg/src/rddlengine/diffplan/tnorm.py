"""T-norms and the fuzzy connectives built from them."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, Tuple

from ..errors import RelaxationError


@dataclass(frozen=True)
class TNorm:
    """A t-norm with its partial derivatives.

    ``grad(a, b)`` returns ``(dT/da, dT/db)``; at kinks any subgradient will do.
    """
    name: str
    fn: Callable[[float, float], float]
    grad: Callable[[float, float], Tuple[float, float]]

    def __call__(self, a: float, b: float) -> float:
        return self.fn(a, b)


def _godel_grad(a, b):
    return (1.0, 0.0) if a <= b else (0.0, 1.0)


PRODUCT = TNorm("product", lambda a, b: a * b, lambda a, b: (b, a))
GODEL = TNorm("godel", lambda a, b: a if a <= b else b, _godel_grad)

_REGISTRY: Dict[str, TNorm] = {"product": PRODUCT, "godel": GODEL}


def register_tnorm(tnorm: TNorm) -> TNorm:
    _REGISTRY[tnorm.name] = tnorm
    return tnorm


def get_tnorm(name) -> TNorm:
    if isinstance(name, TNorm):
        return name
    try:
        return _REGISTRY[name]
    except KeyError:
        raise RelaxationError(f"unknown t-norm {name!r}; known: "
                              f"{', '.join(sorted(_REGISTRY))}") from None


def available_tnorms():
    return sorted(_REGISTRY)


# scalar connectives, used directly by tests and mirrored by the graph builder

def fuzzy_and(t: TNorm, a: float, b: float) -> float:
    return t(a, b)


def fuzzy_not(a: float) -> float:
    return 1.0 - a


def fuzzy_or(t: TNorm, a: float, b: float) -> float:
    return 1.0 - t(1.0 - a, 1.0 - b)


def fuzzy_implies(t: TNorm, a: float, b: float) -> float:
    return 1.0 - t(a, 1.0 - b)


def fuzzy_forall(t: TNorm, xs) -> float:
    xs = list(xs)
    if not xs:
        return 1.0
    acc = xs[-1]
    for x in reversed(xs[:-1]):
        acc = t(x, acc)
    return acc


def sigmoid(x: float) -> float:
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


def sech2(x: float) -> float:
    ax = abs(x)
    if ax > 350.0:
        return 0.0
    c = math.cosh(ax)
    return 1.0 / (c * c)


def soft_greater(a: float, b: float, tau: float) -> float:
    return sigmoid((a - b) / tau)


def soft_equal(a: float, b: float, tau: float) -> float:
    return sech2((b - a) / tau)


def soft_if(c: float, a: float, b: float) -> float:
    return c * a + (1.0 - c) * b

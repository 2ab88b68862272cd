"""Deterministic local hidden-variable strategies.

Each strategy answers ``+1`` or ``-1`` from its own measurement direction and
its own hidden variable only.  The built-ins share one ``lambda`` drawn
uniformly on the unit sphere between the two wings.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .rng import uniform_sphere
from .spin import Direction

Response = Callable[[Direction, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class LhvStrategy:
    name: str
    respond_a: Response
    respond_b: Response
    # (generator, size) -> (lambda1, lambda2)
    sample_lambda: Callable[[np.random.Generator, int], tuple[np.ndarray, np.ndarray]]
    lambda_space: str = "shared uniform S2"


def _shared_sphere(gen, size):
    lam = uniform_sphere(gen, size)
    return lam, lam


def _sgn(x):
    # sgn(0) := +1 keeps responses strictly binary
    return np.where(x >= 0.0, 1, -1).astype(np.int8)


def _sgn_a(n, lam):
    return _sgn(lam @ n.vector)


def _sgn_b(n, lam):
    return -_sgn(lam @ n.vector)


_AXES = np.vstack((np.eye(3), -np.eye(3)))


def _snap(n: Direction) -> np.ndarray:
    # nearest of the six signed coordinate axes; ties resolve to the first
    return _AXES[int(np.argmax(_AXES @ n.vector))]


def _octant_a(n, lam):
    return _sgn(lam @ _snap(n))


def _octant_b(n, lam):
    return -_sgn(lam @ _snap(n))


def _const_a(n, lam):
    return np.ones(len(lam), dtype=np.int8)


def _const_b(n, lam):
    return -np.ones(len(lam), dtype=np.int8)


SGN = LhvStrategy("sgn", _sgn_a, _sgn_b, _shared_sphere)
OCTANT = LhvStrategy("octant", _octant_a, _octant_b, _shared_sphere)
CONSTANT = LhvStrategy("constant", _const_a, _const_b, _shared_sphere)

STRATEGIES = {s.name: s for s in (SGN, OCTANT, CONSTANT)}


def get_strategy(name: str) -> LhvStrategy:
    try:
        return STRATEGIES[name]
    except KeyError:
        raise KeyError(f"unknown LHV strategy {name!r}; known: {', '.join(sorted(STRATEGIES))}") from None


def sgn_closed_form(theta: float) -> float:
    """Correlation of the ``sgn`` strategy at angle ``theta`` between the axes."""
    return -1.0 + 2.0 * theta / np.pi

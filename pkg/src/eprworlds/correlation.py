"""Spin-product correlations, the three-direction Bell inequality and the theta average.

The quantum correlation is computed along two routes that share no code
beyond state preparation: counting worlds after the three local
measurements, and the operator expectation value of (n1.sigma)(n2.sigma).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .lhv import LhvStrategy
from .measurement import MeasurementSetup, run_three_measurements
from .rng import map_chunks
from .spin import Direction, StateVector, Z, make_singlet, spin_observable_expectation
from .worlds import decompose_branches

EXACT_MARGIN = 1e-9


class Method(str, Enum):
    WORLD_COUNTING = "WorldCounting"
    OPERATOR = "OperatorExpectation"
    LHV = "LhvMonteCarlo"


@dataclass(frozen=True)
class CorrelationResult:
    axes: tuple[Direction, Direction]
    value: float
    method: Method
    stderr: float = 0.0
    samples: int = 0


def worlds_product_sum(state: StateVector) -> float:
    """Sum over branches of (outcome 1)(outcome 2) times branch weight."""
    return math.fsum(b.outcome_product * b.weight for b in decompose_branches(state))


def correlation_world_counting_axes(axis1: Direction, axis2: Direction) -> CorrelationResult:
    state = run_three_measurements(make_singlet(axis1), MeasurementSetup(axis1, axis2))
    return CorrelationResult((axis1, axis2), worlds_product_sum(state), Method.WORLD_COUNTING)


def correlation_world_counting(theta: float) -> CorrelationResult:
    """Device 1 along z, device 2 tilted by ``theta`` (azimuth 0); singlet prepared along z."""
    if not 0.0 <= theta <= math.pi:
        raise ValueError(f"theta={theta} outside [0, pi]")
    return correlation_world_counting_axes(Z, Direction(theta, 0.0))


def correlation_operator(axes: tuple[Direction, Direction]) -> CorrelationResult:
    axis1, axis2 = axes
    value = spin_observable_expectation(make_singlet(Z), axis1, axis2)
    return CorrelationResult((axis1, axis2), value, Method.OPERATOR)


def correlation_lhv(
    strategy: LhvStrategy,
    axes: tuple[Direction, Direction],
    samples: int,
    seed: int,
    workers: int = 1,
) -> CorrelationResult:
    """Monte Carlo mean of A(n1, lambda1) B(n2, lambda2); stderr uses the sample std."""
    return correlation_lhv_many(strategy, [axes], samples, seed, workers)[0]


def correlation_lhv_many(
    strategy: LhvStrategy,
    pairs,
    samples: int,
    seed: int,
    workers: int = 1,
) -> list[CorrelationResult]:
    """Several axis pairs scored on one hidden-variable sample.

    Identical, result for result, to calling :func:`correlation_lhv` per pair
    with the same seed; each distinct direction is evaluated once per chunk.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    pairs = [tuple(p) for p in pairs]
    keys: dict[tuple, int] = {}
    sides: list[tuple[str, Direction]] = []

    def slot(side, d):
        key = (side, *d.vector.tolist())
        if key not in keys:
            keys[key] = len(sides)
            sides.append((side, d))
        return keys[key]

    index = [(slot("a", a), slot("b", b)) for a, b in pairs]

    def chunk(gen, size):
        lam1, lam2 = strategy.sample_lambda(gen, size)
        out = [
            strategy.respond_a(d, lam1).astype(np.int64) if side == "a" else strategy.respond_b(d, lam2)
            for side, d in sides
        ]
        return [int((out[ka] * out[kb]).sum()) for ka, kb in index]

    totals = np.sum(np.array(map_chunks(chunk, seed, samples, workers), dtype=np.int64), axis=0)
    results = []
    for axes, total in zip(pairs, totals.tolist()):
        mean = total / samples
        # outcomes are +-1, so sum of squares equals the sample count
        var = max(0.0, (samples - samples * mean * mean) / (samples - 1)) if samples > 1 else 0.0
        results.append(CorrelationResult(axes, mean, Method.LHV, math.sqrt(var / samples), samples))
    return results


CorrelationSource = Callable[[Direction, Direction], CorrelationResult]


def quantum_source(method: Method = Method.OPERATOR) -> CorrelationSource:
    if method is Method.WORLD_COUNTING:
        return correlation_world_counting_axes
    if method is Method.OPERATOR:
        return lambda a, b: correlation_operator((a, b))
    raise ValueError(f"{method} is not a quantum source")


def lhv_source(strategy: LhvStrategy, samples: int, seed: int, workers: int = 1) -> CorrelationSource:
    """Every pair reuses the same seed, hence the same hidden-variable sample."""
    return lambda a, b: correlation_lhv(strategy, (a, b), samples, seed, workers)


@dataclass(frozen=True)
class BellVerdict:
    triple: tuple[Direction, Direction, Direction]
    p12: CorrelationResult
    p13: CorrelationResult
    p23: CorrelationResult
    lhs: float
    rhs: float
    margin: float
    violated: bool

    @property
    def gap(self) -> float:
        return self.lhs - self.rhs


def bell_test(
    source: CorrelationSource,
    triple: tuple[Direction, Direction, Direction],
    margin: float | None = None,
) -> BellVerdict:
    """Check |P(n1,n2) - P(n1,n3)| <= 1 + P(n2,n3).

    The default margin is ``EXACT_MARGIN`` for exact sources and three
    combined standard errors for stochastic ones.
    """
    n1, n2, n3 = triple
    return _verdict(triple, source(n1, n2), source(n1, n3), source(n2, n3), margin)


def lhv_bell_tests(
    strategy: LhvStrategy,
    triples,
    samples: int,
    seed: int,
    workers: int = 1,
) -> list[BellVerdict]:
    """:func:`bell_test` with :func:`lhv_source` for many triples, sharing one sample."""
    triples = [tuple(t) for t in triples]
    pairs = [p for n1, n2, n3 in triples for p in ((n1, n2), (n1, n3), (n2, n3))]
    flat = correlation_lhv_many(strategy, pairs, samples, seed, workers)
    return [_verdict(t, *flat[3 * i : 3 * i + 3]) for i, t in enumerate(triples)]


def _verdict(triple, p12, p13, p23, margin=None) -> BellVerdict:
    lhs = abs(p12.value - p13.value)
    rhs = 1.0 + p23.value
    if margin is None:
        spread = math.sqrt(p12.stderr**2 + p13.stderr**2 + p23.stderr**2)
        margin = 3.0 * spread if spread > 0 else EXACT_MARGIN
    return BellVerdict(triple, p12, p13, p23, lhs, rhs, margin, lhs > rhs + margin)


def violating_triple(n2: Direction, n3: Direction) -> tuple[Direction, Direction, Direction]:
    """``(n1, n2, n3)`` with n1 = (n2 - n3)/|n2 - n3|."""
    diff = n2.vector - n3.vector
    return Direction.from_vector(diff), n2, n3


def decorrelated_average(quadrature_points: int = 64, scheme: str = "gauss-legendre") -> float:
    """Integral of the world-counting correlation over theta in [0, pi] (no 1/pi factor)."""
    if quadrature_points < 2:
        raise ValueError("quadrature_points must be >= 2")
    if scheme == "gauss-legendre":
        x, w = np.polynomial.legendre.leggauss(quadrature_points)
        thetas, weights = 0.5 * math.pi * (x + 1.0), 0.5 * math.pi * w
    elif scheme == "trapezoid":
        thetas = np.linspace(0.0, math.pi, quadrature_points)
        weights = np.full(quadrature_points, math.pi / (quadrature_points - 1))
        weights[[0, -1]] *= 0.5
    else:
        raise ValueError(f"unknown quadrature scheme {scheme!r}")
    values = [correlation_world_counting(float(t)).value for t in thetas]
    return math.fsum(float(w) * v for w, v in zip(weights, values))


@dataclass(frozen=True)
class ScanRow:
    theta_deg: float
    e_world_counting: float
    e_operator: float
    e_lhv: float | None = None
    lhv_stderr: float | None = None


@dataclass(frozen=True)
class ScanTable:
    rows: tuple[ScanRow, ...]
    lhv_strategy: str | None = None

    @property
    def max_path_disagreement(self) -> float:
        return max((abs(r.e_world_counting - r.e_operator) for r in self.rows), default=0.0)


def theta_scan(
    start_deg: float,
    stop_deg: float,
    points: int,
    lhv: LhvStrategy | None = None,
    samples: int = 10**4,
    seed: int = 0,
) -> ScanTable:
    """Both quantum routes (and optionally one LHV strategy) on an evenly spaced theta grid."""
    if points < 2:
        raise ValueError("points must be >= 2")
    degs = [float(d) for d in np.linspace(start_deg, stop_deg, points)]
    pairs = [(Z, Direction.from_degrees(d, 0.0)) for d in degs]
    mc = [None] * len(pairs) if lhv is None else correlation_lhv_many(lhv, pairs, samples, seed)
    rows = []
    for deg, axes, r in zip(degs, pairs, mc):
        e_w = correlation_world_counting(math.radians(deg)).value
        e_o = correlation_operator(axes).value
        rows.append(ScanRow(deg, e_w, e_o) if r is None else ScanRow(deg, e_w, e_o, r.value, r.stderr))
    return ScanTable(tuple(rows), None if lhv is None else lhv.name)
